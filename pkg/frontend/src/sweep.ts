// Sweep matrix: evaluate the Cartesian grid of (eta, tilde_t) sequentially
// through the session (so the cache is shared with the compare view).
// Per-cell failures become error cells without aborting the grid.

import type { TuningSession } from "./session.js";
import type { Metrics, TranslateParams } from "./types.js";

export interface SweepCell {
  eta: number;
  tilde_t: number;
  ok: boolean;
  metrics?: Metrics;
  thumbnail?: string; // base64 PNG
  error?: string;
}

export function sweepGrid(etas: number[], tildeTs: number[]): Array<{ eta: number; tilde_t: number }> {
  const cells = [];
  for (const eta of etas) {
    for (const tilde_t of tildeTs) {
      cells.push({ eta, tilde_t });
    }
  }
  return cells;
}

export async function runSweep(
  session: TuningSession,
  etas: number[],
  tildeTs: number[],
  onCell?: (cell: SweepCell, index: number, total: number) => void,
): Promise<SweepCell[]> {
  const grid = sweepGrid(etas, tildeTs);
  const cells: SweepCell[] = [];
  for (const [index, { eta, tilde_t }] of grid.entries()) {
    const override: Partial<TranslateParams> = { eta, tilde_t };
    let cell: SweepCell;
    try {
      const entry = await session.translate(override);
      cell = {
        eta,
        tilde_t,
        ok: true,
        metrics: entry.response.metrics,
        thumbnail: entry.response.result_image,
      };
    } catch (err) {
      cell = { eta, tilde_t, ok: false, error: String(err) };
    }
    cells.push(cell);
    if (onCell) onCell(cell, index, grid.length);
  }
  return cells;
}
