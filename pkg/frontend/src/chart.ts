// Minimal canvas line chart for radial spectral profiles, with a log-scale
// toggle. Axis labels are intentionally sparse; this is a tuning aid, not a
// publication plot.

import type { ProfileRow } from "./types.js";

export interface ChartSeries {
  rows: ProfileRow[];
  color: string;
  label: string;
}

export function drawProfiles(canvas: HTMLCanvasElement, series: ChartSeries[], logScale: boolean): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, width, height);

  const pad = 28;
  const values = series.flatMap((s) => s.rows.map(([, v]) => v)).filter((v) => (logScale ? v > 0 : true));
  if (!values.length) return;
  const transform = (v: number) => (logScale ? Math.log10(Math.max(v, 1e-12)) : v);
  const lo = Math.min(...values.map(transform));
  const hi = Math.max(...values.map(transform));
  const span = hi - lo || 1;
  const fmax = Math.max(...series.flatMap((s) => s.rows.map(([f]) => f))) || 1;

  ctx.strokeStyle = "#2a3442";
  ctx.strokeRect(pad, pad / 2, width - pad * 1.5, height - pad * 1.5);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    s.rows.forEach(([f, v], i) => {
      const x = pad + (f / fmax) * (width - pad * 1.5);
      const y = height - pad + ((transform(v) - lo) / span) * (pad * 1.5 - height);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }

  ctx.fillStyle = "#9fb2c8";
  ctx.font = "11px sans-serif";
  ctx.fillText(logScale ? "log10 value" : "value", 4, 12);
  ctx.fillText("cycles/px", width - pad * 2, height - 6);
  series.forEach((s, i) => {
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, pad + 6, 14 + i * 13);
  });
}
