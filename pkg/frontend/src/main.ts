// Bootstraps the tuning console: upload, sliders, compare view, spectrum
// chart, history table, sweep matrix.

import { ApiClient } from "./api.js";
import { drawProfiles } from "./chart.js";
import { debounce, LatestWins } from "./debounce.js";
import { CompareView, PANELS } from "./panels.js";
import { TuningSession, type SessionEntry } from "./session.js";
import { runSweep } from "./sweep.js";
import type { TranslateParams } from "./types.js";

const api = new ApiClient("");
const session = new TuningSession(api);
const runner = new LatestWins<SessionEntry>();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const status = el<HTMLSpanElement>("status");
const compare = new CompareView({
  source: el("panel-source"),
  edges: el("panel-edges"),
  lowpass: el("panel-lowpass"),
  output: el("panel-output"),
});

function setStatus(text: string, isError = false): void {
  status.textContent = text;
  status.className = isError ? "error" : "";
}

function sliderBinding(id: string, labelId: string, key: keyof TranslateParams): HTMLInputElement {
  const input = el<HTMLInputElement>(id);
  const label = el<HTMLSpanElement>(labelId);
  input.addEventListener("input", () => {
    label.textContent = input.value;
    session.setParam(key, Number(input.value) as never);
    requestTranslate();
  });
  return input;
}

const etaSlider = sliderBinding("eta", "eta-value", "eta");
const tildeSlider = sliderBinding("tilde-t", "tilde-t-value", "tilde_t");
const seedInput = el<HTMLInputElement>("seed");
seedInput.addEventListener("change", () => {
  session.setParam("seed", Number(seedInput.value));
  requestTranslate();
});
const ablationSelect = el<HTMLSelectElement>("ablation");
ablationSelect.addEventListener("change", () => {
  session.setParam("ablation", ablationSelect.value as TranslateParams["ablation"]);
  requestTranslate();
});

const requestTranslate = debounce(() => {
  if (!session.imageId) return;
  session.clampParams();
  runner.submit(
    () => session.translate(),
    (entry) => renderEntry(entry),
    (err) => setStatus(`translate failed: ${err}`, true),
  );
}, 150);

function renderEntry(entry: SessionEntry): void {
  compare.setImage("edges", entry.params.ablation === "no_high_freq" ? null : entry.response.h_image);
  compare.setImage("lowpass", entry.response.l_image);
  compare.setImage("output", entry.response.result_image);
  const m = entry.response.metrics;
  el("metric-psnr").textContent = m.psnr_source.toFixed(2);
  el("metric-ssim").textContent = m.ssim_source.toFixed(3);
  el("metric-fmse").textContent = m.freq_mse_source.toExponential(2);
  const origin = entry.fromCache ? "cache" : `${entry.response.elapsed_ms.toFixed(0)} ms`;
  setStatus(`eta=${entry.params.eta} tilde_t=${entry.params.tilde_t} seed=${entry.params.seed} (${origin})`);
  refreshHistory();
  refreshSpectrum();
}

async function refreshHistory(): Promise<void> {
  const entries = await api.history();
  const tbody = el<HTMLTableSectionElement>("history-body");
  tbody.innerHTML = "";
  for (const entry of entries.slice().reverse()) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${entry.timestamp}</td><td>${entry.config.eta}</td><td>${entry.config.tilde_t}</td>` +
      `<td>${entry.config.seed}</td><td>${entry.config.ablation}</td>` +
      `<td>${entry.metrics.psnr_source.toFixed(2)}</td><td>${entry.metrics.ssim_source.toFixed(3)}</td>`;
    tbody.appendChild(row);
  }
}

let spectrumLog = true;
el<HTMLButtonElement>("spectrum-scale").addEventListener("click", () => {
  spectrumLog = !spectrumLog;
  refreshSpectrum();
});

async function refreshSpectrum(): Promise<void> {
  if (!session.imageId) return;
  try {
    const rows = await api.spectrum(session.imageId);
    drawProfiles(el<HTMLCanvasElement>("spectrum"), [{ rows, color: "#58a6ff", label: "source PSD" }], spectrumLog);
  } catch (err) {
    setStatus(`spectrum failed: ${err}`, true);
  }
}

el<HTMLInputElement>("file").addEventListener("change", async (ev) => {
  const input = ev.target as HTMLInputElement;
  const file = input.files && input.files[0];
  if (!file) return;
  try {
    const imageId = await api.uploadImage(file);
    session.setImage(imageId);
    const url = URL.createObjectURL(file);
    const img = new Image();
    img.onload = () => {
      compare.setImage("source", "");
      const canvas = el<HTMLCanvasElement>("panel-source");
      const ctx = canvas.getContext("2d");
      if (ctx) {
        ctx.fillStyle = "#000";
        ctx.fillRect(0, 0, canvas.width, canvas.height);
        const s = Math.min(canvas.width / img.width, canvas.height / img.height);
        ctx.drawImage(img, 0, 0, img.width * s, img.height * s);
      }
      URL.revokeObjectURL(url);
    };
    img.src = url;
    setStatus(`uploaded ${file.name} as ${imageId}`);
    requestTranslate();
  } catch (err) {
    setStatus(`upload failed: ${err}`, true);
  }
});

el<HTMLButtonElement>("run-sweep").addEventListener("click", async () => {
  if (!session.imageId) {
    setStatus("upload an image first", true);
    return;
  }
  const etas = el<HTMLInputElement>("sweep-etas").value.split(",").map(Number);
  const tildeTs = el<HTMLInputElement>("sweep-tilde-ts").value.split(",").map(Number);
  const grid = el<HTMLDivElement>("sweep-grid");
  grid.innerHTML = "";
  grid.style.gridTemplateColumns = `repeat(${tildeTs.length}, 1fr)`;
  setStatus("sweeping...");
  await runSweep(session, etas, tildeTs, (cell) => {
    const div = document.createElement("div");
    div.className = cell.ok ? "cell" : "cell error";
    if (cell.ok && cell.metrics) {
      div.innerHTML =
        `<img src="data:image/png;base64,${cell.thumbnail}" alt="">` +
        `<span>η${cell.eta} T̃${cell.tilde_t}<br>${cell.metrics.psnr_source.toFixed(1)} dB</span>`;
      div.addEventListener("click", () => {
        etaSlider.value = String(cell.eta);
        tildeSlider.value = String(cell.tilde_t);
        el("eta-value").textContent = String(cell.eta);
        el("tilde-t-value").textContent = String(cell.tilde_t);
        session.setParam("eta", cell.eta);
        session.setParam("tilde_t", cell.tilde_t);
        requestTranslate();
      });
    } else {
      div.textContent = `η${cell.eta} T̃${cell.tilde_t}: ${cell.error}`;
    }
    grid.appendChild(div);
  });
  setStatus("sweep complete");
});

async function init(): Promise<void> {
  try {
    await session.loadServerBounds();
    tildeSlider.max = String(session.maxTildeT);
    etaSlider.value = String(session.params.eta);
    tildeSlider.value = String(session.params.tilde_t);
    el("eta-value").textContent = etaSlider.value;
    el("tilde-t-value").textContent = tildeSlider.value;
    setStatus(session.maxTildeT ? `ready (T=${session.maxTildeT})` : "ready");
  } catch (err) {
    setStatus(`server unreachable: ${err}`, true);
  }
}

void init();
