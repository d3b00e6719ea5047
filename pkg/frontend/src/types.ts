// Payload types for the tuning service API.

export interface TranslateParams {
  eta: number;
  tilde_t: number;
  seed: number;
  ablation: "full" | "no_high_freq" | "no_low_freq";
}

export interface TranslateRequest extends TranslateParams {
  image_id: string;
}

export interface Metrics {
  psnr_source: number;
  ssim_source: number;
  freq_mse_source: number;
}

export interface TranslateResponse {
  result_image: string; // base64 PNG
  h_image: string;
  l_image: string;
  metrics: Metrics;
  elapsed_ms: number;
}

export interface ServerConfig {
  version: string;
  checkpoint_loaded: boolean;
  T: number | null;
  defaults: { eta: number; tilde_t: number; seed: number };
  eta_range: [number, number];
  ablations: string[];
}

export type ProfileRow = [number, number];

export interface HistoryEntry {
  image_id: string;
  config: TranslateParams;
  metrics: Metrics;
  elapsed_ms: number;
  timestamp: string;
}
