// Result cache keyed by the full translation config. A cache hit must never
// trigger a network call, so parameter replays are free.

import type { TranslateParams, TranslateResponse } from "./types.js";

export function configKey(imageId: string, params: TranslateParams): string {
  return [imageId, params.eta, params.tilde_t, params.seed, params.ablation].join("|");
}

export class ResultCache {
  private entries = new Map<string, TranslateResponse>();

  get(imageId: string, params: TranslateParams): TranslateResponse | undefined {
    return this.entries.get(configKey(imageId, params));
  }

  put(imageId: string, params: TranslateParams, response: TranslateResponse): void {
    this.entries.set(configKey(imageId, params), response);
  }

  has(imageId: string, params: TranslateParams): boolean {
    return this.entries.has(configKey(imageId, params));
  }

  clear(): void {
    this.entries.clear();
  }

  get size(): number {
    return this.entries.size;
  }
}
