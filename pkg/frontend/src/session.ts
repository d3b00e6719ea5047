// Client-side tuning session: slider state, the cache-then-network rule,
// and a local mirror of the server history. No DOM access here.

import { ApiClient } from "./api.js";
import { ResultCache } from "./cache.js";
import type { TranslateParams, TranslateResponse } from "./types.js";

export interface SessionEntry {
  imageId: string;
  params: TranslateParams;
  response: TranslateResponse;
  fromCache: boolean;
}

export class TuningSession {
  params: TranslateParams = { eta: 10, tilde_t: 4, seed: 0, ablation: "full" };
  imageId: string | null = null;
  maxTildeT = 8;
  readonly cache = new ResultCache();
  readonly log: SessionEntry[] = [];
  networkCalls = 0;

  constructor(private api: ApiClient) {}

  async loadServerBounds(): Promise<void> {
    const config = await this.api.getConfig();
    if (config.T) this.maxTildeT = config.T;
    this.params = { ...this.params, ...config.defaults, ablation: "full" };
  }

  setImage(imageId: string): void {
    this.imageId = imageId;
  }

  setParam<K extends keyof TranslateParams>(key: K, value: TranslateParams[K]): void {
    this.params = { ...this.params, [key]: value };
  }

  clampParams(): void {
    this.params.eta = Math.round(Math.min(25, Math.max(1, this.params.eta)));
    this.params.tilde_t = Math.round(Math.min(this.maxTildeT, Math.max(1, this.params.tilde_t)));
  }

  /** Translate with the current config: served from cache when seen before,
   * otherwise exactly one network request. */
  async translate(paramsOverride?: Partial<TranslateParams>): Promise<SessionEntry> {
    if (!this.imageId) throw new Error("no image selected");
    const params: TranslateParams = { ...this.params, ...paramsOverride };
    const cached = this.cache.get(this.imageId, params);
    if (cached) {
      const entry = { imageId: this.imageId, params, response: cached, fromCache: true };
      this.log.push(entry);
      return entry;
    }
    this.networkCalls += 1;
    const response = await this.api.translate({ image_id: this.imageId, ...params });
    this.cache.put(this.imageId, params, response);
    const entry = { imageId: this.imageId, params, response, fromCache: false };
    this.log.push(entry);
    return entry;
  }
}
