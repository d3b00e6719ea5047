import { describe, expect, it } from "vitest";

import { configKey, ResultCache } from "../src/cache.js";
import type { TranslateParams, TranslateResponse } from "../src/types.js";

const params: TranslateParams = { eta: 10, tilde_t: 4, seed: 0, ablation: "full" };
const response = { result_image: "r", h_image: "h", l_image: "l", metrics: {} as never, elapsed_ms: 1 } as TranslateResponse;

describe("configKey", () => {
  it("distinguishes every config field", () => {
    const base = configKey("img-1", params);
    expect(configKey("img-2", params)).not.toBe(base);
    expect(configKey("img-1", { ...params, eta: 11 })).not.toBe(base);
    expect(configKey("img-1", { ...params, tilde_t: 5 })).not.toBe(base);
    expect(configKey("img-1", { ...params, seed: 1 })).not.toBe(base);
    expect(configKey("img-1", { ...params, ablation: "no_high_freq" })).not.toBe(base);
  });

  it("is stable for equal configs", () => {
    expect(configKey("img-1", { ...params })).toBe(configKey("img-1", { ...params }));
  });
});

describe("ResultCache", () => {
  it("misses before put and hits after", () => {
    const cache = new ResultCache();
    expect(cache.get("img-1", params)).toBeUndefined();
    cache.put("img-1", params, response);
    expect(cache.get("img-1", params)).toBe(response);
    expect(cache.has("img-1", params)).toBe(true);
    expect(cache.size).toBe(1);
  });

  it("clear empties everything", () => {
    const cache = new ResultCache();
    cache.put("img-1", params, response);
    cache.clear();
    expect(cache.size).toBe(0);
  });
});
