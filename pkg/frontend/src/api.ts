// Thin typed client over the HTTP API. The fetch function is injectable so
// tests can drive the client against a scripted transport.

import type { HistoryEntry, ProfileRow, ServerConfig, TranslateRequest, TranslateResponse } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && body.detail) detail = String(body.detail);
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  getConfig(): Promise<ServerConfig> {
    return this.request<ServerConfig>("/api/config");
  }

  async uploadImage(data: Blob | ArrayBuffer): Promise<string> {
    const body = data instanceof Blob ? data : new Blob([data]);
    const out = await this.request<{ image_id: string }>("/api/images", { method: "POST", body });
    return out.image_id;
  }

  translate(req: TranslateRequest): Promise<TranslateResponse> {
    return this.request<TranslateResponse>("/api/translate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  async spectrum(imageId: string, compareId?: string, nbins = 64): Promise<ProfileRow[]> {
    const params = new URLSearchParams({ image_id: imageId, nbins: String(nbins) });
    if (compareId) params.set("compare_id", compareId);
    const out = await this.request<{ profile: ProfileRow[] }>(`/api/spectrum?${params}`);
    return out.profile;
  }

  async history(): Promise<HistoryEntry[]> {
    const out = await this.request<{ history: HistoryEntry[] }>("/api/history");
    return out.history;
  }
}
