/** Thin typed client for the synthesis service. */

import {
  SynthesisRequest,
  SynthesisResponse,
  TemplateEntry,
  Transport,
} from "./types.js";

export class ApiTransport implements Transport {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async templates(): Promise<TemplateEntry[]> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/templates`);
    if (!resp.ok) {
      throw new Error(`templates: HTTP ${resp.status}`);
    }
    const body = (await resp.json()) as { templates: TemplateEntry[] };
    return body.templates;
  }

  async synthesize(request: SynthesisRequest): Promise<SynthesisResponse> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/synthesize`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    const body = (await resp.json()) as SynthesisResponse & { error?: string };
    if (!resp.ok) {
      throw new Error(body.error ?? `synthesize: HTTP ${resp.status}`);
    }
    return body;
  }

  async health(): Promise<{ status: string; checkpoint: string | null }> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/health`);
    return (await resp.json()) as { status: string; checkpoint: string | null };
  }
}
