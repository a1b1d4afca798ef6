/** Thin typed client for the synthesis service. */
export class ApiTransport {
    baseUrl;
    fetchFn;
    constructor(baseUrl, fetchFn = fetch) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
    }
    async templates() {
        const resp = await this.fetchFn(`${this.baseUrl}/api/templates`);
        if (!resp.ok) {
            throw new Error(`templates: HTTP ${resp.status}`);
        }
        const body = (await resp.json());
        return body.templates;
    }
    async synthesize(request) {
        const resp = await this.fetchFn(`${this.baseUrl}/api/synthesize`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(request),
        });
        const body = (await resp.json());
        if (!resp.ok) {
            throw new Error(body.error ?? `synthesize: HTTP ${resp.status}`);
        }
        return body;
    }
    async health() {
        const resp = await this.fetchFn(`${this.baseUrl}/api/health`);
        return (await resp.json());
    }
}
