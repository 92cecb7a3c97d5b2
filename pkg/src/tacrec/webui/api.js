/** Typed client for the recommendation service HTTP API. */
/** A failed API call: HTTP errors carry the server's error code, network
 * failures use the synthetic code "network". */
export class ApiError extends Error {
    constructor(code, message, status = null) {
        super(message);
        this.name = "ApiError";
        this.code = code;
        this.status = status;
    }
}
export class ApiClient {
    constructor(base = "", fetchImpl) {
        this.base = base.replace(/\/$/, "");
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }
    async recommend(tactics, n, k, signal) {
        const body = JSON.stringify({ tactics: [...tactics], n, k });
        const resp = await this.request(`${this.base}/api/recommend`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body,
            signal,
        });
        return (await this.parse(resp));
    }
    async vocab(signal) {
        const resp = await this.request(`${this.base}/api/vocab`, { signal });
        return (await this.parse(resp));
    }
    async health(signal) {
        const resp = await this.request(`${this.base}/api/health`, { signal });
        return (await this.parse(resp));
    }
    async request(url, init) {
        try {
            return await this.fetchImpl(url, init);
        }
        catch (err) {
            if (err instanceof DOMException && err.name === "AbortError")
                throw err;
            const msg = err instanceof Error ? err.message : String(err);
            throw new ApiError("network", `service unreachable: ${msg}`);
        }
    }
    async parse(resp) {
        let body = null;
        try {
            body = await resp.json();
        }
        catch {
            // fall through: non-JSON body is reported via the status line below
        }
        if (!resp.ok) {
            const obj = (body ?? {});
            const code = typeof obj.error === "string" ? obj.error : "http-error";
            const message = typeof obj.message === "string" ? obj.message : `HTTP ${resp.status}`;
            throw new ApiError(code, message, resp.status);
        }
        if (body === null || typeof body !== "object") {
            throw new ApiError("bad-response", "response body is not a JSON object", resp.status);
        }
        return body;
    }
}
