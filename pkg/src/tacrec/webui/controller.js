/** Wires the session state to the DOM: tactic composer, request knobs,
 * ranked suggestions, warnings, and the (non-blocking) error banner.
 *
 * Fetch discipline: edits schedule a debounced request; clicking a
 * suggestion or the Recommend button fetches immediately.  At most one
 * request is in flight -- newer requests abort older ones.
 */
import { ApiError } from "./api.js";
import { MAX_N, MIN_N, canUndo, initialSession, sessionAppend, sessionAppendAll, sessionClear, sessionUndo, setK, setN, withResponse, } from "./session.js";
function grab(root, selector) {
    const el = root.querySelector(selector);
    if (!el)
        throw new Error(`missing element: ${selector}`);
    return el;
}
export class Controller {
    constructor(root, api, options = {}) {
        this.state = initialSession();
        this.debounceHandle = null;
        this.inflight = null;
        this.requestSeq = 0;
        this.api = api;
        this.debounceMs = options.debounceMs ?? 300;
        this.el = {
            form: grab(root, "#tactic-form"),
            input: grab(root, "#tactic-input"),
            inputError: grab(root, "#input-error"),
            vocabList: grab(root, "#vocab-list"),
            tacticList: grab(root, "#tactic-list"),
            undoBtn: grab(root, "#undo-btn"),
            clearBtn: grab(root, "#clear-btn"),
            nInput: grab(root, "#n-input"),
            kSelect: grab(root, "#k-select"),
            recommendBtn: grab(root, "#recommend-btn"),
            suggestions: grab(root, "#suggestions"),
            suggestionsHint: grab(root, "#suggestions-hint"),
            warnings: grab(root, "#warnings"),
            errorBanner: grab(root, "#error-banner"),
            statusLine: grab(root, "#status-line"),
        };
    }
    /** Current state, exposed for tests and debugging. */
    getState() {
        return this.state;
    }
    init() {
        this.el.form.addEventListener("submit", (ev) => {
            ev.preventDefault();
            this.addTactic();
        });
        this.el.undoBtn.addEventListener("click", () => this.undo());
        this.el.clearBtn.addEventListener("click", () => this.clear());
        this.el.nInput.addEventListener("change", () => this.changeN());
        this.el.kSelect.addEventListener("change", () => this.changeK());
        this.el.recommendBtn.addEventListener("click", () => {
            void this.fetchNow();
        });
        this.el.nInput.value = String(this.state.n);
        this.el.kSelect.value = String(this.state.k);
        this.render();
        void this.loadVocab();
        void this.loadHealth();
    }
    // -- user actions ---------------------------------------------------------
    addTactic() {
        const raw = this.el.input.value;
        if (raw.trim().length === 0) {
            this.el.inputError.textContent = "enter a tactic name";
            return;
        }
        this.el.inputError.textContent = "";
        this.state = sessionAppend(this.state, raw);
        this.el.input.value = "";
        this.render();
        this.scheduleFetch();
    }
    acceptSuggestion(index) {
        const resp = this.state.lastResponse;
        if (!resp || index < 0 || index >= resp.recommendations.length)
            return;
        this.state = sessionAppendAll(this.state, resp.recommendations[index].tactics);
        this.render();
        void this.fetchNow();
    }
    undo() {
        this.cancelPending();
        this.state = sessionUndo(this.state);
        this.el.nInput.value = String(this.state.n);
        this.el.kSelect.value = String(this.state.k);
        this.render();
    }
    clear() {
        this.cancelPending();
        this.state = sessionClear(this.state);
        this.render();
    }
    changeN() {
        const parsed = Number(this.el.nInput.value);
        const clamped = Number.isFinite(parsed)
            ? Math.min(MAX_N, Math.max(MIN_N, Math.round(parsed)))
            : this.state.n;
        this.el.nInput.value = String(clamped);
        if (clamped !== this.state.n) {
            this.state = setN(this.state, clamped);
            this.scheduleFetch();
        }
    }
    changeK() {
        const k = this.el.kSelect.value === "2" ? 2 : 1;
        if (k !== this.state.k) {
            this.state = setK(this.state, k);
            this.scheduleFetch();
        }
    }
    // -- fetching -------------------------------------------------------------
    scheduleFetch() {
        if (this.debounceHandle !== null)
            clearTimeout(this.debounceHandle);
        this.debounceHandle = setTimeout(() => {
            this.debounceHandle = null;
            void this.fetchNow();
        }, this.debounceMs);
    }
    async fetchNow() {
        if (this.debounceHandle !== null) {
            clearTimeout(this.debounceHandle);
            this.debounceHandle = null;
        }
        if (this.state.tactics.length === 0) {
            this.el.suggestionsHint.textContent = "compose at least one tactic first";
            return;
        }
        this.inflight?.abort();
        const controller = new AbortController();
        this.inflight = controller;
        const seq = ++this.requestSeq;
        this.el.recommendBtn.disabled = true;
        try {
            const resp = await this.api.recommend(this.state.tactics, this.state.n, this.state.k, controller.signal);
            if (seq !== this.requestSeq)
                return; // superseded meanwhile
            this.state = withResponse(this.state, resp);
            this.hideError();
            this.render();
        }
        catch (err) {
            if (err instanceof DOMException && err.name === "AbortError")
                return;
            if (seq !== this.requestSeq)
                return;
            this.showError(err);
        }
        finally {
            if (seq === this.requestSeq) {
                this.el.recommendBtn.disabled = false;
                this.inflight = null;
            }
        }
    }
    cancelPending() {
        if (this.debounceHandle !== null) {
            clearTimeout(this.debounceHandle);
            this.debounceHandle = null;
        }
        this.inflight?.abort();
        this.inflight = null;
        this.requestSeq++; // anything still resolving is stale now
    }
    // -- startup data ---------------------------------------------------------
    async loadVocab() {
        try {
            const vocab = await this.api.vocab();
            this.el.vocabList.replaceChildren(...vocab.tokens.map((tok) => {
                const opt = document.createElement("option");
                opt.value = tok;
                return opt;
            }));
        }
        catch {
            // autocomplete is a convenience; composing still works without it
        }
    }
    async loadHealth() {
        try {
            const health = await this.api.health();
            this.el.statusLine.textContent =
                `model ${health.model_digest.slice(0, 12)} · ${health.vocab_size} tactic ids`;
        }
        catch {
            this.el.statusLine.textContent = "service status unknown";
        }
    }
    // -- rendering ------------------------------------------------------------
    render() {
        this.renderTactics();
        this.renderSuggestions(this.state.lastResponse);
        this.el.undoBtn.disabled = !canUndo(this.state);
        this.el.clearBtn.disabled = this.state.tactics.length === 0;
    }
    renderTactics() {
        this.el.tacticList.replaceChildren(...this.state.tactics.map((tactic) => {
            const li = document.createElement("li");
            li.className = "tactic-chip";
            li.textContent = tactic;
            return li;
        }));
    }
    renderSuggestions(resp) {
        if (!resp) {
            this.el.suggestions.replaceChildren();
            this.el.warnings.replaceChildren();
            this.el.suggestionsHint.textContent =
                this.state.tactics.length === 0
                    ? "compose a few tactics, then ask for recommendations"
                    : "press Recommend (or wait: edits re-query automatically)";
            return;
        }
        this.el.suggestionsHint.textContent =
            resp.recommendations.length === 0 ? "no admissible recommendations" : "";
        // Render order is response order: the ranking is the server's.
        this.el.suggestions.replaceChildren(...resp.recommendations.map((item, idx) => {
            const li = document.createElement("li");
            const btn = document.createElement("button");
            btn.type = "button";
            btn.className = "suggestion";
            btn.dataset.index = String(idx);
            const label = document.createElement("span");
            label.className = "suggestion-tactics";
            label.textContent = item.tactics.join(" ; ");
            const score = document.createElement("span");
            score.className = "suggestion-score";
            score.textContent = `${(item.score * 100).toFixed(1)}%`;
            btn.append(label, score);
            btn.addEventListener("click", () => this.acceptSuggestion(idx));
            li.appendChild(btn);
            return li;
        }));
        this.el.warnings.replaceChildren(...resp.warnings.map((w) => {
            const li = document.createElement("li");
            li.textContent = w;
            return li;
        }));
    }
    showError(err) {
        const message = err instanceof ApiError
            ? `${err.code}: ${err.message}`
            : err instanceof Error
                ? err.message
                : String(err);
        this.el.errorBanner.textContent = message;
        this.el.errorBanner.hidden = false;
    }
    hideError() {
        this.el.errorBanner.hidden = true;
        this.el.errorBanner.textContent = "";
    }
}
