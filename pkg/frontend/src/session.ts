/** Pure proof-session state: the tactic sequence being composed, the
 * request knobs, the last response, and a snapshot history for exact undo.
 *
 * Every mutation returns a fresh state; appends push the complete prior
 * state onto `history`, so undo is literally "return the last snapshot".
 */

import type { RecommendResponse } from "./api.js";

export const MIN_N = 1;
export const MAX_N = 50;
export const DEFAULT_N = 7;

export interface SessionState {
  readonly tactics: readonly string[];
  readonly n: number;
  readonly k: 1 | 2;
  readonly lastResponse: RecommendResponse | null;
  readonly history: readonly SessionState[];
}

export function initialSession(): SessionState {
  return { tactics: [], n: DEFAULT_N, k: 1, lastResponse: null, history: [] };
}

/** Append one tactic; the prior state becomes an undo snapshot and any
 * previous response is dropped as stale.  Empty input is rejected. */
export function sessionAppend(state: SessionState, tactic: string): SessionState {
  return sessionAppendAll(state, [tactic]);
}

/** Append several tactics in order as ONE undoable step (a clicked k=2
 * suggestion appends both of its tactics). */
export function sessionAppendAll(
  state: SessionState,
  tactics: readonly string[],
): SessionState {
  const trimmed = tactics.map((t) => t.trim());
  if (trimmed.length === 0 || trimmed.some((t) => t.length === 0)) {
    throw new Error("tactic must be non-empty");
  }
  return {
    ...state,
    tactics: [...state.tactics, ...trimmed],
    lastResponse: null,
    history: [...state.history, state],
  };
}

export function canUndo(state: SessionState): boolean {
  return state.history.length > 0;
}

/** Restore the exact state before the most recent append (no-op at the
 * initial state). */
export function sessionUndo(state: SessionState): SessionState {
  if (state.history.length === 0) return state;
  return state.history[state.history.length - 1];
}

/** Drop the composed sequence (undoable, like an append). */
export function sessionClear(state: SessionState): SessionState {
  if (state.tactics.length === 0) return state;
  return { ...state, tactics: [], lastResponse: null, history: [...state.history, state] };
}

export function setN(state: SessionState, n: number): SessionState {
  if (!Number.isInteger(n) || n < MIN_N || n > MAX_N) {
    throw new Error(`n must be an integer in [${MIN_N}, ${MAX_N}]`);
  }
  return { ...state, n };
}

export function setK(state: SessionState, k: number): SessionState {
  if (k !== 1 && k !== 2) throw new Error("k must be 1 or 2");
  return { ...state, k };
}

/** Attach a fresh response (not an undo step: the snapshot history tracks
 * the composed sequence, not server traffic). */
export function withResponse(
  state: SessionState,
  response: RecommendResponse,
): SessionState {
  return { ...state, lastResponse: response };
}
