import { Interval } from "./types.js";
import { isoForServer, parseServerTime } from "./api.js";

export const DEFAULT_MAX_POINTS = 2000;

/** Everything that defines what the user is looking at. The history stack
 * holds prior intervals so zooming out restores them exactly. */
export interface ViewState {
  dataset: string;
  variable: string;
  interval: Interval;
  coverage: Interval;
  maxPoints: number;
  history: Interval[];
}

export function clampToCoverage(interval: Interval, coverage: Interval): Interval {
  let t0 = Math.max(interval.t0, coverage.t0);
  let t1 = Math.min(interval.t1, coverage.t1);
  if (t0 >= t1) {
    // degenerate request; fall back to the full coverage
    return { ...coverage };
  }
  return { t0, t1 };
}

export function zoomIn(state: ViewState, box: Interval): ViewState {
  const interval = clampToCoverage(box, state.coverage);
  return {
    ...state,
    interval,
    history: [...state.history, state.interval],
  };
}

/** Pop the history stack; with nothing stacked, return to full coverage. */
export function zoomOut(state: ViewState): ViewState {
  if (state.history.length === 0) {
    return { ...state, interval: { ...state.coverage } };
  }
  const history = state.history.slice(0, -1);
  return { ...state, interval: state.history[state.history.length - 1], history };
}

/** Shift the window by a fraction of its width, clamped so it never leaves
 * coverage (the width is preserved at the edges). */
export function pan(state: ViewState, fraction: number): ViewState {
  const width = state.interval.t1 - state.interval.t0;
  let shift = fraction * width;
  shift = Math.min(shift, state.coverage.t1 - state.interval.t1);
  shift = Math.max(shift, state.coverage.t0 - state.interval.t0);
  if (shift === 0) {
    return state;
  }
  return {
    ...state,
    interval: { t0: state.interval.t0 + shift, t1: state.interval.t1 + shift },
    history: [...state.history, state.interval],
  };
}

export function withMaxPoints(state: ViewState, maxPoints: number): ViewState {
  return { ...state, maxPoints: Math.max(1, Math.round(maxPoints)) };
}

/** Serialize the view to a URL fragment so any reachable view is linkable. */
export function toFragment(state: ViewState): string {
  const params = new URLSearchParams({
    dataset: state.dataset,
    variable: state.variable,
    t0: isoForServer(state.interval.t0),
    t1: isoForServer(state.interval.t1),
    n: String(state.maxPoints),
  });
  return params.toString();
}

export interface FragmentState {
  dataset: string;
  variable: string;
  interval: Interval | null;
  maxPoints: number;
}

export function fromFragment(fragment: string): FragmentState | null {
  const params = new URLSearchParams(fragment.replace(/^#/, ""));
  const dataset = params.get("dataset");
  const variable = params.get("variable");
  if (!dataset || !variable) return null;
  let interval: Interval | null = null;
  const t0 = params.get("t0");
  const t1 = params.get("t1");
  if (t0 && t1) {
    const a = parseServerTime(t0);
    const b = parseServerTime(t1);
    if (Number.isFinite(a) && Number.isFinite(b) && a < b) {
      interval = { t0: a, t1: b };
    }
  }
  const n = Number(params.get("n"));
  return {
    dataset,
    variable,
    interval,
    maxPoints: Number.isFinite(n) && n >= 1 ? Math.round(n) : DEFAULT_MAX_POINTS,
  };
}
