import {
  FetchLike,
  ServerError,
  fetchCatalog,
  fetchWindow,
  parseServerTime,
} from "./api.js";
import { CatalogDataset, Interval, SeriesPoint } from "./types.js";
import {
  DEFAULT_MAX_POINTS,
  ViewState,
  clampToCoverage,
  pan,
  withMaxPoints,
  zoomIn,
  zoomOut,
} from "./view.js";

export interface RenderUpdate {
  state: ViewState;
  points: SeriesPoint[];
  /** median spacing of the returned samples, ms (Infinity for < 2 points) */
  effectiveCadenceMs: number;
}

export interface ControllerEvents {
  onRender?: (update: RenderUpdate) => void;
  onError?: (name: string, message: string) => void;
  onStateChange?: (state: ViewState) => void;
}

function datasetCoverage(dataset: CatalogDataset): Interval {
  const first = dataset.coverage.first ?? dataset.startDate;
  const last = dataset.coverage.last ?? dataset.stopDate;
  let t0 = parseServerTime(first);
  let t1 = parseServerTime(last);
  if (!(t1 > t0)) t1 = t0 + 24 * 3600 * 1000;
  return { t0, t1 };
}

export function effectiveCadenceMs(points: SeriesPoint[]): number {
  if (points.length < 2) return Infinity;
  const gaps = [];
  for (let i = 1; i < points.length; i++) {
    gaps.push(points[i].time - points[i - 1].time);
  }
  gaps.sort((a, b) => a - b);
  return gaps[Math.floor(gaps.length / 2)];
}

/** Drives the browse flow: one in-flight window fetch at a time, superseded
 * fetches aborted, every navigation issuing exactly one thinned request. */
export class BrowseController {
  state: ViewState | null = null;
  catalog: CatalogDataset[] = [];
  requestCount = 0;

  private inflight: AbortController | null = null;
  private renderSeq = 0;

  constructor(
    private readonly base: string,
    private readonly events: ControllerEvents = {},
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  async loadCatalog(): Promise<CatalogDataset[]> {
    try {
      this.catalog = await fetchCatalog(this.base, this.fetchImpl);
    } catch (err) {
      this.reportError(err);
      throw err;
    }
    return this.catalog;
  }

  dataset(name: string): CatalogDataset | undefined {
    return this.catalog.find((d) => d.name === name);
  }

  /** Switch dataset/variable; the initial view spans the full coverage. */
  async select(dataset: CatalogDataset, variable?: string,
               interval?: Interval | null, maxPoints?: number): Promise<void> {
    const coverage = datasetCoverage(dataset);
    const chosen = variable ?? dataset.variables[0]?.name;
    if (!chosen) {
      this.events.onError?.("NoVariables", `dataset ${dataset.name} has no variables`);
      return;
    }
    this.state = {
      dataset: dataset.name,
      variable: chosen,
      interval: interval ? clampToCoverage(interval, coverage) : { ...coverage },
      coverage,
      maxPoints: maxPoints ?? DEFAULT_MAX_POINTS,
      history: [],
    };
    await this.refresh();
  }

  async zoomIn(box: Interval): Promise<void> {
    if (!this.state) return;
    this.state = zoomIn(this.state, box);
    await this.refresh();
  }

  async zoomOut(): Promise<void> {
    if (!this.state) return;
    this.state = zoomOut(this.state);
    await this.refresh();
  }

  async pan(fraction: number): Promise<void> {
    if (!this.state) return;
    const next = pan(this.state, fraction);
    if (next === this.state) return; // pinned at a coverage edge
    this.state = next;
    await this.refresh();
  }

  async setMaxPoints(maxPoints: number): Promise<void> {
    if (!this.state) return;
    this.state = withMaxPoints(this.state, maxPoints);
    await this.refresh();
  }

  /** Issue the single thinned request for the current view. */
  private async refresh(): Promise<void> {
    const state = this.state!;
    this.events.onStateChange?.(state);
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    const seq = ++this.renderSeq;
    this.requestCount++;
    try {
      const result = await fetchWindow(
        this.base, state.dataset, state.variable, state.interval,
        state.maxPoints, this.fetchImpl, controller.signal);
      if (seq !== this.renderSeq) return; // superseded while awaiting
      this.events.onRender?.({
        state,
        points: result.points,
        effectiveCadenceMs: effectiveCadenceMs(result.points),
      });
    } catch (err) {
      if (controller.signal.aborted || seq !== this.renderSeq) return;
      this.reportError(err);
    }
  }

  private reportError(err: unknown): void {
    if (err instanceof ServerError) {
      this.events.onError?.(err.errorName, err.message);
    } else {
      this.events.onError?.("NetworkError", String(err));
    }
  }
}
