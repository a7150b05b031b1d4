import { CatalogDataset, SeriesPoint } from "./types.js";

/** Minimal slice of fetch that the client needs; injectable for tests. */
export type FetchLike = (
  url: string,
  init?: { signal?: AbortSignal },
) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}>;

/** Server-reported failure, carrying the machine-readable error name. */
export class ServerError extends Error {
  constructor(
    public readonly errorName: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
  }
}

/** Render epoch ms as the server's timestamp grammar (UTC, no zone suffix). */
export function isoForServer(ms: number): string {
  const iso = new Date(ms).toISOString().slice(0, -1); // drop the Z
  return iso.replace(/\.(\d*?)0+$/, (_, keep: string) => (keep ? `.${keep}` : ""));
}

/** Parse a server timestamp (UTC, optional fraction) to epoch ms. */
export function parseServerTime(s: string): number {
  const trimmed = s.replace(/(\.\d{3})\d+$/, "$1"); // Date handles ms at most
  return Date.parse(trimmed + "Z");
}

/** The one query shape the browser ever issues: a variable over a window,
 * thinned server-side to at most maxPoints samples. */
export function windowQuery(variable: string, interval: { t0: number; t1: number },
                            maxPoints: number): string {
  return `${variable}&time>=${isoForServer(interval.t0)}` +
    `&time<${isoForServer(interval.t1)}&thin(${maxPoints})`;
}

export function windowUrl(base: string, dataset: string, variable: string,
                          interval: { t0: number; t1: number }, maxPoints: number): string {
  return `${base}/tsds/${dataset}.json?${windowQuery(variable, interval, maxPoints)}`;
}

async function raiseServerError(response: {
  status: number; text(): Promise<string>;
}): Promise<never> {
  let name = `HTTP ${response.status}`;
  let message = "";
  try {
    const body = JSON.parse(await response.text()) as { error?: string; message?: string };
    if (body.error) name = body.error;
    message = body.message ?? "";
  } catch {
    // non-JSON body; keep the status line
  }
  throw new ServerError(name, message, response.status);
}

export async function fetchCatalog(base: string, fetchImpl: FetchLike = fetch,
                                   signal?: AbortSignal): Promise<CatalogDataset[]> {
  const response = await fetchImpl(`${base}/tsds/catalog.json`, { signal });
  if (!response.ok) await raiseServerError(response);
  const doc = (await response.json()) as { datasets: CatalogDataset[] };
  return doc.datasets;
}

export async function fetchInfoText(base: string, dataset: string,
                                    fetchImpl: FetchLike = fetch): Promise<string> {
  const response = await fetchImpl(`${base}/tsds/${dataset}.info`);
  if (!response.ok) await raiseServerError(response);
  return response.text();
}

export interface WindowResult {
  points: SeriesPoint[];
  columns: string[];
}

/** Fetch one thinned window of a variable as plot-ready points. */
export async function fetchWindow(base: string, dataset: string, variable: string,
                                  interval: { t0: number; t1: number }, maxPoints: number,
                                  fetchImpl: FetchLike = fetch,
                                  signal?: AbortSignal): Promise<WindowResult> {
  const response = await fetchImpl(
    windowUrl(base, dataset, variable, interval, maxPoints), { signal });
  if (!response.ok) await raiseServerError(response);
  const doc = (await response.json()) as {
    metadata: { columns: string[] };
    data: [string, ...(number | null)[]][];
  };
  const points = doc.data.map((row) => ({
    time: parseServerTime(row[0]),
    value: row[1] ?? null,
  }));
  return { points, columns: doc.metadata.columns };
}
