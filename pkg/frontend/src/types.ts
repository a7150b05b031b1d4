export interface CatalogVariable {
  name: string;
  longName: string;
  units: string;
  components: number;
  componentLabels: string[] | null;
}

export interface CatalogDataset {
  name: string;
  title: string;
  dataType: string;
  startDate: string;
  stopDate: string;
  timeUnits: string;
  samples: number;
  pointsPerDay: string | null;
  md5: string | null;
  coverage: { first: string | null; last: string | null };
  variables: CatalogVariable[];
}

/** One plotted sample: epoch milliseconds plus value (null = gap). */
export interface SeriesPoint {
  time: number;
  value: number | null;
}

/** Half-open time window [t0, t1) in epoch milliseconds. */
export interface Interval {
  t0: number;
  t1: number;
}
