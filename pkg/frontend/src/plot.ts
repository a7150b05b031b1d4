import { Interval, SeriesPoint } from "./types.js";

const MARGIN = { left: 64, right: 16, top: 12, bottom: 28 };
const MIN_BOX_PX = 6;

/** Canvas line plot with rubber-band zoom selection along the time axis.
 * Null values break the line so server-side gaps render as gaps. */
export class TimeSeriesPlot {
  private ctx: CanvasRenderingContext2D;
  private points: SeriesPoint[] = [];
  private interval: Interval = { t0: 0, t1: 1 };
  private label = "";
  private dragStartX: number | null = null;
  private dragCurrentX: number | null = null;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    private readonly onBox: (box: Interval) => void,
  ) {
    this.ctx = canvas.getContext("2d")!;
    canvas.addEventListener("mousedown", (e) => {
      this.dragStartX = this.eventX(e);
      this.dragCurrentX = this.dragStartX;
    });
    canvas.addEventListener("mousemove", (e) => {
      if (this.dragStartX === null) return;
      this.dragCurrentX = this.eventX(e);
      this.redraw();
    });
    const finish = (e: MouseEvent) => {
      if (this.dragStartX === null) return;
      const a = this.dragStartX;
      const b = this.eventX(e);
      this.dragStartX = this.dragCurrentX = null;
      this.redraw();
      if (Math.abs(b - a) >= MIN_BOX_PX) {
        this.onBox({
          t0: this.xToTime(Math.min(a, b)),
          t1: this.xToTime(Math.max(a, b)),
        });
      }
    };
    canvas.addEventListener("mouseup", finish);
    canvas.addEventListener("mouseleave", (e) => {
      if (this.dragStartX !== null) finish(e);
    });
  }

  draw(points: SeriesPoint[], interval: Interval, label: string): void {
    this.points = points;
    this.interval = interval;
    this.label = label;
    this.redraw();
  }

  private eventX(e: MouseEvent): number {
    const rect = this.canvas.getBoundingClientRect();
    return ((e.clientX - rect.left) / rect.width) * this.canvas.width;
  }

  private plotWidth(): number {
    return this.canvas.width - MARGIN.left - MARGIN.right;
  }

  private plotHeight(): number {
    return this.canvas.height - MARGIN.top - MARGIN.bottom;
  }

  private timeToX(t: number): number {
    const { t0, t1 } = this.interval;
    return MARGIN.left + ((t - t0) / (t1 - t0)) * this.plotWidth();
  }

  private xToTime(x: number): number {
    const { t0, t1 } = this.interval;
    return t0 + ((x - MARGIN.left) / this.plotWidth()) * (t1 - t0);
  }

  private valueRange(): { lo: number; hi: number } {
    let lo = Infinity;
    let hi = -Infinity;
    for (const p of this.points) {
      if (p.value === null || !Number.isFinite(p.value)) continue;
      lo = Math.min(lo, p.value);
      hi = Math.max(hi, p.value);
    }
    if (lo > hi) return { lo: -1, hi: 1 };
    if (lo === hi) return { lo: lo - 1, hi: hi + 1 };
    const pad = (hi - lo) * 0.05;
    return { lo: lo - pad, hi: hi + pad };
  }

  private redraw(): void {
    const { ctx, canvas } = this;
    const { lo, hi } = this.valueRange();
    const h = this.plotHeight();
    const yFor = (v: number) => MARGIN.top + (1 - (v - lo) / (hi - lo)) * h;

    ctx.fillStyle = "#ffffff";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.strokeStyle = "#cccccc";
    ctx.strokeRect(MARGIN.left, MARGIN.top, this.plotWidth(), h);

    ctx.fillStyle = "#555555";
    ctx.font = "11px sans-serif";
    // y ticks
    for (let i = 0; i <= 4; i++) {
      const v = lo + ((hi - lo) * i) / 4;
      const y = yFor(v);
      ctx.fillText(v.toPrecision(4), 6, y + 3);
      ctx.strokeStyle = "#eeeeee";
      ctx.beginPath();
      ctx.moveTo(MARGIN.left, y);
      ctx.lineTo(canvas.width - MARGIN.right, y);
      ctx.stroke();
    }
    // x ticks
    for (let i = 0; i <= 5; i++) {
      const t = this.interval.t0 + ((this.interval.t1 - this.interval.t0) * i) / 5;
      const x = this.timeToX(t);
      const stamp = new Date(t).toISOString().slice(0, 19).replace("T", " ");
      ctx.fillStyle = "#555555";
      ctx.fillText(stamp.slice(5), x - 34, canvas.height - 10);
    }

    ctx.strokeStyle = "#1f77b4";
    ctx.lineWidth = 1.25;
    ctx.beginPath();
    let penDown = false;
    for (const p of this.points) {
      if (p.value === null || !Number.isFinite(p.value)) {
        penDown = false; // gap
        continue;
      }
      const x = this.timeToX(p.time);
      const y = yFor(p.value);
      if (penDown) {
        ctx.lineTo(x, y);
      } else {
        ctx.moveTo(x, y);
        penDown = true;
      }
    }
    ctx.stroke();
    if (this.points.length === 1) {
      const p = this.points[0];
      if (p.value !== null) {
        ctx.fillStyle = "#1f77b4";
        ctx.fillRect(this.timeToX(p.time) - 2, yFor(p.value) - 2, 4, 4);
      }
    }

    ctx.fillStyle = "#333333";
    ctx.font = "12px sans-serif";
    ctx.fillText(this.label, MARGIN.left + 8, MARGIN.top + 14);

    if (this.dragStartX !== null && this.dragCurrentX !== null) {
      const a = Math.min(this.dragStartX, this.dragCurrentX);
      const b = Math.max(this.dragStartX, this.dragCurrentX);
      ctx.fillStyle = "rgba(31, 119, 180, 0.15)";
      ctx.fillRect(a, MARGIN.top, b - a, h);
      ctx.strokeStyle = "rgba(31, 119, 180, 0.6)";
      ctx.strokeRect(a, MARGIN.top, b - a, h);
    }
  }
}
