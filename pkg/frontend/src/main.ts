import { fetchInfoText } from "./api.js";
import { BrowseController, RenderUpdate } from "./controller.js";
import { TimeSeriesPlot } from "./plot.js";
import { CatalogDataset } from "./types.js";
import { fromFragment, toFragment } from "./view.js";

const base = ""; // same origin; the server allows cross-origin GET too

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

const datasetPicker = el<HTMLSelectElement>("dataset");
const variablePicker = el<HTMLSelectElement>("variable");
const maxPointsInput = el<HTMLInputElement>("maxpoints");
const statusLine = el<HTMLDivElement>("status");
const banner = el<HTMLDivElement>("banner");
const infoPane = el<HTMLPreElement>("info");
const canvas = el<HTMLCanvasElement>("plot");

function showBanner(text: string | null): void {
  banner.textContent = text ?? "";
  banner.style.display = text ? "block" : "none";
}

function describeCadence(ms: number): string {
  if (!Number.isFinite(ms)) return "-";
  if (ms >= 86_400_000) return `${(ms / 86_400_000).toFixed(1)} d`;
  if (ms >= 3_600_000) return `${(ms / 3_600_000).toFixed(1)} h`;
  if (ms >= 60_000) return `${(ms / 60_000).toFixed(1)} min`;
  return `${(ms / 1000).toFixed(3)} s`;
}

function effectiveStrideText(datasetName: string, cadenceMs: number): string {
  // PointsPerDay gives the native cadence, turning the returned spacing into
  // the server-side stride estimate
  const ppd = Number(controller.dataset(datasetName)?.pointsPerDay);
  if (!Number.isFinite(ppd) || ppd <= 0 || !Number.isFinite(cadenceMs)) return "";
  const stride = Math.max(1, Math.round(cadenceMs / (86_400_000 / ppd)));
  return `, stride ~${stride}`;
}

const controller = new BrowseController(base, {
  onRender(update: RenderUpdate) {
    showBanner(null);
    plot.draw(update.points, update.state.interval,
              `${update.state.dataset} : ${update.state.variable}`);
    statusLine.textContent =
      `${update.points.length} points, effective cadence ${describeCadence(update.effectiveCadenceMs)}` +
      effectiveStrideText(update.state.dataset, update.effectiveCadenceMs) +
      ` (budget ${update.state.maxPoints})`;
    window.location.hash = toFragment(update.state);
  },
  onError(name, message) {
    showBanner(`${name}: ${message || "request failed"} — retry by navigating again`);
  },
});

const plot = new TimeSeriesPlot(canvas, (box) => {
  void controller.zoomIn(box);
});

el<HTMLButtonElement>("zoomout").addEventListener("click", () => void controller.zoomOut());
el<HTMLButtonElement>("panleft").addEventListener("click", () => void controller.pan(-0.5));
el<HTMLButtonElement>("panright").addEventListener("click", () => void controller.pan(0.5));
maxPointsInput.addEventListener("change", () => {
  void controller.setMaxPoints(Number(maxPointsInput.value) || 2000);
});

function fillVariablePicker(dataset: CatalogDataset): void {
  variablePicker.innerHTML = "";
  for (const v of dataset.variables) {
    const option = document.createElement("option");
    option.value = v.name;
    option.textContent = v.units ? `${v.name} [${v.units}]` : v.name;
    variablePicker.appendChild(option);
  }
}

async function selectByName(name: string, variable?: string): Promise<void> {
  const dataset = controller.dataset(name);
  if (!dataset) return;
  fillVariablePicker(dataset);
  if (variable) variablePicker.value = variable;
  infoPane.textContent = "";
  fetchInfoText(base, dataset.name)
    .then((text) => { infoPane.textContent = text; })
    .catch(() => { infoPane.textContent = "(info unavailable)"; });
  await controller.select(dataset, variable ?? dataset.variables[0]?.name);
  maxPointsInput.value = String(controller.state?.maxPoints ?? 2000);
}

datasetPicker.addEventListener("change", () => void selectByName(datasetPicker.value));
variablePicker.addEventListener("change", () => {
  const dataset = controller.dataset(datasetPicker.value);
  if (dataset) void controller.select(dataset, variablePicker.value);
});

async function start(): Promise<void> {
  let catalog: CatalogDataset[];
  try {
    catalog = await controller.loadCatalog();
  } catch {
    showBanner("catalog unavailable — is the server running? retrying in 5 s");
    setTimeout(() => void start(), 5000);
    return;
  }
  datasetPicker.innerHTML = "";
  for (const d of catalog) {
    const option = document.createElement("option");
    option.value = d.name;
    option.textContent = d.title ? `${d.name} — ${d.title}` : d.name;
    datasetPicker.appendChild(option);
  }
  const wanted = fromFragment(window.location.hash);
  if (wanted && controller.dataset(wanted.dataset)) {
    datasetPicker.value = wanted.dataset;
    const dataset = controller.dataset(wanted.dataset)!;
    fillVariablePicker(dataset);
    variablePicker.value = wanted.variable;
    void controller.select(dataset, wanted.variable, wanted.interval, wanted.maxPoints);
    maxPointsInput.value = String(wanted.maxPoints);
    fetchInfoText(base, dataset.name)
      .then((text) => { infoPane.textContent = text; })
      .catch(() => undefined);
  } else if (catalog.length > 0) {
    datasetPicker.value = catalog[0].name;
    void selectByName(catalog[0].name);
  } else {
    showBanner("the catalog is empty");
  }
}

void start();
