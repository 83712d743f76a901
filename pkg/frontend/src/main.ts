/**
 * Page wiring: build the scenario form from the rubric, submit with
 * latest-wins cancellation, route 422s to the offending selector, offer a
 * retry banner on network failure, and drive the pinned what-if view.
 */

import {
  ApiFieldError,
  ApiNetworkError,
  fetchImportance,
  predict,
  type PredictionResponse,
} from "./api.js";
import {
  renderDiffView,
  renderErrorBanner,
  renderImportanceChart,
  renderResultPanel,
} from "./render.js";
import {
  diffParameters,
  emptyScenario,
  intervalOverlap,
  isComplete,
  responseDelta,
  toRequest,
  type PinnedScenario,
  type ScenarioState,
} from "./state.js";
import { DESIGNS, RUBRIC, type MetricKey } from "./rubric.js";

const state: ScenarioState = emptyScenario();
let pinned: PinnedScenario | null = null;
let inFlight: AbortController | null = null;

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function clearFieldErrors(): void {
  for (const node of document.querySelectorAll(".field-error")) {
    node.remove();
  }
}

function showFieldError(field: string, message: string): void {
  const anchor = document.querySelector(`[data-field="${field}"]`)
    ?? byId("scenario-form");
  const note = document.createElement("div");
  note.className = "field-error";
  note.textContent = message;
  anchor.append(note);
}

function updateSubmitGate(): void {
  (byId("submit") as HTMLButtonElement).disabled = !isComplete(state);
}

function buildForm(): void {
  const form = byId("scenario-form");

  const designGroup = document.createElement("fieldset");
  designGroup.dataset.field = "design";
  const designLegend = document.createElement("legend");
  designLegend.textContent = "Research design";
  designGroup.append(designLegend);
  for (const design of DESIGNS) {
    const label = document.createElement("label");
    label.className = "design-option";
    const input = document.createElement("input");
    input.type = "radio";
    input.name = "design";
    input.value = design.value;
    input.addEventListener("change", () => {
      state.design = design.value;
      updateSubmitGate();
    });
    label.append(input, document.createTextNode(` ${design.label}`));
    designGroup.append(label);
  }
  form.append(designGroup);

  for (const metric of RUBRIC) {
    const group = document.createElement("fieldset");
    group.dataset.field = metric.key;
    const legend = document.createElement("legend");
    legend.textContent = metric.title;
    group.append(legend);
    for (const option of metric.options) {
      const label = document.createElement("label");
      label.className = "rubric-option";
      const input = document.createElement("input");
      input.type = "radio";
      input.name = metric.key;
      input.value = String(option.score);
      input.addEventListener("change", () => {
        state.scores[metric.key as MetricKey] = option.score;
        updateSubmitGate();
      });
      label.append(input,
        document.createTextNode(` ${option.label} `));
      const score = document.createElement("span");
      score.className = "score-badge";
      score.textContent = String(option.score);
      label.append(score);
      group.append(label);
    }
    form.append(group);
  }

  const alphaRow = byId("alpha-row");
  const slider = byId("alpha") as HTMLInputElement;
  const alphaValue = byId("alpha-value");
  alphaValue.textContent = slider.value;
  slider.addEventListener("input", () => {
    state.alpha = Number(slider.value);
    alphaValue.textContent = slider.value;
  });
  alphaRow.dataset.field = "alpha";
}

async function submitScenario(): Promise<void> {
  clearFieldErrors();
  const banner = byId("banner");
  banner.replaceChildren();
  if (!isComplete(state)) return;

  inFlight?.abort();
  const controller = new AbortController();
  inFlight = controller;
  try {
    const response = await predict(toRequest(state), { signal: controller.signal });
    if (controller !== inFlight) return; // superseded by a newer submit
    state.lastResponse = response;
    byId("result").replaceChildren(renderResultPanel(response));
    renderComparison();
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ApiFieldError) {
      showFieldError(err.field, err.message);
      return;
    }
    const message = err instanceof ApiNetworkError
      ? "The prediction service is unreachable."
      : `Unexpected response from the service: ${String(err)}`;
    const node = renderErrorBanner(message, "Retry");
    node.querySelector("button")?.addEventListener("click", () => {
      void submitScenario();
    });
    banner.replaceChildren(node);
  } finally {
    if (controller === inFlight) inFlight = null;
  }
}

function pinCurrent(): void {
  if (!state.lastResponse || !isComplete(state)) return;
  const request = toRequest(state);
  pinned = {
    design: request.design,
    scores: request.scores,
    alpha: request.alpha,
    response: state.lastResponse,
  };
  renderComparison();
}

function renderComparison(): void {
  const host = byId("comparison");
  if (!pinned || !state.lastResponse || !isComplete(state)) {
    host.replaceChildren();
    return;
  }
  const request = toRequest(state);
  host.replaceChildren(renderDiffView(
    state.lastResponse,
    pinned.response,
    responseDelta(state.lastResponse, pinned.response),
    diffParameters(pinned, request),
    intervalOverlap(state.lastResponse.interval, pinned.response.interval),
  ));
}

async function loadImportance(): Promise<void> {
  try {
    const payload = await fetchImportance();
    byId("importance").replaceChildren(renderImportanceChart(payload));
  } catch {
    // the importance chart is contextual; the form works without it
  }
}

export function boot(): void {
  buildForm();
  updateSubmitGate();
  byId("submit").addEventListener("click", () => { void submitScenario(); });
  byId("pin").addEventListener("click", pinCurrent);
  void loadImportance();
}

if (typeof document !== "undefined" && document.getElementById("scenario-form")) {
  boot();
}
