/**
 * DOM rendering. Pure functions of their inputs: the same response produces
 * byte-identical markup. Every rendered figure carries a `data-source`
 * attribute naming the response field it came from, so traceability is
 * machine-checkable (the client never invents numbers).
 */

import type { ImportancePayload, PredictionResponse } from "./api.js";
import type { IntervalOverlap, ParameterDiff, ResponseDelta } from "./state.js";
import { METRIC_TITLES } from "./rubric.js";

export function fmtParticipants(value: number): string {
  return value.toFixed(1);
}

export function fmtDelta(value: number): string {
  const text = value.toFixed(1);
  return value > 0 ? `+${text}` : text;
}

export function fmtIntDelta(value: number): string {
  return value > 0 ? `+${value}` : String(value);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function sourced(node: HTMLElement, source: string): HTMLElement {
  node.dataset.source = source;
  return node;
}

export function renderResultPanel(response: PredictionResponse): HTMLElement {
  const panel = el("section", "result-panel");

  const headline = el("div", "headline");
  headline.append(el("span", "headline-label", "Recommended sample size"));
  headline.append(sourced(el("span", "headline-value",
    String(response.recommended_n)), "recommended_n"));
  panel.append(headline);

  const ensemble = el("div", "ensemble-line");
  ensemble.append(el("span", undefined, "Nine-model ensemble mean: "));
  ensemble.append(sourced(el("span", "ensemble-value",
    fmtParticipants(response.ensemble_mean)), "ensemble_mean"));
  panel.append(ensemble);

  panel.append(renderIntervalBand(response));
  panel.append(renderPerModelBars(response));

  const version = el("div", "model-version");
  version.append(el("span", undefined, "Model version: "));
  version.append(sourced(el("code", undefined, response.model_version),
    "model_version"));
  panel.append(version);
  return panel;
}

export function renderIntervalBand(response: PredictionResponse): HTMLElement {
  const { lower, upper, alpha } = response.interval;
  const wrap = el("div", "interval-band");
  const label = el("div", "interval-label");
  label.append(el("span", undefined,
    `Interval at ${Math.round((1 - alpha) * 100)}% coverage: `));
  label.append(sourced(el("span", "interval-lower", String(lower)),
    "interval.lower"));
  label.append(el("span", undefined, " to "));
  label.append(sourced(
    el("span", "interval-upper", upper === null ? "unbounded" : String(upper)),
    "interval.upper"));
  label.append(el("span", undefined, " participants"));
  wrap.append(label);

  const track = el("div", "interval-track");
  const fill = el("div", "interval-fill");
  if (upper !== null) {
    const span = Math.max(upper, response.recommended_n, 1);
    fill.style.left = `${(lower / span) * 100}%`;
    fill.style.width = `${((upper - lower) / span) * 100}%`;
  } else {
    fill.style.left = "0%";
    fill.style.width = "100%";
    fill.classList.add("unbounded");
  }
  track.append(fill);
  wrap.append(track);
  return wrap;
}

export function renderPerModelBars(response: PredictionResponse): HTMLElement {
  const wrap = el("div", "model-bars");
  wrap.append(el("h3", undefined, "Per-model estimates"));
  const kinds = Object.keys(response.per_model).sort();
  const max = Math.max(...kinds.map((k) => response.per_model[k]!));
  for (const kind of kinds) {
    const value = response.per_model[kind]!;
    const row = el("div", "model-bar-row");
    row.append(el("span", "model-name", kind));
    const bar = el("div", "model-bar");
    bar.style.width = `${max > 0 ? (value / max) * 100 : 0}%`;
    row.append(bar);
    row.append(sourced(el("span", "model-value", fmtParticipants(value)),
      `per_model.${kind}`));
    wrap.append(row);
  }
  return wrap;
}

export function renderImportanceChart(payload: ImportancePayload): HTMLElement {
  const wrap = el("div", "importance-chart");
  wrap.append(el("h3", undefined, "What drives the recommendation"));
  const entries = Object.entries(payload.impurity)
    .sort((a, b) => b[1] - a[1]);
  const max = entries.length ? entries[0]![1] : 0;
  for (const [feature, value] of entries) {
    const row = el("div", "importance-row");
    row.append(el("span", "importance-name",
      METRIC_TITLES[feature] ?? feature.replace(/_/g, " ")));
    const bar = el("div", "importance-bar");
    bar.style.width = `${max > 0 ? (value / max) * 100 : 0}%`;
    row.append(bar);
    row.append(sourced(el("span", "importance-value", value.toFixed(3)),
      `importances.impurity.${feature}`));
    wrap.append(row);
  }
  return wrap;
}

export function renderErrorBanner(message: string, retryLabel: string): HTMLElement {
  const banner = el("div", "error-banner");
  banner.append(el("span", undefined, message));
  const button = el("button", "retry-button", retryLabel);
  button.type = "button";
  banner.append(button);
  return banner;
}

export function renderDiffView(
  currentResponse: PredictionResponse,
  pinnedResponse: PredictionResponse,
  delta: ResponseDelta,
  parameterDiffs: ParameterDiff[],
  overlap: IntervalOverlap,
): HTMLElement {
  const wrap = el("section", "diff-view");
  wrap.append(el("h3", undefined, "What-if comparison"));

  const table = el("div", "diff-table");
  const header = el("div", "diff-row diff-header");
  for (const text of ["", "Pinned", "Current", "Delta"]) {
    header.append(el("span", undefined, text));
  }
  table.append(header);

  const nRow = el("div", "diff-row");
  nRow.append(el("span", undefined, "Recommended n"));
  nRow.append(sourced(el("span", undefined,
    String(pinnedResponse.recommended_n)), "pinned.recommended_n"));
  nRow.append(sourced(el("span", undefined,
    String(currentResponse.recommended_n)), "current.recommended_n"));
  nRow.append(sourced(el("span", "diff-delta",
    fmtIntDelta(delta.recommended_n)), "delta.recommended_n"));
  table.append(nRow);

  const meanRow = el("div", "diff-row");
  meanRow.append(el("span", undefined, "Ensemble mean"));
  meanRow.append(sourced(el("span", undefined,
    fmtParticipants(pinnedResponse.ensemble_mean)), "pinned.ensemble_mean"));
  meanRow.append(sourced(el("span", undefined,
    fmtParticipants(currentResponse.ensemble_mean)), "current.ensemble_mean"));
  meanRow.append(sourced(el("span", "diff-delta",
    fmtDelta(delta.ensemble_mean)), "delta.ensemble_mean"));
  table.append(meanRow);
  wrap.append(table);

  const overlapLine = el("div", "interval-overlap");
  if (overlap.empty) {
    overlapLine.textContent = "The two intervals do not overlap.";
  } else {
    overlapLine.append(el("span", undefined, "Interval overlap: "));
    overlapLine.append(sourced(el("span", undefined, String(overlap.lower)),
      "overlap.lower"));
    overlapLine.append(el("span", undefined, " to "));
    overlapLine.append(sourced(el("span", undefined,
      overlap.upper === null ? "unbounded" : String(overlap.upper)),
      "overlap.upper"));
  }
  wrap.append(overlapLine);

  const diffList = el("ul", "parameter-diffs");
  if (parameterDiffs.length === 0) {
    diffList.append(el("li", "no-diff", "Scenarios are identical."));
  }
  for (const diff of parameterDiffs) {
    const item = el("li", "parameter-diff");
    item.dataset.key = diff.key;
    item.textContent =
      `${METRIC_TITLES[diff.key] ?? diff.key}: ${diff.from} → ${diff.to}`;
    diffList.append(item);
  }
  wrap.append(diffList);
  return wrap;
}
