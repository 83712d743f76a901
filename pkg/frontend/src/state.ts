/**
 * Scenario state: the form selections, the last response, and the pinned
 * comparison scenario, plus the pure diff/overlap arithmetic the what-if
 * view renders.
 */

import type { PredictionRequest, PredictionResponse } from "./api.js";
import { METRIC_KEYS, type MetricKey } from "./rubric.js";

export interface ScenarioState {
  design: string | null;
  scores: Partial<Record<MetricKey, number>>;
  alpha: number;
  lastResponse: PredictionResponse | null;
}

export interface PinnedScenario {
  design: string;
  scores: Record<MetricKey, number>;
  alpha: number;
  response: PredictionResponse;
}

export function emptyScenario(): ScenarioState {
  return { design: null, scores: {}, alpha: 0.1, lastResponse: null };
}

/** Submit stays disabled until the design and all ten scores are chosen. */
export function isComplete(state: ScenarioState): boolean {
  return state.design !== null
    && METRIC_KEYS.every((key) => typeof state.scores[key] === "number");
}

export function toRequest(state: ScenarioState): PredictionRequest {
  if (!isComplete(state)) {
    throw new Error("scenario is incomplete");
  }
  const scores = {} as Record<MetricKey, number>;
  for (const key of METRIC_KEYS) {
    scores[key] = state.scores[key] as number;
  }
  return { design: state.design as string, scores, alpha: state.alpha };
}

export interface ParameterDiff {
  key: string;
  from: string | number;
  to: string | number;
}

/** Per-parameter differences between the pinned scenario and the current one. */
export function diffParameters(
  pinned: { design: string; scores: Record<MetricKey, number>; alpha: number },
  current: { design: string; scores: Record<MetricKey, number>; alpha: number },
): ParameterDiff[] {
  const diffs: ParameterDiff[] = [];
  if (pinned.design !== current.design) {
    diffs.push({ key: "design", from: pinned.design, to: current.design });
  }
  for (const key of METRIC_KEYS) {
    if (pinned.scores[key] !== current.scores[key]) {
      diffs.push({ key, from: pinned.scores[key], to: current.scores[key] });
    }
  }
  if (pinned.alpha !== current.alpha) {
    diffs.push({ key: "alpha", from: pinned.alpha, to: current.alpha });
  }
  return diffs;
}

export interface ResponseDelta {
  recommended_n: number;
  ensemble_mean: number;
  per_model: Record<string, number>;
}

/** current minus pinned, field by field; no numbers invented client-side. */
export function responseDelta(
  current: PredictionResponse,
  pinned: PredictionResponse,
): ResponseDelta {
  const perModel: Record<string, number> = {};
  for (const kind of Object.keys(current.per_model)) {
    const pinnedValue = pinned.per_model[kind];
    if (typeof pinnedValue === "number") {
      perModel[kind] = current.per_model[kind]! - pinnedValue;
    }
  }
  return {
    recommended_n: current.recommended_n - pinned.recommended_n,
    ensemble_mean: current.ensemble_mean - pinned.ensemble_mean,
    per_model: perModel,
  };
}

export interface IntervalOverlap {
  lower: number;
  upper: number | null;
  empty: boolean;
}

/** Intersection of two conformal intervals (upper null = unbounded). */
export function intervalOverlap(
  a: { lower: number; upper: number | null },
  b: { lower: number; upper: number | null },
): IntervalOverlap {
  const lower = Math.max(a.lower, b.lower);
  const uppers = [a.upper, b.upper].filter((u): u is number => u !== null);
  const upper = uppers.length === 2 ? Math.min(uppers[0]!, uppers[1]!)
    : uppers.length === 1 ? uppers[0]! : null;
  const empty = upper !== null && lower > upper;
  return { lower, upper, empty };
}
