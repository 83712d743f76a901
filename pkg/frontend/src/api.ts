/**
 * Typed client for the prediction service. Every response is validated
 * before it reaches rendering code; shape violations fail loudly instead of
 * leaking NaN into the UI.
 */

import type { MetricKey } from "./rubric.js";

export interface PredictionRequest {
  design: string;
  scores: Record<MetricKey, number>;
  alpha: number;
}

export interface PredictionInterval {
  lower: number;
  upper: number | null; // null = unbounded (calibration too small for alpha)
  alpha: number;
}

export interface PredictionResponse {
  per_model: Record<string, number>;
  ensemble_mean: number;
  recommended_n: number;
  interval: PredictionInterval;
  importances: Record<string, number>;
  model_version: string;
}

export interface ImportancePayload {
  impurity: Record<string, number>;
  permutation: Record<string, number>;
}

/** 422 from the service: a named request field is invalid. */
export class ApiFieldError extends Error {
  readonly field: string;

  constructor(field: string, message: string) {
    super(message);
    this.field = field;
  }
}

/** Transport-level failure; the UI offers a retry. */
export class ApiNetworkError extends Error {}

/** The server answered with something the client does not understand. */
export class ApiSchemaError extends Error {}

function resolveBaseUrl(): string {
  const override = (globalThis as { QSAT_API_BASE?: unknown }).QSAT_API_BASE;
  return typeof override === "string" ? override.replace(/\/$/, "") : "";
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function asNumberMap(v: unknown, where: string): Record<string, number> {
  if (typeof v !== "object" || v === null || Array.isArray(v)) {
    throw new ApiSchemaError(`${where} must be an object of numbers`);
  }
  for (const [key, value] of Object.entries(v)) {
    if (!isFiniteNumber(value)) {
      throw new ApiSchemaError(`${where}.${key} is not a finite number`);
    }
  }
  return v as Record<string, number>;
}

export function parsePredictionResponse(doc: unknown): PredictionResponse {
  if (typeof doc !== "object" || doc === null) {
    throw new ApiSchemaError("response is not an object");
  }
  const d = doc as Record<string, unknown>;
  const perModel = asNumberMap(d.per_model, "per_model");
  if (!isFiniteNumber(d.ensemble_mean)) {
    throw new ApiSchemaError("ensemble_mean is not a finite number");
  }
  if (!Number.isInteger(d.recommended_n) || (d.recommended_n as number) < 1) {
    throw new ApiSchemaError("recommended_n must be an integer >= 1");
  }
  const rawInterval = d.interval as Record<string, unknown> | undefined;
  if (!rawInterval || !isFiniteNumber(rawInterval.lower)
      || !(rawInterval.upper === null || isFiniteNumber(rawInterval.upper))
      || !isFiniteNumber(rawInterval.alpha)) {
    throw new ApiSchemaError("interval is malformed");
  }
  if (typeof d.model_version !== "string" || d.model_version.length === 0) {
    throw new ApiSchemaError("model_version missing");
  }
  return {
    per_model: perModel,
    ensemble_mean: d.ensemble_mean,
    recommended_n: d.recommended_n as number,
    interval: {
      lower: rawInterval.lower,
      upper: rawInterval.upper as number | null,
      alpha: rawInterval.alpha,
    },
    importances: asNumberMap(d.importances, "importances"),
    model_version: d.model_version,
  };
}

export function parseImportancePayload(doc: unknown): ImportancePayload {
  if (typeof doc !== "object" || doc === null) {
    throw new ApiSchemaError("importance payload is not an object");
  }
  const d = doc as Record<string, unknown>;
  return {
    impurity: asNumberMap(d.impurity, "impurity"),
    permutation: asNumberMap(d.permutation, "permutation"),
  };
}

async function readJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    throw new ApiSchemaError(`invalid JSON in ${response.status} response`);
  }
}

export async function predict(
  request: PredictionRequest,
  options: { signal?: AbortSignal } = {},
): Promise<PredictionResponse> {
  let response: Response;
  try {
    response = await fetch(`${resolveBaseUrl()}/api/v1/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
      signal: options.signal ?? null,
    });
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") {
      throw err;
    }
    throw new ApiNetworkError(`prediction request failed: ${String(err)}`);
  }
  if (response.status === 422) {
    const doc = (await readJson(response)) as {
      error?: { field?: unknown; message?: unknown };
    };
    throw new ApiFieldError(
      String(doc.error?.field ?? "request"),
      String(doc.error?.message ?? "invalid request"),
    );
  }
  if (!response.ok) {
    throw new ApiNetworkError(`unexpected status ${response.status}`);
  }
  return parsePredictionResponse(await readJson(response));
}

export async function fetchImportance(
  options: { signal?: AbortSignal } = {},
): Promise<ImportancePayload> {
  let response: Response;
  try {
    response = await fetch(`${resolveBaseUrl()}/api/v1/importance`, {
      signal: options.signal ?? null,
    });
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") {
      throw err;
    }
    throw new ApiNetworkError(`importance request failed: ${String(err)}`);
  }
  if (!response.ok) {
    throw new ApiNetworkError(`unexpected status ${response.status}`);
  }
  return parseImportancePayload(await readJson(response));
}
