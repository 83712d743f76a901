import { afterEach, describe, expect, it, vi } from "vitest";

import {
  ApiFieldError,
  ApiNetworkError,
  ApiSchemaError,
  fetchImportance,
  parsePredictionResponse,
  predict,
} from "../src/api.js";
import { METRIC_KEYS } from "../src/rubric.js";
import golden from "./fixtures/golden_phenomenology_all15.json";
import importanceFixture from "./fixtures/importance.json";

const request = {
  design: "phenomenology",
  scores: Object.fromEntries(METRIC_KEYS.map((k) => [k, 15])) as Record<
    (typeof METRIC_KEYS)[number], number>,
  alpha: 0.1,
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("predict", () => {
  it("parses a valid response and sends the request body", async () => {
    const fetchMock = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toBe("/api/v1/predict");
      expect(init?.method).toBe("POST");
      expect(JSON.parse(String(init?.body))).toEqual(request);
      return jsonResponse(golden);
    });
    vi.stubGlobal("fetch", fetchMock);
    const response = await predict(request);
    expect(response.recommended_n).toBe(golden.recommended_n);
    expect(response.ensemble_mean).toBeCloseTo(golden.ensemble_mean, 12);
    expect(response.model_version).toBe(golden.model_version);
    expect(fetchMock).toHaveBeenCalledTimes(1);
  });

  it("maps a 422 to a field-level error", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => jsonResponse(
      { error: { field: "information_power", message: "score 99 not allowed" } },
      422,
    )));
    const err = await predict(request).catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiFieldError);
    expect((err as ApiFieldError).field).toBe("information_power");
  });

  it("wraps transport failures as network errors", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => {
      throw new TypeError("fetch failed");
    }));
    await expect(predict(request)).rejects.toBeInstanceOf(ApiNetworkError);
  });

  it("rejects malformed response shapes", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => jsonResponse({
      ...golden,
      recommended_n: "twelve",
    })));
    await expect(predict(request)).rejects.toBeInstanceOf(ApiSchemaError);
  });

  it("propagates aborts for latest-wins cancellation", async () => {
    const controller = new AbortController();
    vi.stubGlobal("fetch", vi.fn(async (_: unknown, init?: RequestInit) => {
      expect(init?.signal).toBe(controller.signal);
      throw new DOMException("aborted", "AbortError");
    }));
    controller.abort();
    await expect(predict(request, { signal: controller.signal }))
      .rejects.toHaveProperty("name", "AbortError");
  });

  it("respects a base-URL override", async () => {
    (globalThis as { QSAT_API_BASE?: string }).QSAT_API_BASE = "http://api.example:9999/";
    try {
      const fetchMock = vi.fn(async (url: RequestInfo | URL) => {
        expect(String(url)).toBe("http://api.example:9999/api/v1/predict");
        return jsonResponse(golden);
      });
      vi.stubGlobal("fetch", fetchMock);
      await predict(request);
    } finally {
      delete (globalThis as { QSAT_API_BASE?: string }).QSAT_API_BASE;
    }
  });
});

describe("parsePredictionResponse", () => {
  it("accepts the golden fixture verbatim", () => {
    const parsed = parsePredictionResponse(golden);
    expect(parsed.interval.lower).toBe(golden.interval.lower);
    expect(parsed.interval.upper).toBe(golden.interval.upper);
  });

  it("rejects non-finite model predictions", () => {
    const broken = JSON.parse(JSON.stringify(golden)) as Record<string, unknown>;
    (broken.per_model as Record<string, unknown>).knn = "NaN";
    expect(() => parsePredictionResponse(broken)).toThrow(ApiSchemaError);
  });
});

describe("fetchImportance", () => {
  it("parses both importance maps", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => jsonResponse(importanceFixture)));
    const payload = await fetchImportance();
    expect(Object.keys(payload.impurity).length).toBeGreaterThan(0);
    expect(Object.keys(payload.permutation).length).toBeGreaterThan(0);
  });

  it("maps failures to network errors", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => new Response("oops", { status: 500 })));
    await expect(fetchImportance()).rejects.toBeInstanceOf(ApiNetworkError);
  });
});
