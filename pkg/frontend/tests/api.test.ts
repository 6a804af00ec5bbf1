/** FixtureClient contract: the client replays recorded responses so the whole
 * UI runs without a live model. */

import { describe, expect, it } from "vitest";

import { ApiError, FixtureClient } from "../src/api.js";
import type { Assessment } from "../src/types.js";
import { decodeEntry, findEntry, loadFixtureDoc } from "./fixtures.js";

const doc = loadFixtureDoc();
const client = new FixtureClient(doc);

describe("FixtureClient", () => {
  it("serves health with thresholds", async () => {
    const health = await client.health();
    expect(health.status).toBe("ok");
    expect(health.thresholds.mpap).toEqual([20.0, 35.0, 50.0]);
    expect(health.thresholds.pvr).toEqual([2.0, 5.0]);
    expect(health.thresholds.delta_pvr_percent).toEqual([-30.0, -5.0]);
  });

  it("replays assessments byte-equivalently with the recording", async () => {
    const caseId = doc.case_ids[0];
    const fromClient = await client.assess(caseId);
    const recorded = decodeEntry<Assessment>(findEntry(doc, "assess_case0"));
    expect(fromClient).toEqual(recorded);
  });

  it("lists the final recorded store state", async () => {
    const list = await client.listCases();
    expect(list.cases.length).toBeGreaterThanOrEqual(3);
    const assessed = list.cases.filter((c) => c.assessed);
    expect(assessed.length).toBeGreaterThanOrEqual(2);
  });

  it("replays recorded errors as ApiError", async () => {
    await expect(client.assess("no-such-case")).rejects.toSatisfy((err: unknown) => {
      return err instanceof ApiError && err.status === 404 && err.code === "unknown_case";
    });
  });

  it("serves explanations for video and doppler views", async () => {
    const video = await client.explanation(doc.case_ids[0], "A4C");
    expect(video.frames.length).toBeGreaterThan(1);
    const doppler = await client.explanation(doc.case_ids[0], "TR");
    expect(doppler.frames.length).toBe(1);
    expect(doppler.legend).toEqual({ min: 0.0, max: 1.0 });
  });
});
