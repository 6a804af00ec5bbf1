/** Loads the recorded service fixtures for the UI tests. */

import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import type { FixtureDoc, FixtureEntry } from "../src/api.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const FIXTURES_PATH = path.resolve(here, "../../fixtures/service/fixtures.json");

export function loadFixtureDoc(): FixtureDoc {
  return JSON.parse(fs.readFileSync(FIXTURES_PATH, "utf-8")) as FixtureDoc;
}

export function decodeEntry<T>(entry: FixtureEntry): T {
  return JSON.parse(Buffer.from(entry.body_b64, "base64").toString("utf-8")) as T;
}

export function findEntry(doc: FixtureDoc, name: string): FixtureEntry {
  const entry = doc.requests.find((r) => (r as FixtureEntry & { name?: string }).name === name);
  if (!entry) throw new Error(`fixture ${name} not recorded`);
  return entry;
}
