/** Browser bootstrap: wires the pure renderers to the service client.
 * `?fixtures=<url>` switches to fixture mode (recorded responses, no model).
 */

import { ApiError, FixtureClient, HttpClient, type Client, type FixtureDoc } from "./api.js";
import {
  renderAssessmentPanel,
  renderCaseList,
  renderErrorBanner,
  renderFollowupPanel,
  renderSaliencyViewer,
} from "./render.js";
import type { Assessment, Explanation } from "./types.js";

interface AppState {
  client: Client;
  selected: string | null;
  assessment: Assessment | null;
  explanation: Explanation | null;
  frameIndex: number;
  view: string;
}

const VIDEO_VIEWS = ["PLAX", "PSAX", "A4C", "PALA"];

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function makeClient(): Promise<Client> {
  const params = new URLSearchParams(window.location.search);
  const fixtureUrl = params.get("fixtures");
  if (fixtureUrl) {
    const doc = (await (await fetch(fixtureUrl)).json()) as FixtureDoc;
    return new FixtureClient(doc);
  }
  return new HttpClient(params.get("api") ?? "");
}

async function refreshCases(state: AppState): Promise<void> {
  try {
    const list = await state.client.listCases();
    el("case-browser").innerHTML = renderCaseList(list);
    el("error-slot").innerHTML = "";
    for (const row of document.querySelectorAll<HTMLElement>(".case-row")) {
      row.addEventListener("click", () => selectCase(state, row.dataset.caseId!));
    }
  } catch (err) {
    el("error-slot").innerHTML = renderErrorBanner(
      `Service unreachable: ${(err as Error).message}`,
    );
    el("error-slot")
      .querySelector("[data-action=retry]")
      ?.addEventListener("click", () => void refreshCases(state));
  }
}

async function selectCase(state: AppState, caseId: string): Promise<void> {
  state.selected = caseId;
  state.assessment = null;
  state.explanation = null;
  state.frameIndex = 0;
  el("assessment-panel").innerHTML =
    `<button id="run-assessment">Run assessment</button>`;
  el("followup-panel").innerHTML = "";
  el("saliency-panel").innerHTML = "";
  el("run-assessment").addEventListener("click", () => void runAssessment(state));
  await loadSaliency(state);
}

async function runAssessment(state: AppState): Promise<void> {
  if (!state.selected) return;
  try {
    const assessment = await state.client.assess(state.selected);
    state.assessment = assessment;
    // re-render in place: repeated runs replace, never append
    el("assessment-panel").innerHTML =
      `<button id="run-assessment">Re-run assessment</button>` +
      renderAssessmentPanel(assessment);
    el("followup-panel").innerHTML = renderFollowupPanel(assessment);
    el("run-assessment").addEventListener("click", () => void runAssessment(state));
    void refreshCases(state);
  } catch (err) {
    const detail = err instanceof ApiError && err.diagnosticId
      ? ` (diagnostic ${err.diagnosticId})`
      : "";
    el("assessment-panel").innerHTML = renderErrorBanner(
      `Assessment failed: ${(err as Error).message}${detail}`,
    );
  }
}

async function loadSaliency(state: AppState): Promise<void> {
  if (!state.selected) return;
  try {
    const explanation = await state.client.explanation(state.selected, state.view);
    state.explanation = explanation;
    state.frameIndex = 0;
    drawSaliency(state);
  } catch (err) {
    el("saliency-panel").innerHTML = renderErrorBanner(
      `Explanation unavailable: ${(err as Error).message}`,
    );
  }
}

function drawSaliency(state: AppState): void {
  if (!state.explanation) return;
  el("saliency-panel").innerHTML = renderSaliencyViewer(state.explanation, state.frameIndex);
  const total = state.explanation.frames.length;
  el("saliency-panel")
    .querySelector("[data-action=prev-frame]")
    ?.addEventListener("click", () => {
      state.frameIndex = (state.frameIndex - 1 + total) % total;
      drawSaliency(state);
    });
  el("saliency-panel")
    .querySelector("[data-action=next-frame]")
    ?.addEventListener("click", () => {
      state.frameIndex = (state.frameIndex + 1) % total;
      drawSaliency(state);
    });
}

export async function start(): Promise<void> {
  const state: AppState = {
    client: await makeClient(),
    selected: null,
    assessment: null,
    explanation: null,
    frameIndex: 0,
    view: VIDEO_VIEWS[2], // A4C default
  };
  const picker = el("view-picker") as HTMLSelectElement;
  picker.addEventListener("change", () => {
    state.view = picker.value;
    void loadSaliency(state);
  });
  try {
    const health = await state.client.health();
    el("service-status").textContent =
      `service ${health.status}, model ${health.model_version}`;
  } catch (err) {
    el("error-slot").innerHTML = renderErrorBanner(
      `Service unreachable: ${(err as Error).message}`,
    );
  }
  await refreshCases(state);
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  void start();
}
