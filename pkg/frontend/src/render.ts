/** Pure view renderers: service payloads in, HTML strings out. No clinical
 * computation happens here; thresholds, categories, and deltas are rendered
 * exactly as served. */

import type { Assessment, CaseList, CaseSummary, Explanation, Thresholds } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Trim trailing zeros off served numbers for labels: 20.0 -> "20". */
export function fmtBoundary(value: number): string {
  return Number.isInteger(value) ? String(value) : String(value);
}

export function fmtValue(value: number): string {
  return value.toFixed(1);
}

export function taxonomyBadges(taxonomy: { mpap_class: string; pvr_class: string; is_ph: boolean } | null): string {
  if (taxonomy === null) {
    return `<span class="badge badge-unassessed">unassessed</span>`;
  }
  const ph = taxonomy.is_ph ? "PH" : "non-PH";
  return (
    `<span class="badge badge-mpap">${escapeHtml(taxonomy.mpap_class)}</span>` +
    `<span class="badge badge-pvr">${escapeHtml(taxonomy.pvr_class)}</span>` +
    `<span class="badge badge-ph">${ph}</span>`
  );
}

export function renderCaseList(list: CaseList): string {
  if (list.cases.length === 0) {
    return `<div class="empty-state">No cases stored yet. Upload a case bundle to begin.</div>`;
  }
  const rows = list.cases
    .map((c: CaseSummary) => {
      const meta = `${c.metadata.sex}, ${c.metadata.age} y, ${escapeHtml(c.metadata.device)}`;
      return (
        `<tr class="case-row" data-case-id="${escapeHtml(c.case_id)}">` +
        `<td class="case-id">${escapeHtml(c.case_id)}</td>` +
        `<td class="case-meta">${meta}</td>` +
        `<td class="case-badges">${taxonomyBadges(c.taxonomy)}</td>` +
        `<td class="case-assessed">${c.assessed ? "assessed" : "—"}</td>` +
        `</tr>`
      );
    })
    .join("");
  return `<table class="case-table"><thead><tr><th>Case</th><th>Patient</th><th>Taxonomy</th><th>Status</th></tr></thead><tbody>${rows}</tbody></table>`;
}

/** Horizontal band gauge. Bands are built from the served boundaries only. */
export function renderGauge(
  label: string,
  unit: string,
  value: number,
  boundaries: number[],
  bandNames: string[],
  scaleMax: number,
): string {
  const stops = [0, ...boundaries, scaleMax];
  const bands = bandNames
    .map((name, i) => {
      const left = (stops[i] / scaleMax) * 100;
      const width = ((stops[i + 1] - stops[i]) / scaleMax) * 100;
      return `<div class="gauge-band band-${i}" data-band="${escapeHtml(name)}" style="left:${left.toFixed(2)}%;width:${width.toFixed(2)}%"></div>`;
    })
    .join("");
  const ticks = boundaries
    .map((b) => {
      const left = (b / scaleMax) * 100;
      return `<span class="gauge-tick" data-boundary="${fmtBoundary(b)}" style="left:${left.toFixed(2)}%">${fmtBoundary(b)}</span>`;
    })
    .join("");
  const needle = Math.max(0, Math.min(100, (value / scaleMax) * 100));
  return (
    `<div class="gauge" data-gauge="${escapeHtml(label)}">` +
    `<div class="gauge-label">${escapeHtml(label)}: <strong class="gauge-value">${fmtValue(value)}</strong> ${unit}</div>` +
    `<div class="gauge-track">${bands}<div class="gauge-needle" style="left:${needle.toFixed(2)}%"></div></div>` +
    `<div class="gauge-ticks">${ticks}</div>` +
    `</div>`
  );
}

const MPAP_BANDS = ["NonPHRange", "Mild", "Moderate", "Severe"];
const PVR_BANDS = ["Normal", "MildModerate", "Severe"];

export function renderAssessmentPanel(a: Assessment): string {
  const t: Thresholds = a.thresholds;
  const maxMpap = Math.max(80, a.mpap_hat * 1.2, a.baseline_mpap * 1.2);
  const maxPvr = Math.max(8, a.pvr_hat * 1.2, a.baseline_pvr * 1.2);
  const baselineNote = a.baseline_pvr_nonphysical
    ? ` <span class="nonphysical">(nonphysical)</span>`
    : "";
  return (
    `<section class="assessment" data-case-id="${escapeHtml(a.case_id)}">` +
    `<div class="badges">${taxonomyBadges(a.taxonomy)}</div>` +
    renderGauge("mPAP", "mmHg", a.mpap_hat, t.mpap, MPAP_BANDS, maxMpap) +
    renderGauge("PVR", "WU", a.pvr_hat, t.pvr, PVR_BANDS, maxPvr) +
    `<table class="compare-table"><thead><tr><th></th><th>Model</th><th>Formula baseline</th></tr></thead><tbody>` +
    `<tr><td>mPAP (mmHg)</td><td class="model-mpap">${fmtValue(a.mpap_hat)}</td><td class="baseline-mpap">${fmtValue(a.baseline_mpap)}</td></tr>` +
    `<tr><td>PVR (WU)</td><td class="model-pvr">${fmtValue(a.pvr_hat)}</td><td class="baseline-pvr">${fmtValue(a.baseline_pvr)}${baselineNote}</td></tr>` +
    `</tbody></table>` +
    `<div class="recommendation">${escapeHtml(a.recommendation)}</div>` +
    `<div class="disclaimer">${escapeHtml(a.disclaimer)}</div>` +
    `<div class="model-version">model ${escapeHtml(a.model_version)}</div>` +
    `</section>`
  );
}

export function renderSaliencyViewer(e: Explanation, frameIndex: number): string {
  if (e.degenerate) {
    return `<div class="saliency-empty">No salient signal for ${escapeHtml(e.view)} (degenerate activation).</div>`;
  }
  const idx = Math.max(0, Math.min(e.frames.length - 1, frameIndex));
  const legend =
    `<div class="saliency-legend">` +
    `<span class="legend-min">${fmtBoundary(e.legend.min)}</span>` +
    `<div class="legend-bar"></div>` +
    `<span class="legend-max">${fmtBoundary(e.legend.max)}</span>` +
    `</div>`;
  return (
    `<div class="saliency" data-view="${escapeHtml(e.view)}" data-frame="${idx}">` +
    `<img class="saliency-frame" alt="saliency overlay ${escapeHtml(e.view)} frame ${idx}" ` +
    `src="data:image/png;base64,${e.frames[idx]}"/>` +
    `<div class="saliency-controls">` +
    `<button data-action="prev-frame">prev</button>` +
    `<span class="frame-counter">${idx + 1} / ${e.frames.length}</span>` +
    `<button data-action="next-frame">next</button>` +
    `</div>` +
    legend +
    `<div class="saliency-layer">layer: ${escapeHtml(e.layer)}</div>` +
    `</div>`
  );
}

export function renderFollowupPanel(a: Assessment): string {
  const bands = a.thresholds.delta_pvr_percent;
  if (a.prior_pvr === null || a.delta_pvr_percent === null || a.delta_pvr_category === null) {
    return (
      `<div class="followup-missing">No pre-treatment PVR on record for this case. ` +
      `Enter the prior RHC PVR in the case bundle (record.json field "prior_pvr") and re-upload.</div>`
    );
  }
  // band strip over [-60%, +30%] with the served boundaries
  const lo = -60;
  const hi = 30;
  const span = hi - lo;
  const stops = [lo, ...bands, hi];
  const names = ["StrongResponse", "PartialResponse", "NoResponse"];
  const strip = names
    .map((name, i) => {
      const left = ((stops[i] - lo) / span) * 100;
      const width = ((stops[i + 1] - stops[i]) / span) * 100;
      return `<div class="delta-band" data-band="${name}" style="left:${left.toFixed(2)}%;width:${width.toFixed(2)}%"></div>`;
    })
    .join("");
  const ticks = bands
    .map((b) => {
      const left = ((b - lo) / span) * 100;
      return `<span class="delta-tick" data-boundary="${fmtBoundary(b)}%" style="left:${left.toFixed(2)}%">${fmtBoundary(b)}%</span>`;
    })
    .join("");
  const needle = Math.max(0, Math.min(100, ((a.delta_pvr_percent - lo) / span) * 100));
  return (
    `<section class="followup">` +
    `<table class="followup-table"><tbody>` +
    `<tr><td>Pre-treatment PVR</td><td class="prior-pvr">${fmtValue(a.prior_pvr)} WU</td></tr>` +
    `<tr><td>Predicted post PVR</td><td class="post-pvr">${fmtValue(a.pvr_hat)} WU</td></tr>` +
    `<tr><td>&Delta;PVR</td><td class="delta-percent">${a.delta_pvr_percent.toFixed(1)}%</td></tr>` +
    `</tbody></table>` +
    `<span class="badge badge-efficacy">${escapeHtml(a.delta_pvr_category)}</span>` +
    `<div class="delta-track">${strip}<div class="delta-needle" style="left:${needle.toFixed(2)}%"></div></div>` +
    `<div class="delta-ticks">${ticks}</div>` +
    `</section>`
  );
}

export function renderErrorBanner(message: string): string {
  return (
    `<div class="error-banner" role="alert">` +
    `<span>${escapeHtml(message)}</span>` +
    `<button data-action="retry">retry</button>` +
    `</div>`
  );
}
