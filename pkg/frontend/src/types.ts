/** Wire types for the assessment service (see ../docs/api.md). The UI never
 * derives clinical numbers: every rendered value comes from these payloads. */

export interface Thresholds {
  mpap: number[];
  pvr: number[];
  delta_pvr_percent: number[];
}

export interface Health {
  status: string;
  model_version: string;
  thresholds: Thresholds;
}

export interface Taxonomy {
  mpap_class: string;
  pvr_class: string;
  is_ph: boolean;
}

export interface CaseSummary {
  case_id: string;
  metadata: { sex: string; age: number; device: string; subtype: string };
  assessed: boolean;
  taxonomy: Taxonomy | null;
  mpap_hat: number | null;
  pvr_hat: number | null;
}

export interface CaseList {
  cases: CaseSummary[];
}

export interface Assessment {
  case_id: string;
  mpap_hat: number;
  pvr_hat: number;
  taxonomy: Taxonomy;
  baseline_mpap: number;
  baseline_pvr: number;
  baseline_pvr_nonphysical: boolean;
  prior_pvr: number | null;
  delta_pvr_percent: number | null;
  delta_pvr_category: string | null;
  recommendation: string;
  model_version: string;
  explanation_uri: string;
  thresholds: Thresholds;
  disclaimer: string;
}

export interface Explanation {
  case_id: string;
  view: string;
  layer: string;
  normalization_max: number;
  degenerate: boolean;
  legend: { min: number; max: number };
  frames: string[]; // base64 PNG
}

export interface ServiceError {
  code: string;
  message: string;
  diagnostic_id?: string;
}
