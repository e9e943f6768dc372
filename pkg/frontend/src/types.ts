/** Payload shapes of the promptlens REST API. */

export interface BenchmarkInfo {
  readonly benchmark_id: string;
  readonly n_records: number;
  readonly seed: number;
  readonly config_hash: string;
}

export interface BenchmarkRecord {
  readonly id: string;
  readonly example: string;
  readonly ambiguity_type: string;
  readonly template_id: string;
  readonly bindings: Record<string, string>;
  readonly complexity: string;
  readonly is_combination: boolean;
  readonly visual_setups: ReadonlyArray<string>;
  readonly cs_labels: ReadonlyArray<string>;
  readonly questions: ReadonlyArray<string>;
}

export interface RecordPage {
  readonly total: number;
  readonly offset: number;
  readonly records: ReadonlyArray<BenchmarkRecord>;
}

export interface Clarification {
  readonly items: ReadonlyArray<string>;
  readonly source: string;
  readonly raw_continuation: string | null;
}

export interface Resolution {
  readonly kind: 'pending' | 'answered' | 'selected' | 'skipped';
  readonly signal: string | null;
  readonly index: number | null;
}

export interface SessionState {
  readonly session_id: string;
  readonly record: BenchmarkRecord;
  readonly intention_index: number;
  readonly mode: string;
  readonly clarification: Clarification;
  readonly resolution: Resolution;
  readonly disambiguated_prompt: string | null;
  readonly paraphrased_prompt: string | null;
}

export type ResolveAction =
  | { action: 'answer'; text: string }
  | { action: 'select'; index: number }
  | { action: 'skip' };

export interface ExperimentHandle {
  readonly experiment_id: string;
  readonly status: string;
}

export interface ExperimentRow {
  readonly session_id: string;
  readonly prompt_id: string;
  readonly ambiguity_type: string;
  readonly condition: string;
  readonly prompt_text: string;
  readonly question: string;
  readonly answers: ReadonlyArray<string>;
  readonly yes_count: number;
  readonly rate: number;
  readonly image_hashes: ReadonlyArray<string>;
}

export interface ConditionAggregate {
  readonly mean_per_image: number;
  readonly mean_per_prompt: number;
  readonly n_items: number;
}

export interface ExperimentReport {
  readonly rows: ReadonlyArray<ExperimentRow>;
  readonly config_hash: string;
  readonly per_condition: Record<string, ConditionAggregate>;
  readonly per_condition_type: Record<string, ConditionAggregate>;
}

export interface RequestLogEntry {
  readonly method: string;
  readonly path: string;
  readonly status: number;
}

export interface ApiError {
  readonly code: string;
  readonly message: string;
}
