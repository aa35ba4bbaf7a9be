/**
 * Shared types: the gateway wire formats and the host integration contract.
 */

export type TaskCategory = 'closed_recommendation' | 'open_feedback';

export interface TaskMeta {
  task_id: string;
  title: string;
  category: TaskCategory;
  input_fields: Array<{ name: string; required: boolean; kind: string; max_chars: number }>;
  max_suggestions: number | null;
  model_name: string;
  disclaimer: string;
}

export interface SuggestionItemDto {
  label: string;
  rank: number;
}

export interface SuggestionResultDto {
  result_id: string;
  task_id: string;
  category: TaskCategory;
  items: SuggestionItemDto[] | null;
  feedback_text: string | null;
  model_name: string;
  prompt_hash: string;
  created_at: string;
  latency_ms: number;
  attempt: number;
  notes: string[];
}

export type ErrorKind =
  | 'validation_failed'
  | 'unknown_task'
  | 'provider_unavailable'
  | 'malformed_response'
  | 'rate_limited'
  | 'internal';

export interface ErrorEnvelopeDto {
  error_kind: ErrorKind;
  message: string;
  recoverable: boolean;
  retry_hint: number | null;
}

export type FeedbackLevel = 'positive' | 'neutral' | 'negative';
export type TriState = 'yes' | 'no' | 'unset';

export interface FeedbackSubmission {
  result_id: string;
  level: FeedbackLevel;
  helpful?: TriState;
  correct?: TriState;
  confusing?: TriState;
  free_text?: string;
}

export type UsageEventKind = 'shown' | 'accepted' | 'regenerated' | 'dismissed' | 'error';

/**
 * How the widget talks to its host field. `getContext` supplies the task
 * inputs when the user opens the tooltip; `onApply` hands a chosen (or
 * edited) suggestion back to the host, which keeps the field editable
 * afterwards. The widget never touches the host form in any other way.
 */
export interface HostBinding {
  taskId: string;
  clientId: string;
  getContext: () => Record<string, unknown>;
  onApply: (value: string) => void;
}

/** Minimal persistence the host supplies; localStorage satisfies it. */
export interface PreferenceStorage {
  get(key: string): string | null;
  set(key: string, value: string): void;
}

export interface SmartSuggestionsConfig {
  binding: HostBinding;
  /** Gateway base URL, e.g. "https://host/api" is wrong: pass the origin, "/api" is appended. */
  baseUrl: string;
  storage?: PreferenceStorage;
  /** Injectable for tests; defaults to the global fetch. */
  fetchFn?: typeof fetch;
  /** Host may re-tint the widget; the disclaimer is not removable. */
  accentColor?: string;
}
