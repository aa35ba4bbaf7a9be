export { GatewayClient } from './api.js';
export type { SuggestionOutcome } from './api.js';
export { PREF_KEY, memoryStorage, setSuggestionsEnabled, suggestionsEnabled } from './prefs.js';
export { WIDGET_CSS, ensureStylesInjected } from './styles.js';
export { mountSmartSuggestions } from './widget.js';
export type { SmartSuggestionsHandle } from './widget.js';
export type {
  ErrorEnvelopeDto,
  ErrorKind,
  FeedbackLevel,
  FeedbackSubmission,
  HostBinding,
  PreferenceStorage,
  SmartSuggestionsConfig,
  SuggestionItemDto,
  SuggestionResultDto,
  TaskCategory,
  TaskMeta,
  TriState,
  UsageEventKind,
} from './types.js';
