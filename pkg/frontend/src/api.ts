/**
 * Thin client for the suggestion-gateway HTTP API.
 *
 * Every non-2xx response is surfaced as the gateway's error envelope, so
 * callers branch on `recoverable` instead of status codes.
 */

import type {
  ErrorEnvelopeDto,
  FeedbackSubmission,
  SuggestionResultDto,
  UsageEventKind,
} from './types.js';

export type SuggestionOutcome =
  | { ok: true; result: SuggestionResultDto }
  | { ok: false; envelope: ErrorEnvelopeDto };

const NETWORK_ENVELOPE: ErrorEnvelopeDto = {
  error_kind: 'provider_unavailable',
  message: 'The suggestion service could not be reached.',
  recoverable: true,
  retry_hint: null,
};

export class GatewayClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(baseUrl: string, fetchFn?: typeof fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, '');
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  async createSuggestion(
    taskId: string,
    inputs: Record<string, unknown>,
    clientId: string,
  ): Promise<SuggestionOutcome> {
    return this.exchange('/api/suggestions', {
      task_id: taskId,
      inputs,
      client_id: clientId,
    });
  }

  async regenerate(resultId: string): Promise<SuggestionOutcome> {
    return this.exchange(`/api/suggestions/${encodeURIComponent(resultId)}/regenerate`, {});
  }

  async submitFeedback(submission: FeedbackSubmission): Promise<boolean> {
    try {
      const response = await this.post('/api/feedback', submission);
      return response.ok;
    } catch {
      return false;
    }
  }

  async recordEvent(resultId: string, kind: UsageEventKind, itemIndex?: number): Promise<void> {
    const body: Record<string, unknown> = { result_id: resultId, kind };
    if (itemIndex !== undefined) {
      body.item_index = itemIndex;
    }
    try {
      await this.post('/api/events', body);
    } catch {
      // telemetry is best-effort; never disturb the UI over it
    }
  }

  private async exchange(path: string, body: unknown): Promise<SuggestionOutcome> {
    let response: Response;
    try {
      response = await this.post(path, body);
    } catch {
      return { ok: false, envelope: NETWORK_ENVELOPE };
    }
    let payload: unknown;
    try {
      payload = await response.json();
    } catch {
      return { ok: false, envelope: NETWORK_ENVELOPE };
    }
    if (response.ok) {
      return { ok: true, result: payload as SuggestionResultDto };
    }
    const envelope = payload as Partial<ErrorEnvelopeDto>;
    return {
      ok: false,
      envelope: {
        error_kind: envelope.error_kind ?? 'internal',
        message: envelope.message ?? 'Unexpected gateway error.',
        recoverable: envelope.recoverable ?? false,
        retry_hint: envelope.retry_hint ?? null,
      },
    };
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.fetchFn(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }
}
