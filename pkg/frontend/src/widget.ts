/**
 * Smart-suggestions widget: an activation toggle plus a tooltip panel that
 * fetches, displays, applies, regenerates, and rates gateway suggestions.
 *
 * Design constraints baked in:
 * - nothing is fetched until the user opens the tooltip, and at most one
 *   request is in flight per binding;
 * - the host form keeps working if the widget is disabled, errored, or
 *   absent: failures render as an inline note with a retry button, never
 *   as a blocking error;
 * - the user-level preference hides every toggle and persists.
 */

import { GatewayClient } from './api.js';
import { memoryStorage, setSuggestionsEnabled, suggestionsEnabled } from './prefs.js';
import { ensureStylesInjected } from './styles.js';
import type {
  ErrorEnvelopeDto,
  FeedbackLevel,
  PreferenceStorage,
  SmartSuggestionsConfig,
  SuggestionResultDto,
  TriState,
} from './types.js';

export interface SmartSuggestionsHandle {
  unmount(): void;
  isOpen(): boolean;
  setEnabled(enabled: boolean): void;
}

const MAX_FREE_TEXT = 2000;

/** Mounted controllers, so a preference flip can hide every toggle at once. */
const mounted = new Set<Controller>();

export function mountSmartSuggestions(
  container: HTMLElement,
  config: SmartSuggestionsConfig,
): SmartSuggestionsHandle {
  const controller = new Controller(container, config);
  mounted.add(controller);
  controller.render();
  return {
    unmount: () => {
      mounted.delete(controller);
      controller.destroy();
    },
    isOpen: () => controller.open,
    setEnabled: (enabled: boolean) => controller.setEnabled(enabled),
  };
}

class Controller {
  readonly storage: PreferenceStorage;
  private readonly client: GatewayClient;
  private readonly root: HTMLElement;
  private panel: HTMLElement | null = null;

  open = false;
  private pending = false;
  private result: SuggestionResultDto | null = null;
  private appliedSinceOpen = false;

  constructor(
    private readonly container: HTMLElement,
    private readonly config: SmartSuggestionsConfig,
  ) {
    this.storage = config.storage ?? memoryStorage;
    this.client = new GatewayClient(config.baseUrl, config.fetchFn);
    ensureStylesInjected(container.ownerDocument);
    this.root = container.ownerDocument.createElement('span');
    this.root.className = 'sgw-root';
    if (config.accentColor) {
      this.root.style.setProperty('--sgw-accent', config.accentColor);
    }
    container.appendChild(this.root);
  }

  destroy(): void {
    this.root.remove();
  }

  setEnabled(enabled: boolean): void {
    setSuggestionsEnabled(this.storage, enabled);
    for (const instance of mounted) {
      if (instance.storage === this.storage) {
        instance.render();
      }
    }
  }

  render(): void {
    this.root.replaceChildren();
    this.panel = null;
    this.open = false;
    if (!suggestionsEnabled(this.storage)) {
      return; // deactivated: no toggle anywhere
    }
    const toggle = this.el('button', 'sgw-toggle');
    toggle.type = 'button';
    toggle.setAttribute('aria-expanded', 'false');
    toggle.append(this.bulbIcon(), ' Smart suggestions');
    toggle.addEventListener('click', () => this.onToggle(toggle));
    this.root.appendChild(toggle);
  }

  private onToggle(toggle: HTMLButtonElement): void {
    if (this.open) {
      this.closePanel(toggle);
      return;
    }
    this.open = true;
    toggle.setAttribute('aria-expanded', 'true');
    this.panel = this.el('div', 'sgw-panel');
    this.root.appendChild(this.panel);
    if (this.result) {
      this.renderResult(this.result);
    } else {
      void this.request('create');
    }
  }

  private closePanel(toggle: HTMLButtonElement): void {
    if (this.result && !this.appliedSinceOpen) {
      void this.client.recordEvent(this.result.result_id, 'dismissed');
    }
    this.panel?.remove();
    this.panel = null;
    this.open = false;
    toggle.setAttribute('aria-expanded', 'false');
  }

  /** One request in flight per binding; extra triggers are no-ops. */
  private async request(mode: 'create' | 'regenerate'): Promise<void> {
    if (this.pending) {
      return;
    }
    this.pending = true;
    this.renderLoading();
    const { binding } = this.config;
    const outcome =
      mode === 'regenerate' && this.result
        ? await this.client.regenerate(this.result.result_id)
        : await this.client.createSuggestion(
            binding.taskId,
            binding.getContext(),
            binding.clientId,
          );
    this.pending = false;
    if (outcome.ok) {
      this.result = outcome.result;
      this.appliedSinceOpen = false;
      this.renderResult(outcome.result);
    } else {
      this.renderError(outcome.envelope);
    }
  }

  private renderLoading(): void {
    if (!this.panel) {
      return;
    }
    this.panel.replaceChildren(this.title(), this.el('div', 'sgw-loading', 'Thinking…'));
  }

  private renderResult(result: SuggestionResultDto): void {
    if (!this.panel) {
      return;
    }
    this.panel.replaceChildren(this.title());

    if (result.category === 'closed_recommendation' && result.items) {
      const list = this.el('ul', 'sgw-items');
      for (const item of result.items) {
        const li = this.el('li');
        const button = this.el('button', 'sgw-item-button', item.label);
        button.type = 'button';
        button.addEventListener('click', () => {
          this.appliedSinceOpen = true;
          this.config.binding.onApply(item.label);
          void this.client.recordEvent(result.result_id, 'accepted', item.rank);
        });
        li.appendChild(button);
        list.appendChild(li);
      }
      this.panel.appendChild(list);
    } else {
      this.panel.appendChild(this.el('p', 'sgw-feedback-text', result.feedback_text ?? ''));
    }

    this.panel.appendChild(
      this.el(
        'div',
        'sgw-meta',
        `Generated by ${result.model_name}. These suggestions might be wrong or misleading.`,
      ),
    );

    const actions = this.el('div', 'sgw-actions');
    const regenerate = this.el('button', 'sgw-regenerate', 'Regenerate');
    regenerate.type = 'button';
    regenerate.addEventListener('click', () => void this.request('regenerate'));
    actions.appendChild(regenerate);

    const feedback = this.el('button', 'sgw-link sgw-feedback-toggle', 'Give feedback');
    feedback.type = 'button';
    feedback.addEventListener('click', () => this.toggleFeedbackForm(result.result_id));
    actions.appendChild(feedback);

    const disable = this.el('button', 'sgw-link sgw-disable', 'Turn off suggestions');
    disable.type = 'button';
    disable.addEventListener('click', () => this.setEnabled(false));
    actions.appendChild(disable);

    this.panel.appendChild(actions);
  }

  private renderError(envelope: ErrorEnvelopeDto): void {
    if (!this.panel) {
      return;
    }
    this.panel.replaceChildren(this.title());
    this.panel.appendChild(this.el('div', 'sgw-error', envelope.message));
    const actions = this.el('div', 'sgw-actions');
    if (envelope.recoverable) {
      const retry = this.el('button', 'sgw-retry', 'Try again');
      retry.type = 'button';
      retry.addEventListener('click', () => void this.request('regenerate'));
      actions.appendChild(retry);
    }
    this.panel.appendChild(actions);
  }

  private toggleFeedbackForm(resultId: string): void {
    if (!this.panel) {
      return;
    }
    const existing = this.panel.querySelector('.sgw-feedback-form');
    if (existing) {
      existing.remove();
      return;
    }
    this.panel.appendChild(this.buildFeedbackForm(resultId));
  }

  private buildFeedbackForm(resultId: string): HTMLElement {
    const doc = this.root.ownerDocument;
    const form = this.el('div', 'sgw-feedback-form');

    const ratingLabel = this.el('label', 'sgw-rating-label', 'How was this suggestion?');
    form.appendChild(ratingLabel);
    const levels: FeedbackLevel[] = ['positive', 'neutral', 'negative'];
    for (const level of levels) {
      const label = this.el('label', `sgw-level sgw-level-${level}`);
      const radio = doc.createElement('input');
      radio.type = 'radio';
      radio.name = 'sgw-level';
      radio.value = level;
      label.append(radio, ` ${level}`);
      form.appendChild(label);
    }

    const details: Array<[string, string]> = [
      ['helpful', 'Helpful?'],
      ['correct', 'Correct?'],
      ['confusing', 'Confusing?'],
    ];
    for (const [name, caption] of details) {
      const label = this.el('label', `sgw-detail sgw-detail-${name}`);
      const select = doc.createElement('select');
      select.name = `sgw-${name}`;
      for (const option of ['unset', 'yes', 'no']) {
        const node = doc.createElement('option');
        node.value = option;
        node.textContent = option === 'unset' ? '—' : option;
        select.appendChild(node);
      }
      label.append(`${caption} `, select);
      form.appendChild(label);
    }

    const textarea = doc.createElement('textarea');
    textarea.className = 'sgw-free-text';
    textarea.placeholder = 'Anything else? (optional)';
    form.appendChild(textarea);

    const validation = this.el('div', 'sgw-validation');
    form.appendChild(validation);

    const submit = this.el('button', 'sgw-feedback-submit', 'Send feedback');
    submit.type = 'button';
    submit.addEventListener('click', () => {
      void this.submitFeedback(form, resultId, submit, validation, textarea);
    });
    form.appendChild(submit);
    return form;
  }

  private async submitFeedback(
    form: HTMLElement,
    resultId: string,
    submit: HTMLButtonElement,
    validation: HTMLElement,
    textarea: HTMLTextAreaElement,
  ): Promise<void> {
    const checked = form.querySelector<HTMLInputElement>('input[name="sgw-level"]:checked');
    if (!checked) {
      validation.textContent = 'Pick a rating first.';
      return;
    }
    if (textarea.value.length > MAX_FREE_TEXT) {
      validation.textContent = `Free text is limited to ${MAX_FREE_TEXT} characters.`;
      return;
    }
    validation.textContent = '';
    submit.disabled = true; // exactly one POST per submission
    const pick = (name: string): TriState =>
      (form.querySelector<HTMLSelectElement>(`select[name="sgw-${name}"]`)?.value ?? 'unset') as TriState;
    const ok = await this.client.submitFeedback({
      result_id: resultId,
      level: checked.value as FeedbackLevel,
      helpful: pick('helpful'),
      correct: pick('correct'),
      confusing: pick('confusing'),
      free_text: textarea.value || undefined,
    });
    submit.disabled = false;
    if (ok) {
      validation.textContent = 'Thanks for the feedback.';
    } else {
      validation.textContent = 'Could not send feedback — try again.';
      submit.textContent = 'Retry';
    }
  }

  private title(): HTMLElement {
    return this.el('div', 'sgw-panel-title', 'Smart Suggestions');
  }

  private bulbIcon(): HTMLElement {
    const icon = this.el('span', 'sgw-bulb', '💡');
    icon.setAttribute('aria-hidden', 'true');
    return icon;
  }

  private el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className = '',
    text = '',
  ): HTMLElementTagNameMap[K] {
    const node = this.root.ownerDocument.createElement(tag);
    if (className) {
      node.className = className;
    }
    if (text) {
      node.textContent = text;
    }
    return node;
  }
}
