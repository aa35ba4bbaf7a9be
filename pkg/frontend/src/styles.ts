/**
 * Scoped stylesheet, injected once. Everything hangs off `.sgw-root`, and
 * the single accent variable `--sgw-accent` is the supported theming hook:
 * hosts may re-tint the widget, but the suggestive styling itself (and the
 * disclaimer it marks) stays.
 */

const STYLE_ID = 'sgw-widget-styles';

export const WIDGET_CSS = `
.sgw-root {
  --sgw-accent: #1e6ddb;
  position: relative;
  display: inline-block;
  font-family: inherit;
  font-size: 0.95em;
}
.sgw-toggle {
  display: inline-flex;
  align-items: center;
  gap: 0.3em;
  border: 1px solid var(--sgw-accent);
  color: var(--sgw-accent);
  background: transparent;
  border-radius: 4px;
  padding: 0.2em 0.55em;
  cursor: pointer;
}
.sgw-toggle:hover { background: color-mix(in srgb, var(--sgw-accent) 12%, transparent); }
.sgw-panel {
  position: absolute;
  z-index: 1000;
  min-width: 260px;
  max-width: 380px;
  margin-top: 0.35em;
  border: 1px solid var(--sgw-accent);
  border-radius: 6px;
  background: #fff;
  box-shadow: 0 4px 14px rgba(0, 0, 0, 0.15);
  padding: 0.7em;
}
.sgw-panel-title { color: var(--sgw-accent); font-weight: 600; margin-bottom: 0.4em; }
.sgw-items { list-style: none; margin: 0; padding: 0; }
.sgw-items li { margin: 0.2em 0; }
.sgw-item-button {
  width: 100%;
  text-align: left;
  border: 1px solid #d5ddea;
  background: #f7f9fd;
  border-radius: 4px;
  padding: 0.3em 0.5em;
  cursor: pointer;
}
.sgw-item-button:hover { border-color: var(--sgw-accent); }
.sgw-feedback-text { margin: 0.2em 0 0.4em; white-space: pre-wrap; }
.sgw-meta { color: #5a6472; font-size: 0.85em; margin-top: 0.5em; }
.sgw-error { color: #8a5200; background: #fff6e6; border-radius: 4px; padding: 0.4em 0.5em; }
.sgw-actions { display: flex; gap: 0.5em; margin-top: 0.55em; flex-wrap: wrap; }
.sgw-actions button, .sgw-feedback-form button {
  border: 1px solid var(--sgw-accent);
  color: var(--sgw-accent);
  background: transparent;
  border-radius: 4px;
  padding: 0.2em 0.55em;
  cursor: pointer;
}
.sgw-link { border: none !important; text-decoration: underline; padding: 0.2em 0 !important; }
.sgw-feedback-form { margin-top: 0.55em; border-top: 1px solid #e3e8f0; padding-top: 0.55em; }
.sgw-feedback-form label { display: block; margin: 0.25em 0; }
.sgw-feedback-form textarea { width: 100%; min-height: 3em; margin-top: 0.3em; }
.sgw-validation { color: #b3261e; font-size: 0.85em; }
.sgw-loading { color: #5a6472; font-style: italic; }
`;

export function ensureStylesInjected(doc: Document): void {
  if (doc.getElementById(STYLE_ID)) {
    return;
  }
  const style = doc.createElement('style');
  style.id = STYLE_ID;
  style.textContent = WIDGET_CSS;
  doc.head.appendChild(style);
}
