/**
 * User-level preference: suggestions can be switched off everywhere, and
 * the choice survives page loads through host-provided storage.
 */

import type { PreferenceStorage } from './types.js';

export const PREF_KEY = 'smart-suggestions-enabled';

const memory = new Map<string, string>();

/** In-memory fallback used when the host supplies no storage. */
export const memoryStorage: PreferenceStorage = {
  get: (key) => memory.get(key) ?? null,
  set: (key, value) => {
    memory.set(key, value);
  },
};

export function suggestionsEnabled(storage: PreferenceStorage): boolean {
  return storage.get(PREF_KEY) !== 'false';
}

export function setSuggestionsEnabled(storage: PreferenceStorage, enabled: boolean): void {
  storage.set(PREF_KEY, enabled ? 'true' : 'false');
}
