/** Pure state machine for a triage session.
 *
 * loading -> reviewing -> submitting -> loading | reviewing(rejected)
 * loading -> complete when the queue drains; connection failures land in
 * error with a retry path. Submission is guarded: without a selected
 * label a SUBMIT event leaves the state untouched, so no transition into
 * `submitting` can ever happen label-free.
 */

import type { Progress, RawLabel, ReviewItem } from './types.js';
import { RAW_LABELS } from './types.js';

export type Status = 'loading' | 'reviewing' | 'submitting' | 'complete' | 'error';

export interface SessionState {
  status: Status;
  item: ReviewItem | null;
  selectedLabel: RawLabel | null;
  note: string;
  progress: Progress;
  /** label rejected by the server; shown next to the item */
  inlineError: string | null;
  /** connection-level failure; shown as a banner with retry */
  bannerError: string | null;
}

export type SessionEvent =
  | { type: 'FETCH_SUCCESS'; item: ReviewItem | null; progress: Progress }
  | { type: 'FETCH_ERROR'; message: string }
  | { type: 'SELECT_LABEL'; label: RawLabel }
  | { type: 'SET_NOTE'; note: string }
  | { type: 'SUBMIT' }
  | { type: 'SUBMIT_SUCCESS'; progress: Progress }
  | { type: 'SUBMIT_REJECTED'; message: string }
  | { type: 'SUBMIT_FAILED'; message: string }
  | { type: 'RETRY' };

export function initialState(): SessionState {
  return {
    status: 'loading',
    item: null,
    selectedLabel: null,
    note: '',
    progress: { labeled: 0, total: 0 },
    inlineError: null,
    bannerError: null,
  };
}

export function canSubmit(state: SessionState): boolean {
  return state.status === 'reviewing' && state.item !== null && state.selectedLabel !== null;
}

export function transition(state: SessionState, event: SessionEvent): SessionState {
  switch (event.type) {
    case 'FETCH_SUCCESS': {
      if (state.status !== 'loading') return state;
      if (event.item === null) {
        return { ...state, status: 'complete', item: null, progress: event.progress };
      }
      return {
        ...state,
        status: 'reviewing',
        item: event.item,
        selectedLabel: null,
        note: '',
        inlineError: null,
        bannerError: null,
        progress: event.progress,
      };
    }
    case 'FETCH_ERROR': {
      if (state.status !== 'loading') return state;
      return { ...state, status: 'error', bannerError: event.message };
    }
    case 'SELECT_LABEL': {
      if (state.status !== 'reviewing') return state;
      return { ...state, selectedLabel: event.label, inlineError: null };
    }
    case 'SET_NOTE': {
      if (state.status !== 'reviewing') return state;
      return { ...state, note: event.note };
    }
    case 'SUBMIT': {
      if (!canSubmit(state)) return state; // the guard: no label, no submit
      return {
        ...state,
        status: 'submitting',
        // optimistic: count the label now, roll back on rejection
        progress: { ...state.progress, labeled: state.progress.labeled + 1 },
      };
    }
    case 'SUBMIT_SUCCESS': {
      if (state.status !== 'submitting') return state;
      return {
        ...state,
        status: 'loading',
        item: null,
        selectedLabel: null,
        note: '',
        inlineError: null,
        progress: event.progress,
      };
    }
    case 'SUBMIT_REJECTED': {
      if (state.status !== 'submitting') return state;
      return {
        ...state,
        status: 'reviewing', // the item stays current
        inlineError: event.message,
        progress: { ...state.progress, labeled: state.progress.labeled - 1 },
      };
    }
    case 'SUBMIT_FAILED': {
      if (state.status !== 'submitting') return state;
      return {
        ...state,
        status: 'error',
        bannerError: event.message,
        progress: { ...state.progress, labeled: state.progress.labeled - 1 },
      };
    }
    case 'RETRY': {
      if (state.status !== 'error') return state;
      return { ...state, status: 'loading', bannerError: null };
    }
  }
}

/** Keyboard shortcut mapping: keys 1-7 pick the seven raw labels. */
export function labelForKey(key: string): RawLabel | null {
  const index = Number.parseInt(key, 10) - 1;
  if (Number.isInteger(index) && index >= 0 && index < RAW_LABELS.length) {
    return RAW_LABELS[index];
  }
  return null;
}
