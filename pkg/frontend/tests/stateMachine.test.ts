import { describe, expect, it } from 'vitest';

import {
  canSubmit,
  initialState,
  labelForKey,
  transition,
} from '../src/stateMachine.js';
import type { SessionEvent, SessionState } from '../src/stateMachine.js';
import type { ReviewItem } from '../src/types.js';
import { RAW_LABELS } from '../src/types.js';

const item: ReviewItem = {
  event_id: 'ev1',
  text: 'loss of offsite power during Mode 5',
  predicted_class: 'LOOP',
  probabilities: [0.1, 0.1, 0.7, 0.1],
  spans: [],
  status: 'pending',
  analyst_label: null,
  note: null,
};

function reviewing(): SessionState {
  return transition(initialState(), {
    type: 'FETCH_SUCCESS',
    item,
    progress: { labeled: 2, total: 10 },
  });
}

describe('triage state machine', () => {
  it('starts loading and shows the fetched item', () => {
    const state = reviewing();
    expect(state.status).toBe('reviewing');
    expect(state.item?.event_id).toBe('ev1');
    expect(state.selectedLabel).toBeNull();
  });

  it('reaches the complete state when the queue drains', () => {
    const state = transition(initialState(), {
      type: 'FETCH_SUCCESS',
      item: null,
      progress: { labeled: 10, total: 10 },
    });
    expect(state.status).toBe('complete');
  });

  it('never submits without a selected label', () => {
    const state = reviewing();
    expect(canSubmit(state)).toBe(false);
    const after = transition(state, { type: 'SUBMIT' });
    expect(after).toBe(state); // unchanged, no transition into submitting
    expect(after.status).toBe('reviewing');
  });

  it('no event sequence reaches submitting without a label', () => {
    // brute-force: from reviewing, apply every event pair that omits
    // SELECT_LABEL and check submitting is unreachable
    const events: SessionEvent[] = [
      { type: 'SUBMIT' },
      { type: 'SET_NOTE', note: 'looked odd' },
      { type: 'RETRY' },
      { type: 'FETCH_ERROR', message: 'x' },
      { type: 'SUBMIT_SUCCESS', progress: { labeled: 3, total: 10 } },
      { type: 'SUBMIT_REJECTED', message: 'nope' },
    ];
    for (const first of events) {
      for (const second of events) {
        let state = reviewing();
        state = transition(state, first);
        state = transition(state, second);
        expect(state.status).not.toBe('submitting');
      }
    }
  });

  it('submits once a label is selected and counts optimistically', () => {
    let state = reviewing();
    state = transition(state, { type: 'SELECT_LABEL', label: 'LOOP' });
    expect(canSubmit(state)).toBe(true);
    state = transition(state, { type: 'SUBMIT' });
    expect(state.status).toBe('submitting');
    expect(state.progress.labeled).toBe(3); // optimistic 2 -> 3
  });

  it('rolls the optimistic count back when the server rejects', () => {
    let state = reviewing();
    state = transition(state, { type: 'SELECT_LABEL', label: 'SFP' });
    state = transition(state, { type: 'SUBMIT' });
    state = transition(state, { type: 'SUBMIT_REJECTED', message: 'bad label' });
    expect(state.status).toBe('reviewing');
    expect(state.item?.event_id).toBe('ev1'); // item stays current
    expect(state.inlineError).toBe('bad label');
    expect(state.progress.labeled).toBe(2);
  });

  it('advances to loading after a successful submit', () => {
    let state = reviewing();
    state = transition(state, { type: 'SELECT_LABEL', label: 'LOAC' });
    state = transition(state, { type: 'SUBMIT' });
    state = transition(state, { type: 'SUBMIT_SUCCESS', progress: { labeled: 3, total: 10 } });
    expect(state.status).toBe('loading');
    expect(state.selectedLabel).toBeNull();
    expect(state.note).toBe('');
  });

  it('connection failures land in error with retry back to loading', () => {
    let state = transition(initialState(), { type: 'FETCH_ERROR', message: 'refused' });
    expect(state.status).toBe('error');
    expect(state.bannerError).toBe('refused');
    state = transition(state, { type: 'RETRY' });
    expect(state.status).toBe('loading');
    expect(state.bannerError).toBeNull();
  });

  it('selecting a label clears a previous inline error', () => {
    let state = reviewing();
    state = transition(state, { type: 'SELECT_LABEL', label: 'SFP' });
    state = transition(state, { type: 'SUBMIT' });
    state = transition(state, { type: 'SUBMIT_REJECTED', message: 'nope' });
    state = transition(state, { type: 'SELECT_LABEL', label: 'LOOP' });
    expect(state.inlineError).toBeNull();
    expect(state.selectedLabel).toBe('LOOP');
  });
});

describe('label options', () => {
  it('exposes exactly the seven raw event types', () => {
    expect(RAW_LABELS).toEqual(['ISOL', 'FLOW', 'LOCA', 'LOAC', 'LOOP', 'SFP', 'NON_SDIE']);
    expect(RAW_LABELS).not.toContain('EXCLUDED');
    expect(RAW_LABELS).not.toContain('ISOL_FLOW');
  });

  it('maps keyboard shortcuts 1-7 onto the raw labels', () => {
    expect(labelForKey('1')).toBe('ISOL');
    expect(labelForKey('5')).toBe('LOOP');
    expect(labelForKey('7')).toBe('NON_SDIE');
    expect(labelForKey('8')).toBeNull();
    expect(labelForKey('a')).toBeNull();
    expect(labelForKey('0')).toBeNull();
  });
});
