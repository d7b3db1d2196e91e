/** Browser entry point: a single-page triage client.
 *
 * Configuration arrives via query parameters:
 *   ?service=http://host:8400&project=proj-1&reviewer=alice[&token=...]
 */

import type { ApiConfig } from './api.js';
import { exportUrl } from './api.js';
import { colorFor, renderHighlights } from './highlights.js';
import { TriageSession } from './session.js';
import { labelForKey } from './stateMachine.js';
import type { SessionState } from './stateMachine.js';
import { RAW_LABELS } from './types.js';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: (HTMLElement | string)[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === 'class') node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function render(root: HTMLElement, session: TriageSession, state: SessionState): void {
  root.replaceChildren();

  const progress = el(
    'div',
    { class: 'progress' },
    `${state.progress.labeled} / ${state.progress.total} labeled`,
  );
  root.append(progress);

  if (state.bannerError) {
    root.append(
      el(
        'div',
        { class: 'banner error' },
        `Service unreachable: ${state.bannerError} `,
        el('button', { id: 'retry' }, 'retry now'),
      ),
    );
  }

  switch (state.status) {
    case 'loading':
      root.append(el('div', { class: 'status' }, 'Loading next item...'));
      return;
    case 'complete':
      root.append(el('div', { class: 'status done' }, 'Queue complete. Nothing left to review.'));
      return;
    case 'error':
      return;
    default:
      break;
  }

  const item = state.item;
  if (!item) return;

  const textBox = el('div', { class: 'event-text' });
  for (const segment of renderHighlights(item.text, item.spans)) {
    if (segment.categories.length === 0) {
      textBox.append(segment.text);
      continue;
    }
    const mark = el('mark', {
      style: `background:${colorFor(segment.categories[0])}33;border-bottom:2px solid ${colorFor(segment.categories[0])}`,
      title: segment.categories.join(' + '),
    });
    mark.textContent = segment.text;
    for (const category of segment.categories) {
      mark.append(el('sup', { class: 'badge' }, category));
    }
    textBox.append(mark);
  }
  root.append(el('div', { class: 'event-id' }, `event ${item.event_id}`), textBox);

  if (item.predicted_class) {
    const bars = el('div', { class: 'probs' });
    item.probabilities.forEach((p, i) => {
      bars.append(
        el(
          'div',
          { class: 'prob', title: String(p) },
          el('span', { class: 'prob-label' }, ['ISOL_FLOW', 'LOAC', 'LOOP', 'NON_SDIE'][i] ?? `c${i}`),
          el('span', {
            class: 'prob-bar',
            style: `display:inline-block;height:0.6em;background:#888;width:${Math.round(p * 160)}px`,
          }),
          ` ${(100 * p).toFixed(1)}%`,
        ),
      );
    });
    root.append(el('div', { class: 'suggestion' }, `model suggests ${item.predicted_class}`), bars);
  }

  const labels = el('div', { class: 'labels' });
  RAW_LABELS.forEach((label, i) => {
    const button = el(
      'button',
      { class: state.selectedLabel === label ? 'label selected' : 'label', 'data-label': label },
      `${i + 1} ${label}`,
    );
    button.addEventListener('click', () => session.selectLabel(label));
    labels.append(button);
  });
  root.append(labels);

  const note = el('textarea', { class: 'note', placeholder: 'note (optional)' });
  note.value = state.note;
  note.addEventListener('input', () => session.setNote(note.value));
  root.append(note);

  if (state.inlineError) {
    root.append(el('div', { class: 'inline error' }, `Rejected: ${state.inlineError}`));
  }

  const submit = el('button', { class: 'submit', id: 'submit' }, 'Submit (Enter)');
  if (!state.selectedLabel || state.status === 'submitting') {
    submit.setAttribute('disabled', 'disabled');
  }
  submit.addEventListener('click', () => void session.submit());
  root.append(submit);
}

export function boot(root: HTMLElement): TriageSession {
  const params = new URLSearchParams(window.location.search);
  const config: ApiConfig = {
    baseUrl: params.get('service') ?? '',
    token: params.get('token') ?? undefined,
    reviewer: params.get('reviewer') ?? 'anonymous',
  };
  const projectId = params.get('project') ?? '';

  const session = new TriageSession(config, projectId, {
    onChange: (state) => render(root, session, state),
  });

  document.addEventListener('keydown', (event) => {
    if (event.target instanceof HTMLTextAreaElement) return;
    const label = labelForKey(event.key);
    if (label) session.selectLabel(label);
    if (event.key === 'Enter') void session.submit();
  });
  document.addEventListener('click', (event) => {
    if (event.target instanceof HTMLElement && event.target.id === 'retry') {
      void session.retry();
    }
  });

  const exportLink = document.getElementById('export-link');
  if (exportLink instanceof HTMLAnchorElement && projectId) {
    exportLink.href = exportUrl(config, projectId);
  }

  void session.start();
  return session;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot(document.getElementById('app')!);
}
