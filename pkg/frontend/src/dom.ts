// Thin DOM layer: renders state objects produced by session.ts and
// dashboard.ts. Texts are inserted with textContent (verbatim, no
// truncation, no markup interpretation).

import { LABELS } from './api.js';
import { DashboardViewModel, ProgressViewModel } from './dashboard.js';
import { KEY_TO_LABEL, LabelingSession } from './session.js';

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderLabeling(root: HTMLElement, session: LabelingSession): void {
  const state = session.state;
  root.textContent = '';

  const header = el('div', 'progress', `${state.done}/${state.total} labeled`);
  root.appendChild(header);

  if (state.notice !== null) {
    root.appendChild(el('div', `notice notice-${state.lastSubmission}`, state.notice));
    if (state.lastSubmission === 'offline') {
      const retry = el('button', 'retry', 'retry') as HTMLButtonElement;
      retry.addEventListener('click', () => {
        void session.retry().then(() => renderLabeling(root, session));
      });
      root.appendChild(retry);
    }
  }

  if (state.finished) {
    root.appendChild(el('div', 'complete', 'All examples labeled. Thank you!'));
    return;
  }
  const example = state.current;
  if (example === null) return;

  const card = el('div', 'card');
  card.appendChild(el('div', 'meta', `${example.domain} · ${example.length}`));
  card.appendChild(el('p', 'premise', example.premise));
  card.appendChild(el('p', 'hypothesis', example.hypothesis));
  root.appendChild(card);

  const buttons = el('div', 'buttons');
  LABELS.forEach((label, index) => {
    const button = el('button', `label label-${label}`, `${index + 1} ${label}`) as HTMLButtonElement;
    // while the hub is unreachable only the retry path may talk to it;
    // votes are never queued client-side
    button.disabled = state.lastSubmission === 'offline';
    button.addEventListener('click', () => {
      void session.submit(label).then(() => renderLabeling(root, session));
    });
    buttons.appendChild(button);
  });
  root.appendChild(buttons);
}

export function bindKeyboard(root: HTMLElement, session: LabelingSession): void {
  document.addEventListener('keydown', (event) => {
    if (KEY_TO_LABEL[event.key] === undefined) return;
    void session.submitKey(event.key).then(() => renderLabeling(root, session));
  });
}

export function renderDashboard(
  root: HTMLElement,
  model: DashboardViewModel | ProgressViewModel,
): void {
  root.textContent = '';
  if (model.kind === 'in-progress') {
    root.appendChild(el('h2', 'title', 'Session in progress'));
    for (const bar of model.bars) {
      const row = el('div', 'bar-row');
      row.appendChild(el('span', 'bar-name', bar.annotator));
      const track = el('div', 'bar-track');
      const fill = el('div', 'bar-fill');
      fill.style.width = bar.total ? `${(100 * bar.done) / bar.total}%` : '0%';
      track.appendChild(fill);
      row.appendChild(track);
      row.appendChild(el('span', 'bar-label', bar.label));
      root.appendChild(row);
    }
    return;
  }

  root.appendChild(el('h2', 'title', 'Agreement report'));
  const tiles: [string, string][] = [
    ['average κ', model.averageKappa],
    ['majority labels', model.majorityCount],
    ['majority coverage', model.majorityCoverage],
    ['unanimous', model.unanimousCount],
    ['model vs majority', model.modelAccuracyMajority],
    ['model vs unanimous', model.modelAccuracyUnanimous],
    ['model κ vs majority', model.modelKappaMajority],
    ['model κ vs unanimous', model.modelKappaUnanimous],
  ];
  const grid = el('div', 'tiles');
  for (const [caption, value] of tiles) {
    const tile = el('div', 'tile');
    tile.appendChild(el('div', 'tile-value', value));
    tile.appendChild(el('div', 'tile-caption', caption));
    grid.appendChild(tile);
  }
  root.appendChild(grid);

  const pairs = el('div', 'pairs');
  for (const entry of model.pairwise) {
    pairs.appendChild(el('div', 'pair', `${entry.pair}: ${entry.kappa}`));
  }
  root.appendChild(pairs);
}
