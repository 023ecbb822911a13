// Browser entry point. Identity comes from URL parameters with a
// localStorage fallback: ?hub=...&session=...&annotator=...&view=label|dashboard

import { HubClient, ReportIncomplete } from './api.js';
import { buildDashboard, buildProgress } from './dashboard.js';
import { bindKeyboard, renderDashboard, renderLabeling } from './dom.js';
import { LabelingSession } from './session.js';

function param(name: string, fallback: string): string {
  const fromUrl = new URLSearchParams(window.location.search).get(name);
  if (fromUrl !== null) {
    window.localStorage.setItem(`nliforge.${name}`, fromUrl);
    return fromUrl;
  }
  return window.localStorage.getItem(`nliforge.${name}`) ?? fallback;
}

async function boot(): Promise<void> {
  const root = document.getElementById('app');
  if (root === null) return;
  const client = new HubClient(param('hub', window.location.origin));
  const sessionId = param('session', '');
  const view = param('view', 'label');

  if (view === 'dashboard') {
    try {
      renderDashboard(root, buildDashboard(await client.report(sessionId)));
    } catch (error) {
      if (error instanceof ReportIncomplete) {
        renderDashboard(root, buildProgress(await client.status(sessionId)));
      } else {
        root.textContent = `failed to load report: ${String(error)}`;
      }
    }
    return;
  }

  const annotator = param('annotator', '');
  const session = new LabelingSession(client, sessionId, annotator);
  await session.start();
  renderLabeling(root, session);
  bindKeyboard(root, session);
}

void boot();
