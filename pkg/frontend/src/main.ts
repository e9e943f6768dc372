import { ApiClient } from './api.js';
import {
  renderComparisonGrid,
  renderQueue,
  renderRatingResult,
  renderSummary,
  type RatingRound,
} from './views.js';
import type { SessionState } from './types.js';
import type { Verdict } from './kappa.js';

const API_BASE = (window as { PROMPTLENS_API?: string }).PROMPTLENS_API
  ?? 'http://127.0.0.1:8400';

const api = new ApiClient(API_BASE);

const queueEl = document.getElementById('queue')!;
const gridEl = document.getElementById('grid')!;
const summaryEl = document.getElementById('summary')!;
const ratingEl = document.getElementById('rating')!;
const statusEl = document.getElementById('status')!;

let benchmarkId: string | null = null;
const sessions: SessionState[] = [];

function setStatus(text: string) {
  statusEl.textContent = text;
}

function refreshQueue() {
  queueEl.innerHTML = renderQueue(sessions);
  for (const li of queueEl.querySelectorAll<HTMLElement>('.queue-item.pending')) {
    const sessionId = li.dataset.sessionId!;
    for (const item of li.querySelectorAll<HTMLElement>('.clarification li')) {
      item.addEventListener('click', () => {
        void selectInterpretation(sessionId, Number(item.dataset.index));
      });
    }
  }
}

function replaceSession(updated: SessionState) {
  const at = sessions.findIndex((s) => s.session_id === updated.session_id);
  if (at >= 0) {
    sessions[at] = updated;
  }
  refreshQueue();
}

async function selectInterpretation(sessionId: string, index: number) {
  const updated = await api.resolve(sessionId, { action: 'select', index });
  replaceSession(updated);
  setStatus(`resolved ${sessionId}: ${updated.disambiguated_prompt}`);
}

async function loadBenchmark() {
  setStatus('generating benchmark…');
  const info = await api.createBenchmark(0, {
    pp: 2, vp: 2, conjunction: 2, anaphora: 1, ellipsis: 1,
    fairness: 1, complex: 0, combination: 0, misc: 0,
  });
  benchmarkId = info.benchmark_id;
  const page = await api.listRecords(benchmarkId);
  sessions.length = 0;
  for (const record of page.records) {
    sessions.push(await api.createSession(benchmarkId, record.id, 0, 'multi_setup'));
  }
  refreshQueue();
  setStatus(`benchmark ${benchmarkId}: ${sessions.length} sessions open`);
}

async function runExperiment() {
  const resolved = sessions.filter(
    (s) => s.resolution.kind === 'answered' || s.resolution.kind === 'selected',
  );
  if (resolved.length === 0) {
    setStatus('answer at least one session first');
    return;
  }
  setStatus('generating images…');
  const handle = await api.createExperiment(
    resolved.map((s) => s.session_id),
    ['ambiguous', 'disambiguated'],
    4,
  );
  const report = await api.waitForReport(handle.experiment_id);
  gridEl.innerHTML = renderComparisonGrid(report, (hash) => api.imageUrl(hash));
  summaryEl.innerHTML = renderSummary(report);
  setStatus(`experiment ${handle.experiment_id} done: ${report.rows.length} rows`);
  wireRating(report.rows[0]?.image_hashes.slice(0, 5) ?? []);
}

function wireRating(imageHashes: ReadonlyArray<string>) {
  if (imageHashes.length === 0) {
    return;
  }
  const verdictsByRater: Verdict[][] = [];
  const form = document.getElementById('rating-form') as HTMLFormElement;
  form.hidden = false;
  form.onsubmit = (event) => {
    event.preventDefault();
    const verdicts = imageHashes.map((_, i) => {
      const input = form.querySelector<HTMLInputElement>(
        `input[name="image-${i}"]:checked`,
      );
      return (input?.value ?? 'unfaithful') as Verdict;
    });
    verdictsByRater.push(verdicts);
    if (verdictsByRater.length >= 2) {
      const round: RatingRound = { imageHashes, verdictsByRater };
      ratingEl.innerHTML = renderRatingResult(round);
    }
    setStatus(`recorded rater ${verdictsByRater.length}`);
    form.reset();
  };
}

document.getElementById('load')!.addEventListener('click', () => {
  loadBenchmark().catch((err) => setStatus(String(err)));
});
document.getElementById('run')!.addEventListener('click', () => {
  runExperiment().catch((err) => setStatus(String(err)));
});
