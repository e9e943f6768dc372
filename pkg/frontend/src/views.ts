import type { ExperimentReport, ExperimentRow, SessionState } from './types.js';
import { fleissKappa, ratingTable, type Verdict } from './kappa.js';

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/** Badge shown under each generated image: did the checker answer yes? */
export function verdictBadge(answer: string): string {
  const faithful = answer === 'yes';
  const cls = faithful ? 'badge badge-yes' : 'badge badge-no';
  const label = faithful ? 'faithful' : 'unfaithful';
  return `<span class="${cls}">${label}</span>`;
}

/** The queue of sessions awaiting an answer, with resolved ones greyed out. */
export function renderQueue(sessions: ReadonlyArray<SessionState>): string {
  const items = sessions.map((s) => {
    const pending = s.resolution.kind === 'pending';
    const cls = pending ? 'queue-item pending' : 'queue-item done';
    const status = pending ? 'needs answer' : s.resolution.kind;
    const clarification = s.clarification.items
      .map((item, i) => `<li data-index="${i}">${escapeHtml(item)}</li>`)
      .join('');
    return (
      `<li class="${cls}" data-session-id="${escapeHtml(s.session_id)}">` +
      `<span class="prompt">${escapeHtml(s.record.example)}</span>` +
      `<span class="status">${status}</span>` +
      `<ol class="clarification">${clarification}</ol>` +
      `</li>`
    );
  });
  return `<ul class="queue">${items.join('')}</ul>`;
}

function renderImageCell(hash: string, answer: string, imageUrl: (h: string) => string): string {
  return (
    `<figure class="image-cell">` +
    `<img src="${imageUrl(hash)}" alt="generated image" width="64" height="64">` +
    `<figcaption>${verdictBadge(answer)}</figcaption>` +
    `</figure>`
  );
}

function renderConditionColumn(row: ExperimentRow, imageUrl: (h: string) => string): string {
  const cells = row.image_hashes
    .map((hash, i) => renderImageCell(hash, row.answers[i], imageUrl))
    .join('');
  return (
    `<div class="condition" data-condition="${row.condition}">` +
    `<h4>${row.condition} <small>${(row.rate * 100).toFixed(0)}% faithful</small></h4>` +
    `<p class="prompt-text">${escapeHtml(row.prompt_text)}</p>` +
    `<div class="images">${cells}</div>` +
    `</div>`
  );
}

/**
 * Side-by-side comparison: for each session, one column per condition with
 * its generated images and per-image verdict badges.
 */
export function renderComparisonGrid(
  report: ExperimentReport,
  imageUrl: (hash: string) => string,
): string {
  const bySession = new Map<string, ExperimentRow[]>();
  for (const row of report.rows) {
    const rows = bySession.get(row.session_id) ?? [];
    rows.push(row);
    bySession.set(row.session_id, rows);
  }
  const blocks: string[] = [];
  for (const [sessionId, rows] of bySession) {
    const columns = rows.map((row) => renderConditionColumn(row, imageUrl)).join('');
    blocks.push(
      `<section class="comparison" data-session-id="${escapeHtml(sessionId)}">` +
      `<h3>${escapeHtml(rows[0].prompt_id)} · ${rows[0].ambiguity_type}</h3>` +
      `<div class="columns">${columns}</div>` +
      `</section>`,
    );
  }
  return blocks.join('');
}

export function renderSummary(report: ExperimentReport): string {
  const rows = Object.entries(report.per_condition)
    .map(
      ([condition, agg]) =>
        `<tr><td>${condition}</td>` +
        `<td>${agg.mean_per_prompt.toFixed(4)}</td>` +
        `<td>${agg.mean_per_image.toFixed(4)}</td>` +
        `<td>${agg.n_items}</td></tr>`,
    )
    .join('');
  return (
    `<table class="summary">` +
    `<thead><tr><th>condition</th><th>mean / prompt</th>` +
    `<th>mean / image</th><th>n</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export interface RatingRound {
  readonly imageHashes: ReadonlyArray<string>;
  readonly verdictsByRater: ReadonlyArray<ReadonlyArray<Verdict>>;
}

/**
 * Rating widget state after a round: the per-image tallies and the
 * inter-rater agreement over the collected verdicts.
 */
export function renderRatingResult(round: RatingRound): string {
  const table = ratingTable(round.verdictsByRater);
  const kappa = fleissKappa(table);
  const rows = round.imageHashes
    .map(
      (hash, i) =>
        `<tr><td>${escapeHtml(hash.slice(0, 8))}</td>` +
        `<td>${table[i][0]}</td><td>${table[i][1]}</td></tr>`,
    )
    .join('');
  const kappaText = Number.isNaN(kappa) ? 'undefined' : kappa.toFixed(4);
  return (
    `<div class="rating-result">` +
    `<table><thead><tr><th>image</th><th>faithful</th><th>unfaithful</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="kappa">agreement (Fleiss&#39; kappa): <strong>${kappaText}</strong></p>` +
    `</div>`
  );
}
