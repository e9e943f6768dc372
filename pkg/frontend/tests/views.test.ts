import { describe, expect, it } from 'vitest';

import {
  renderComparisonGrid,
  renderQueue,
  renderRatingResult,
  renderSummary,
  verdictBadge,
} from '../src/views.js';
import type { ExperimentReport, SessionState } from '../src/types.js';

const record = {
  id: 'tab-0001',
  example: 'An elephant and a bird flying',
  ambiguity_type: 'Conjunction',
  template_id: 'conjunction-gerund',
  bindings: {},
  complexity: 'simple',
  is_combination: false,
  visual_setups: ['the elephant is flying', 'the elephant is not flying'],
  cs_labels: ['UCS', 'CS'],
  questions: ['is the elephant flying?', 'is the elephant not flying?'],
};

function session(kind: 'pending' | 'selected'): SessionState {
  return {
    session_id: 's1',
    record,
    intention_index: 0,
    mode: 'multi_setup',
    clarification: { items: record.visual_setups, source: 'oracle', raw_continuation: null },
    resolution: { kind, signal: null, index: kind === 'selected' ? 0 : null },
    disambiguated_prompt: null,
    paraphrased_prompt: null,
  };
}

const report: ExperimentReport = {
  rows: [
    {
      session_id: 's1', prompt_id: 'tab-0001', ambiguity_type: 'Conjunction',
      condition: 'ambiguous', prompt_text: 'An elephant and a bird flying',
      question: 'is the elephant flying?', answers: ['no', 'no'],
      yes_count: 0, rate: 0, image_hashes: ['aaa', 'bbb'],
    },
    {
      session_id: 's1', prompt_id: 'tab-0001', ambiguity_type: 'Conjunction',
      condition: 'disambiguated',
      prompt_text: 'An elephant and a bird flying. The elephant is flying.',
      question: 'is the elephant flying?', answers: ['yes', 'yes'],
      yes_count: 2, rate: 1, image_hashes: ['ccc', 'ddd'],
    },
  ],
  config_hash: 'h',
  per_condition: {
    ambiguous: { mean_per_image: 0, mean_per_prompt: 0, n_items: 1 },
    disambiguated: { mean_per_image: 1, mean_per_prompt: 1, n_items: 1 },
  },
  per_condition_type: {},
};

describe('verdictBadge', () => {
  it('marks yes answers faithful and everything else unfaithful', () => {
    expect(verdictBadge('yes')).toContain('badge-yes');
    expect(verdictBadge('no')).toContain('badge-no');
    expect(verdictBadge('yep')).toContain('badge-no');
  });
});

describe('renderQueue', () => {
  it('lists clarification items with indices for pending sessions', () => {
    const html = renderQueue([session('pending')]);
    expect(html).toContain('needs answer');
    expect(html).toContain('data-index="0"');
    expect(html).toContain('the elephant is not flying');
  });

  it('greys out resolved sessions', () => {
    expect(renderQueue([session('selected')])).toContain('queue-item done');
  });

  it('escapes HTML in prompt text', () => {
    const nasty = { ...session('pending'), record: { ...record, example: '<img>' } };
    expect(renderQueue([nasty])).toContain('&lt;img&gt;');
  });
});

describe('renderComparisonGrid', () => {
  it('puts both conditions side by side with one badge per image', () => {
    const html = renderComparisonGrid(report, (h) => `/images/${h}`);
    expect(html).toContain('data-condition="ambiguous"');
    expect(html).toContain('data-condition="disambiguated"');
    expect((html.match(/class="badge/g) ?? []).length).toBe(4);
    expect((html.match(/badge-yes/g) ?? []).length).toBe(2);
    expect(html).toContain('src="/images/ccc"');
  });
});

describe('renderSummary', () => {
  it('tabulates per-condition means', () => {
    const html = renderSummary(report);
    expect(html).toContain('<td>disambiguated</td>');
    expect(html).toContain('<td>1.0000</td>');
    expect(html).toContain('<td>0.0000</td>');
  });
});

describe('renderRatingResult', () => {
  it('reports kappa 1 for a fully agreeing 3-rater round over 5 images', () => {
    const verdicts = ['faithful', 'unfaithful', 'faithful', 'faithful', 'unfaithful'] as const;
    const html = renderRatingResult({
      imageHashes: ['a', 'b', 'c', 'd', 'e'],
      verdictsByRater: [[...verdicts], [...verdicts], [...verdicts]],
    });
    expect(html).toContain('<strong>1.0000</strong>');
  });
});
