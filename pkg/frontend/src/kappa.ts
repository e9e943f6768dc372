/** Inter-rater agreement for the rating widget. */

export type Verdict = 'faithful' | 'unfaithful';

/**
 * Fleiss' kappa over a table of per-item category counts.  Every row must
 * sum to the same number of raters.  Returns 1 for perfect agreement and
 * NaN when expected agreement is already 1 without perfect observed
 * agreement.
 */
export function fleissKappa(table: ReadonlyArray<ReadonlyArray<number>>): number {
  if (table.length < 1) {
    throw new Error('kappa needs at least one item');
  }
  const categories = table[0].length;
  const raters = table[0].reduce((a, b) => a + b, 0);
  if (raters < 2) {
    throw new Error('kappa needs at least two raters');
  }
  for (const row of table) {
    if (row.length !== categories) {
      throw new Error('ragged rating table');
    }
    if (row.reduce((a, b) => a + b, 0) !== raters) {
      throw new Error('unequal rater counts across items');
    }
  }
  const n = table.length;
  let pBar = 0;
  const proportions = new Array(categories).fill(0);
  for (const row of table) {
    let agree = 0;
    row.forEach((count, j) => {
      agree += count * (count - 1);
      proportions[j] += count;
    });
    pBar += agree / (raters * (raters - 1));
  }
  pBar /= n;
  let pExpected = 0;
  for (const total of proportions) {
    const p = total / (n * raters);
    pExpected += p * p;
  }
  if (pExpected === 1) {
    return pBar === 1 ? 1 : NaN;
  }
  return (pBar - pExpected) / (1 - pExpected);
}

/**
 * Converts per-rater verdict lists (one list per rater, one verdict per
 * image) into the count table fleissKappa expects.
 */
export function ratingTable(
  verdictsByRater: ReadonlyArray<ReadonlyArray<Verdict>>,
): number[][] {
  if (verdictsByRater.length < 2) {
    throw new Error('need at least two raters');
  }
  const nImages = verdictsByRater[0].length;
  for (const verdicts of verdictsByRater) {
    if (verdicts.length !== nImages) {
      throw new Error('raters rated different numbers of images');
    }
  }
  const table: number[][] = [];
  for (let i = 0; i < nImages; i++) {
    let faithful = 0;
    for (const verdicts of verdictsByRater) {
      if (verdicts[i] === 'faithful') {
        faithful += 1;
      }
    }
    table.push([faithful, verdictsByRater.length - faithful]);
  }
  return table;
}
