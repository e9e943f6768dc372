"""Text-overlap and agreement metrics used to score clarification output.

All metrics are self-contained so scores are stable across environments:
BLEU-4 (corpus level), ROUGE-1 F1, Pearson correlation and Fleiss' kappa.
A shared tokenizer keeps the overlap metrics consistent with each other.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

_STRIP = ".,;:?!"


def tokenize(text: str) -> list[str]:
    """Lowercase, strip trailing punctuation per token, drop empty tokens."""
    out = []
    for raw in text.split():
        token = raw.lower().rstrip(_STRIP)
        if token:
            out.append(token)
    return out


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(pairs: Iterable[tuple[str, Sequence[str]]]) -> float:
    """Corpus BLEU with n-grams up to 4.

    ``pairs`` holds (candidate, references) items.  Numerators and
    denominators accumulate over the whole corpus before the geometric mean;
    the brevity penalty compares total candidate length against the sum of
    closest-reference lengths (ties go to the shorter reference).  Any empty
    corpus-level n-gram numerator gives 0.0.
    """
    numer = [0] * 4
    denom = [0] * 4
    cand_total = 0
    ref_total = 0
    seen = False
    for candidate, references in pairs:
        if not references:
            raise ValueError("bleu4: candidate without references")
        seen = True
        cand = tokenize(candidate)
        refs = [tokenize(r) for r in references]
        cand_total += len(cand)
        ref_total += min((len(r) for r in refs), key=lambda L: (abs(L - len(cand)), L))
        for n in range(1, 5):
            counts = _ngrams(cand, n)
            if not counts:
                continue
            clipped = counts & _merge_max(_ngrams(r, n) for r in refs)
            numer[n - 1] += sum(clipped.values())
            denom[n - 1] += sum(counts.values())
    if not seen:
        raise ValueError("bleu4: empty corpus")
    if any(n == 0 for n in numer) or any(d == 0 for d in denom):
        return 0.0
    log_p = sum(math.log(n / d) for n, d in zip(numer, denom)) / 4.0
    if cand_total == 0:
        return 0.0
    bp = 1.0 if cand_total > ref_total else math.exp(1.0 - ref_total / cand_total)
    return bp * math.exp(log_p)


def _merge_max(counters: Iterable[Counter]) -> Counter:
    merged: Counter = Counter()
    for counter in counters:
        merged |= counter
    return merged


def rouge1_f1(candidate: str, references: Sequence[str]) -> float:
    """Unigram F1 against the best-matching reference."""
    if not references:
        raise ValueError("rouge1_f1: no references")
    cand = Counter(tokenize(candidate))
    cand_len = sum(cand.values())
    best = 0.0
    for reference in references:
        ref = Counter(tokenize(reference))
        ref_len = sum(ref.values())
        overlap = sum((cand & ref).values())
        if overlap == 0 or cand_len == 0 or ref_len == 0:
            continue
        precision = overlap / cand_len
        recall = overlap / ref_len
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample correlation coefficient; NaN when either side is constant."""
    if len(xs) != len(ys):
        raise ValueError("pearson: length mismatch")
    if len(xs) < 2:
        raise ValueError("pearson: need at least two points")
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0.0 or vy == 0.0:
        return float("nan")
    return cov / math.sqrt(vx * vy)


def fleiss_kappa(table: Sequence[Sequence[int]]) -> float:
    """Chance-corrected agreement for a ratings table.

    ``table[i][j]`` counts raters assigning item ``i`` to category ``j``;
    every row must sum to the same rater count (>= 2).
    """
    if not table:
        raise ValueError("fleiss_kappa: empty table")
    n_categories = len(table[0])
    raters = sum(table[0])
    if raters < 2:
        raise ValueError("fleiss_kappa: need at least two raters")
    for row in table:
        if len(row) != n_categories:
            raise ValueError("fleiss_kappa: ragged table")
        if sum(row) != raters:
            raise ValueError("fleiss_kappa: rows must have equal rater counts")
        if any(c < 0 for c in row):
            raise ValueError("fleiss_kappa: negative count")
    n_items = len(table)
    p_j = [sum(row[j] for row in table) / (n_items * raters) for j in range(n_categories)]
    p_bar = sum(
        sum(c * (c - 1) for c in row) / (raters * (raters - 1)) for row in table
    ) / n_items
    p_e = sum(p * p for p in p_j)
    if p_e == 1.0:
        return 1.0 if p_bar == 1.0 else float("nan")
    return (p_bar - p_e) / (1.0 - p_e)


@dataclass(frozen=True)
class ScoredItem:
    """One scoring unit: model generations against reference texts."""

    generations: tuple[str, ...]
    references: tuple[str, ...]
    ambiguity_type: str | None = None


@dataclass
class ScoreReport:
    bleu4: float
    rouge1: float
    n_items: int
    per_type: dict[str, dict[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "bleu4": self.bleu4,
            "rouge1": self.rouge1,
            "n_items": self.n_items,
            "per_type": self.per_type,
        }


def _score_subset(items: Sequence[ScoredItem]) -> tuple[float, float]:
    pairs = [(g, item.references) for item in items for g in item.generations]
    corpus_bleu = bleu4(pairs)
    item_means = []
    for item in items:
        scores = [rouge1_f1(g, item.references) for g in item.generations]
        item_means.append(sum(scores) / len(scores))
    return corpus_bleu, sum(item_means) / len(item_means)


def score_generations(items: Sequence[ScoredItem]) -> ScoreReport:
    """Corpus BLEU-4 plus mean per-item ROUGE-1, overall and per type."""
    items = [i for i in items]
    if not items:
        raise ValueError("score_generations: no items")
    for item in items:
        if not item.generations or not item.references:
            raise ValueError("score_generations: item without generations or references")
    overall_bleu, overall_rouge = _score_subset(items)
    per_type: dict[str, dict[str, float]] = {}
    for ambiguity_type in sorted({i.ambiguity_type for i in items if i.ambiguity_type}):
        subset = [i for i in items if i.ambiguity_type == ambiguity_type]
        b, r = _score_subset(subset)
        per_type[ambiguity_type] = {"bleu4": b, "rouge1": r, "n_items": len(subset)}
    return ScoreReport(
        bleu4=overall_bleu, rouge1=overall_rouge, n_items=len(items), per_type=per_type
    )
