"""Map a strategy to per-pronunciation scores for one word's candidates."""

from __future__ import annotations

import math
from fractions import Fraction

from . import probscore
from .strategies import (
    CandidateSet,
    StrategySpec,
    apply_root,
    best_per_pronunciation,
    collate,
    combine_ranks,
    component_ranks,
    factor_products,
    tp_wtp_score,
)


def cached_component_ranks(cs: CandidateSet, name: str) -> list[int]:
    cache = cs.__dict__.setdefault("_rank_cache", {})
    if name not in cache:
        cache[name] = component_ranks(name, cs)
    return cache[name]


def pronunciation_scores(spec: StrategySpec, cs: CandidateSet) -> dict[str, object]:
    """Score of every distinct assembled pronunciation (larger is better)."""
    rule = spec.rule
    if spec.is_classic:
        ranks = [cached_component_ranks(cs, c) for c in spec.components]
        return best_per_pronunciation(cs, combine_ranks(ranks, spec.combination))
    if rule == "UNIT":
        return {y: 1 for y in cs.classes}
    if rule == "TP":
        values = factor_products(cs, "abs", spec.root)
        return collate(cs, values)
    if rule == "WTP":
        if spec.root == 1:
            return tp_wtp_score(cs, weighted=True)
        values = [apply_root(Fraction(math.prod(f), math.prod(c.segmentation.lengths())), spec.root, len(f))
                  for f, c in zip(cs.freqs, cs.candidates)]
        return collate(cs, values)
    if rule == "PRODUCT":
        values = factor_products(cs, spec.factor, spec.root)
    else:
        values = probscore.candidate_masses(rule, cs, spec.root)
    return collate(cs, values) if spec.collate else best_per_pronunciation(cs, values)
