"""Probabilistic candidate evaluation.

Every candidate receives a mass built from estimated segment probabilities
``count / (total + 1)``; masses of candidates sharing an assembled
pronunciation are summed (a uniform prior over minimal segmentations), and
the pronunciation with the largest sum wins.

For overlapping segments the factor of a segment can be conditioned on the
phonemes already fixed on its overlap letters:

* PROD    no conditioning
* CONDR   left-to-right construction, each segment sees its left overlap
* CONDL   right-to-left construction
* CONDRL  mean of CONDR and CONDL
* CONDALL mean over all n! construction orders
* CONDF   every overlap fixed up front

Roots are taken of each per-order product before averaging or collation.
"""

from __future__ import annotations

import itertools
import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .corpus import strip_symbols, unescape
from .lattice import Candidate, NoPronunciation
from .strategies import TIE_RTOL, CandidateSet, apply_root, same_score

log = logging.getLogger(__name__)

COND_RULES = ("PROD", "CONDR", "CONDL", "CONDRL", "CONDALL", "CONDF")
CONDALL_WARN_SEGMENTS = 8


def segment_factor(cs: CandidateSet, i: int, k: int, left_fixed: bool, right_fixed: bool,
                   exact: bool = False):
    """Factor of segment ``k`` of candidate ``i`` with the chosen overlaps fixed.

    A side is only fixed when the segment actually shares a letter with its
    neighbour there (word ends and fallback junctions never are).
    """
    cand = cs.candidates[i]
    y = cand.prons[k]
    overlaps = cand.segmentation.overlaps
    fixed = {}
    if left_fixed and k > 0 and overlaps[k - 1]:
        fixed[0] = y[0]
    if right_fixed and k < len(overlaps) and overlaps[k]:
        fixed[len(y) - 1] = y[-1]
    num, den = cs.dists[i][k].conditional(y, fixed)
    return Fraction(num, den) if exact else num / den


def _order_product(cs, i, lefts, rights, exact=False):
    out = Fraction(1) if exact else 1.0
    for k, (lf, rf) in enumerate(zip(lefts, rights)):
        out *= segment_factor(cs, i, k, lf, rf, exact)
    return out


def _fixed_pattern(n: int, rule: str):
    if rule == "PROD":
        return [False] * n, [False] * n
    if rule == "CONDR":
        return [True] * n, [False] * n
    if rule == "CONDL":
        return [False] * n, [True] * n
    if rule == "CONDF":
        return [True] * n, [True] * n
    raise ValueError(rule)


@lru_cache(maxsize=None)
def ordering_weights(n: int) -> tuple[tuple[tuple[bool, ...], Fraction], ...]:
    """Share of the n! construction orders behind each edge orientation.

    An orientation lists, for every adjacent pair (k, k+1), whether k is placed
    before k+1.  The factor of segment k depends only on the orientations of
    its two edges, so averaging over orders reduces to a weighted sum over
    the 2**(n-1) orientations.  Weights count permutations with a given
    up-down signature.
    """
    if n > CONDALL_WARN_SEGMENTS:
        log.warning("CONDALL over %d segments: %d orientations", n, 2 ** (n - 1))
    total = math.factorial(n)
    out = []
    for signature in itertools.product((True, False), repeat=n - 1):
        out.append((signature, Fraction(_count_signature(signature), total)))
    return tuple(out)


def _count_signature(signature: Sequence[bool]) -> int:
    # dp[j]: arrangements of the first i elements with the i-th at relative rank j
    dp = [1]
    for up in signature:
        m = len(dp) + 1
        prefix = [0]
        for v in dp:
            prefix.append(prefix[-1] + v)
        if up:
            dp = [prefix[j] for j in range(m)]
        else:
            dp = [prefix[-1] - prefix[j] for j in range(m)]
    return sum(dp)


def candidate_mass(cs: CandidateSet, i: int, rule: str, root=1, exact: bool = False):
    """Mass of one candidate under a rule, with the root taken per order."""
    cand = cs.candidates[i]
    n = cand.n_segments

    def rooted(v):
        if exact and root == 1:
            return v
        return apply_root(float(v), root, n)

    if rule in ("PROD", "CONDR", "CONDL", "CONDF"):
        return rooted(_order_product(cs, i, *_fixed_pattern(n, rule), exact=exact))
    if rule == "CONDRL":
        r = rooted(_order_product(cs, i, *_fixed_pattern(n, "CONDR"), exact=exact))
        l = rooted(_order_product(cs, i, *_fixed_pattern(n, "CONDL"), exact=exact))
        return (r + l) / 2
    if rule == "CONDALL":
        acc = Fraction(0) if exact and root == 1 else 0.0
        for signature, weight in ordering_weights(n):
            lefts = [False] + list(signature)
            rights = [not s for s in signature] + [False]
            value = rooted(_order_product(cs, i, lefts, rights, exact=exact))
            acc += weight * value if exact and root == 1 else float(weight) * value
        return acc
    raise ValueError(f"unknown rule {rule!r}")


def condall_bruteforce(cs: CandidateSet, i: int, root=1, exact: bool = False):
    """CONDALL mass by explicit enumeration of all construction orders."""
    n = cs.candidates[i].n_segments
    values = []
    for order in itertools.permutations(range(n)):
        placed_at = {k: t for t, k in enumerate(order)}
        lefts = [k > 0 and placed_at[k - 1] < placed_at[k] for k in range(n)]
        rights = [k < n - 1 and placed_at[k + 1] < placed_at[k] for k in range(n)]
        v = _order_product(cs, i, lefts, rights, exact=exact)
        values.append(v if exact and root == 1 else apply_root(float(v), root, n))
    return sum(values) / len(values)


def candidate_masses(rule: str, cs: CandidateSet, root=1, exact: bool = False) -> list:
    if rule not in COND_RULES:
        raise ValueError(f"unknown rule {rule!r}")
    return [candidate_mass(cs, i, rule, root, exact) for i in range(len(cs))]


def posterior(cs: CandidateSet, masses: Sequence, collate: bool = True) -> dict[str, object]:
    """Sum (or, without collation, maximize) masses per assembled pronunciation."""
    out: dict[str, object] = {}
    for y, m in zip(cs.assembled, masses):
        if y not in out:
            out[y] = m
        elif collate:
            out[y] = out[y] + m
        elif m > out[y]:
            out[y] = m
    return out


def prob_score(candidates, view=None, root=1, exact: bool = False) -> dict[str, object]:
    """Collated products of estimated probabilities (non-overlapping segments)."""
    cs = _as_candidate_set(candidates, view)
    return posterior(cs, candidate_masses("PROD", cs, root, exact))


def cond_score(rule: str, candidates, view=None, root=1, exact: bool = False) -> dict[str, object]:
    cs = _as_candidate_set(candidates, view)
    return posterior(cs, candidate_masses(rule, cs, root, exact))


def _as_candidate_set(candidates, view) -> CandidateSet:
    if isinstance(candidates, CandidateSet):
        return candidates
    candidates = list(candidates)
    if not candidates:
        raise NoPronunciation("no candidates")
    from .strategies import _as_set
    return _as_set(candidates, view)


def decide(scores: dict[str, object], rtol: float = TIE_RTOL):
    """Rank pronunciations by score; return ``(ranking, tie_set)``.

    ``ranking`` is a list of ``(pronunciation, score)`` best first (equal
    scores listed alphabetically); ``tie_set`` holds every pronunciation
    sharing the best score.  Pronunciations are returned as assembled,
    see :func:`surface` for the emitted form.
    """
    if not scores:
        raise NoPronunciation("empty posterior")
    ranking = sorted(scores.items(), key=lambda kv: (_neg(kv[1]), kv[0]))
    best = ranking[0][1]
    ties = [y for y, s in ranking if same_score(s, best, rtol) or same_score(best, s, rtol)]
    return ranking, ties


def _neg(v):
    return tuple(-x for x in v) if isinstance(v, tuple) else -v


def surface(pron: str) -> str:
    """Emitted form of an assembled pronunciation: no nulls, no padding."""
    return unescape(strip_symbols(pron))


def explain(cs: CandidateSet, rule: str) -> str:
    """Per-candidate factor breakdown in exact rationals."""
    lines = []
    patterns = {"PROD": ["PROD"], "CONDR": ["CONDR"], "CONDL": ["CONDL"], "CONDF": ["CONDF"],
                "CONDRL": ["CONDR", "CONDL"], "CONDALL": ["CONDR", "CONDL"]}[rule]
    for i, cand in enumerate(cs.candidates):
        seg = " + ".join(unescape(p) for p in cand.pieces)
        lines.append(f"{seg}  ->  {unescape(cs.assembled[i])}")
        n = cand.n_segments
        for name in patterns:
            lefts, rights = _fixed_pattern(n, name)
            fs = [segment_factor(cs, i, k, lefts[k], rights[k], exact=True) for k in range(n)]
            prod = math.prod(fs, start=Fraction(1))
            # factors listed in construction order
            shown = fs[::-1] if name == "CONDL" else fs
            lines.append(f"    {name}: " + "".join(f"({f})" for f in shown) + f" = {prod} ~ {float(prod):.4g}")
        if rule in ("CONDRL", "CONDALL"):
            m = candidate_mass(cs, i, rule, exact=True)
            lines.append(f"    {rule}: {m} ~ {float(m):.4g}")
    post = posterior(cs, candidate_masses(rule, cs, exact=True))
    ranking, _ = decide(post)
    lines.append("collated:")
    for y, m in ranking:
        lines.append(f"    {surface(y):<16} {unescape(y):<18} {m} ~ {float(m):.6g}")
    return "\n".join(lines)


def factor_trace(cs: CandidateSet, i: int, rule: str) -> list[Fraction]:
    """Exact per-segment factors of candidate ``i`` for a single-order rule."""
    n = cs.candidates[i].n_segments
    lefts, rights = _fixed_pattern(n, rule)
    return [segment_factor(cs, i, k, lefts[k], rights[k], exact=True) for k in range(n)]


def find_candidate(cs: CandidateSet, pieces: Sequence[str], prons: Sequence[str] | None = None) -> int:
    for i, c in enumerate(cs.candidates):
        if tuple(c.pieces) == tuple(pieces) and (prons is None or tuple(c.prons) == tuple(prons)):
            return i
    raise KeyError((tuple(pieces), prons))


__all__ = [
    "COND_RULES", "Candidate", "candidate_mass", "candidate_masses", "cond_score",
    "condall_bruteforce", "decide", "explain", "factor_trace", "ordering_weights",
    "posterior", "prob_score", "segment_factor", "surface",
]
