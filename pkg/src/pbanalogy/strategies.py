"""Classic secondary scoring strategies and their rank-based combination.

Component names follow the usual listing order, which also defines the
bit positions of combination strings such as ``00101000001``:

    PF SDPS FSP NDS WL WPF SF SL SLN SSPF PFSP

Each component scores every candidate; ranks are 1-based with ties sharing
the better rank, and a candidate ranked ``r`` among ``N`` earns
``N - r + 1`` points.  Combined scores are products (or sums) of points.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .index import IndexView
from .lattice import Candidate

COMPONENTS = ("PF", "SDPS", "FSP", "NDS", "WL", "WPF", "SF", "SL", "SLN", "SSPF", "PFSP")
MINIMIZED = frozenset({"SDPS", "NDS"})
# components whose scores are inexact floats and need tolerant tie detection
FLOAT_SCORED = frozenset({"PFSP"})

SINGLE_RULES = ("TP", "WTP", "PRODUCT", "PROB", "PROD",
                "CONDR", "CONDL", "CONDRL", "CONDALL", "CONDF", "UNIT")
FACTORS = ("abs", "norm", "est")
COMBINATIONS = ("product", "sum")

TIE_RTOL = 1e-9


class CandidateSet:
    """Candidates of one word together with their per-arc statistics."""

    def __init__(self, word: str, candidates: Sequence[Candidate], view: IndexView):
        if not candidates:
            raise ValueError("empty candidate list")
        self.word = word
        self.candidates = list(candidates)
        self.view = view

    def __len__(self) -> int:
        return len(self.candidates)

    @cached_property
    def dists(self):
        lookup = self.view.lookup
        return [tuple(lookup(p) for p in c.pieces) for c in self.candidates]

    @cached_property
    def freqs(self) -> list[tuple[int, ...]]:
        """Arc frequencies: raw count of each (segment, pronunciation) pair."""
        return [tuple(d.counts[y] for d, y in zip(ds, c.prons))
                for ds, c in zip(self.dists, self.candidates)]

    @cached_property
    def assembled(self) -> list[str]:
        return [c.assembled for c in self.candidates]

    @cached_property
    def classes(self) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {}
        for i, y in enumerate(self.assembled):
            out.setdefault(y, []).append(i)
        return out

    @cached_property
    def position_counts(self) -> list[Counter]:
        return [Counter(col) for col in zip(*self.assembled)]


# -- components ---------------------------------------------------------------

def _pf(cs):
    return [math.prod(f) for f in cs.freqs]


def _sdps(cs):
    out = []
    for c in cs.candidates:
        lengths = c.segmentation.lengths()
        n = len(lengths)
        s1 = sum(lengths)
        s2 = sum(v * v for v in lengths)
        # population standard deviation from exact integer moments
        out.append(math.sqrt(n * s2 - s1 * s1) / n)
    return out


def _fsp(cs):
    size = {y: len(ix) for y, ix in cs.classes.items()}
    return [size[y] for y in cs.assembled]


def _nds(cs):
    N = len(cs)
    cols = cs.position_counts
    return [sum(N - cols[i][ph] for i, ph in enumerate(y)) for y in cs.assembled]


def _wl(cs):
    return [min(f) for f in cs.freqs]


def _wpf(cs):
    out = []
    for f, ds in zip(cs.freqs, cs.dists):
        out.append(Fraction(math.prod(f), math.prod(len(d) for d in ds)))
    return out


def _sf(cs):
    return [f[0] for f in cs.freqs]


def _sl(cs):
    return [f[-1] for f in cs.freqs]


def _sln(cs):
    return [(max(c.segmentation.lengths()), max(f)) for c, f in zip(cs.candidates, cs.freqs)]


def _sspf(cs):
    cols = cs.position_counts
    last = len(cs.word) - 1
    out = []
    for c, f, y in zip(cs.candidates, cs.freqs, cs.assembled):
        total = 0
        for (a, b), fk in zip(c.segmentation.segments, f):
            same = sum(cols[i][y[i]] - 1 for i in range(max(a, 1), min(b, last - 1) + 1))
            total += same * fk
        out.append(total)
    return out


def _pfsp(cs):
    return collate_per_candidate(cs, [apply_root(math.prod(f), "n", len(f)) for f in cs.freqs])


_COMPONENT_FUNCS = {
    "PF": _pf, "SDPS": _sdps, "FSP": _fsp, "NDS": _nds, "WL": _wl, "WPF": _wpf,
    "SF": _sf, "SL": _sl, "SLN": _sln, "SSPF": _sspf, "PFSP": _pfsp,
}


def score_component(name: str, candidates, view: IndexView | None = None, word: str | None = None):
    """Raw scores of one component for every candidate.

    ``candidates`` is either a :class:`CandidateSet` or a candidate list
    (then ``view`` is required).  Whether larger is better is given by
    :func:`maximized`.
    """
    cs = _as_set(candidates, view, word)
    return _COMPONENT_FUNCS[name](cs)


def maximized(name: str) -> bool:
    return name not in MINIMIZED


def _as_set(candidates, view, word=None) -> CandidateSet:
    if isinstance(candidates, CandidateSet):
        return candidates
    if view is None:
        raise ValueError("a view is needed to score a plain candidate list")
    candidates = list(candidates)
    if not candidates:
        raise ValueError("empty candidate list")
    if word is None:
        word = _reassemble_word(candidates[0])
    return CandidateSet(word, candidates, view)


def _reassemble_word(c: Candidate) -> str:
    out = [c.pieces[0]]
    for p, ov in zip(c.pieces[1:], c.segmentation.overlaps):
        out.append(p[1:] if ov else p)
    return "".join(out)


# -- ranking --------------------------------------------------------------------

def same_score(a, b, rtol: float = 0.0) -> bool:
    if rtol and isinstance(a, float):
        return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0)
    return a == b


def rank(scores: Sequence, higher_is_better: bool = True, rtol: float = 0.0) -> list[int]:
    """1-based competition ranks; tied scores share the better rank."""
    order = sorted(range(len(scores)), key=lambda i: scores[i], reverse=higher_is_better)
    ranks = [0] * len(scores)
    leader, r = None, 0
    for pos, i in enumerate(order):
        s = scores[i]
        if pos == 0 or not same_score(s, leader, rtol):
            leader, r = s, pos + 1
        ranks[i] = r
    return ranks


def component_ranks(name: str, cs: CandidateSet) -> list[int]:
    scores = _COMPONENT_FUNCS[name](cs)
    return rank(scores, maximized(name), TIE_RTOL if name in FLOAT_SCORED else 0.0)


def points(ranks: Sequence[int]) -> list[int]:
    n = len(ranks)
    return [n - r + 1 for r in ranks]


def combine_ranks(per_component: Sequence[Sequence[int]], rule: str = "product") -> list[int]:
    """Combine component rankings into one integer score per candidate."""
    if rule not in COMBINATIONS:
        raise ValueError(f"unknown combination rule {rule!r}")
    pts = [points(r) for r in per_component]
    if rule == "product":
        return [math.prod(col) for col in zip(*pts)]
    return [sum(col) for col in zip(*pts)]


# -- products, roots, collation -----------------------------------------------

def apply_root(score, root_degree=1, n_segments: int | None = None):
    """``score ** (1/d)``; ``d = n_segments`` when ``root_degree == "n"``."""
    if score < 0:
        raise ValueError("root of a negative score")
    d = n_segments if root_degree == "n" else root_degree
    if d is None or d < 1:
        raise ValueError(f"invalid root degree {root_degree!r}")
    if d == 1:
        return score
    return float(score) ** (1.0 / d)


def collate_per_candidate(cs: CandidateSet, values: Sequence) -> list:
    """Replace each candidate's value by the sum over its pronunciation class."""
    sums = collate(cs, values)
    return [sums[y] for y in cs.assembled]


def collate(cs: CandidateSet, values: Sequence) -> dict[str, object]:
    sums: dict[str, object] = {}
    for y, v in zip(cs.assembled, values):
        sums[y] = sums[y] + v if y in sums else v
    return sums


def best_per_pronunciation(cs: CandidateSet, values: Sequence) -> dict[str, object]:
    out: dict[str, object] = {}
    for y, v in zip(cs.assembled, values):
        if y not in out or v > out[y]:
            out[y] = v
    return out


def factor_products(cs: CandidateSet, factor: str = "abs", root_degree=1) -> list:
    """Per-candidate product of absolute frequencies, normalized frequencies or
    estimated probabilities, with the root taken per candidate."""
    out = []
    for f, ds in zip(cs.freqs, cs.dists):
        if factor == "abs":
            p = math.prod(f)
        elif factor == "norm":
            p = math.prod(fk / d.total for fk, d in zip(f, ds))
        elif factor == "est":
            p = math.prod(fk / (d.total + 1) for fk, d in zip(f, ds))
        else:
            raise ValueError(f"unknown factor {factor!r}")
        out.append(apply_root(p, root_degree, len(f)))
    return out


def tp_wtp_score(candidates, view: IndexView | None = None, weighted: bool = False) -> dict[str, object]:
    """Total product over shortest paths per pronunciation (optionally
    weighted by the inverse product of segment lengths)."""
    cs = _as_set(candidates, view)
    if weighted:
        values = [Fraction(math.prod(f), math.prod(c.segmentation.lengths()))
                  for f, c in zip(cs.freqs, cs.candidates)]
    else:
        values = [math.prod(f) for f in cs.freqs]
    return collate(cs, values)


# -- strategy parsing ---------------------------------------------------------

@dataclass(frozen=True)
class StrategySpec:
    components: tuple[str, ...]
    combination: str = "product"
    root: object = 1
    collate: bool = True
    factor: str = "est"
    # display name ("PROB", or a bitstring as typed); does not affect scoring
    alias: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.components:
            raise ValueError("strategy needs at least one component")
        comps = set(self.components)
        if not comps <= set(COMPONENTS):
            if len(self.components) != 1 or self.components[0] not in SINGLE_RULES:
                raise ValueError(f"invalid strategy components {self.components!r}")
        if self.combination not in COMBINATIONS:
            raise ValueError(f"unknown combination rule {self.combination!r}")
        if self.root != "n" and not (isinstance(self.root, (int, float, Fraction)) and self.root >= 1):
            raise ValueError(f"root degree must be >= 1 or 'n', got {self.root!r}")
        if self.factor not in FACTORS:
            raise ValueError(f"unknown factor {self.factor!r}")

    @property
    def is_classic(self) -> bool:
        return self.components[0] in COMPONENTS

    @property
    def rule(self) -> str:
        return self.components[0]

    @property
    def name(self) -> str:
        if self.is_classic:
            name = self.alias or bitstring(self.components)
            return name + ":sum" if self.combination == "sum" else name
        name = self.alias or (self.rule if self.rule != "PRODUCT" else f"PRODUCT:{self.factor}")
        if not self.collate:
            name += ":nc"
        return name if self.root == 1 else f"{name}^1/{self.root}"

    def with_root(self, root) -> "StrategySpec":
        return replace(self, root=root)


def bitstring(components: Sequence[str], width: int | None = None) -> str:
    idx = [COMPONENTS.index(c) for c in components]
    if width is None:
        width = 5 if max(idx) < 5 else 11
    return "".join("1" if i in idx else "0" for i in range(width))


def parse_strategy(text: str, root=1, collate: bool = True, combination: str = "product") -> StrategySpec:
    """Parse a bitstring (5 or 11 digits), a component or rule name, or
    ``PRODUCT:<abs|norm|est>``."""
    text = text.strip()
    if text and set(text) <= {"0", "1"}:
        if len(text) not in (5, 11):
            raise ValueError(f"strategy bitstring must have 5 or 11 digits: {text!r}")
        comps = tuple(c for c, bit in zip(COMPONENTS, text) if bit == "1")
        if not comps:
            raise ValueError("strategy bitstring selects no component")
        return StrategySpec(comps, combination=combination, root=root, collate=collate, alias=text)
    upper = text.upper()
    if upper in COMPONENTS:
        return StrategySpec((upper,), combination=combination, root=root, collate=collate)
    if upper.startswith("PRODUCT"):
        _, _, factor = upper.partition(":")
        return StrategySpec(("PRODUCT",), root=root, collate=collate, factor=(factor or "est").lower())
    if upper in ("PROB", "PROD"):
        return StrategySpec(("PRODUCT",), root=root, collate=collate, factor="est", alias=upper)
    if upper == "TP":
        return StrategySpec(("TP",), root=root, collate=True, factor="abs")
    if upper in SINGLE_RULES:
        return StrategySpec((upper,), root=root, collate=collate)
    raise ValueError(f"unknown strategy {text!r}")
