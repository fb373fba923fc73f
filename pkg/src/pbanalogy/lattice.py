"""Segmentation of a padded word into indexed segments, and candidate expansion.

Two lattice shapes are supported: segments overlapping by one letter (whose
phoneme must agree across the overlap) and non-overlapping segments meeting
at letter junctures.  Only segmentations with the minimum number of segments
are kept.  In overlap mode a segmentation counts as feasible only if at least
one overlap-consistent pronunciation exists for it, so the search runs on
(position, phoneme) nodes rather than on positions alone.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from functools import cached_property

from .index import IndexView

log = logging.getLogger(__name__)

FALLBACK_POLICIES = ("all", "leftmost", "none")


class NoPronunciation(Exception):
    """No feasible segmentation exists, even with the silence fallback."""


class Mode(str, enum.Enum):
    OVERLAP = "overlap1"
    NONOVERLAP = "nonoverlap"


@dataclass(frozen=True, order=True)
class Segmentation:
    segments: tuple[tuple[int, int], ...]
    mode: Mode = Mode.OVERLAP
    # segment index k such that segments k and k+1 meet without overlap
    fallback_junction: int | None = None

    def __len__(self) -> int:
        return len(self.segments)

    @cached_property
    def overlaps(self) -> tuple[bool, ...]:
        """For each adjacent pair of segments, whether they share a letter."""
        return tuple(
            self.mode is Mode.OVERLAP and k != self.fallback_junction
            for k in range(len(self.segments) - 1)
        )

    def pieces(self, word: str) -> tuple[str, ...]:
        return tuple(word[a:b + 1] for a, b in self.segments)

    def lengths(self) -> tuple[int, ...]:
        return tuple(b - a + 1 for a, b in self.segments)


@dataclass(frozen=True)
class Candidate:
    segmentation: Segmentation
    pieces: tuple[str, ...]
    prons: tuple[str, ...]

    @cached_property
    def assembled(self) -> str:
        out = [self.prons[0]]
        for y, ov in zip(self.prons[1:], self.segmentation.overlaps):
            out.append(y[1:] if ov else y)
        return "".join(out)

    @property
    def n_segments(self) -> int:
        return len(self.prons)


def _overlap_arcs(word: str, view: IndexView) -> dict[int, list[tuple[int, str, str]]]:
    """Arcs (end, first phoneme, last phoneme) by start position, segments of length >= 2."""
    L = len(word)
    arcs = {}
    for a in range(L - 1):
        out = set()
        for b in range(a + 1, L):
            dist = view.lookup(word[a:b + 1])
            if dist is None:
                # every longer string starting at a is absent as well
                break
            for y in dist.counts:
                out.add((b, y[0], y[-1]))
        arcs[a] = sorted(out)
    return arcs


def _overlap_segmentations(word: str, view: IndexView, allow_junction: bool):
    """Minimal segmentations on the (position, phoneme, junction-used) graph.

    A node ``(pos, ph, j)`` means a segment boundary at ``pos`` whose letter is
    pronounced ``ph``; ``ph is None`` marks the free start right after the
    single zero-overlap junction.  Returns ``(n_star, segmentations)`` or
    ``(None, [])``.
    """
    L = len(word)
    arcs = _overlap_arcs(word, view)
    start = (0, word[0], 0)
    end_j = 1 if allow_junction else 0
    end = (L - 1, word[-1], end_j)

    def successors(node):
        pos, ph, j = node
        for b, first, last in arcs.get(pos, ()):
            if ph is None or first == ph:
                yield (b, last, j), (pos, b)
        if allow_junction and j == 0 and ph is not None and 0 < pos < L - 2:
            yield (pos + 1, None, 1), None

    # forward pass; junction moves cost nothing and always advance position
    dist = {start: 0}
    by_pos: dict[int, set] = {0: {start}}
    for pos in range(L):
        for node in sorted(by_pos.get(pos, ()), key=_node_key):
            d = dist[node]
            for nxt, seg in successors(node):
                nd = d + (seg is not None)
                if nd < dist.get(nxt, 1 << 30):
                    dist[nxt] = nd
                    by_pos.setdefault(nxt[0], set()).add(nxt)
    if end not in dist:
        return None, []
    n_star = dist[end]

    memo: dict = {}

    def paths(node, remaining):
        key = (node, remaining)
        if key in memo:
            return memo[key]
        if node == end:
            res = [((), None)] if remaining == 0 else []
        else:
            res = []
            for nxt, seg in successors(node):
                cost = seg is not None
                if remaining - cost < 0 or dist.get(nxt, 1 << 30) != dist[node] + cost:
                    continue
                for tail, junction in paths(nxt, remaining - cost):
                    if seg is None:
                        res.append((tail, 0))
                    else:
                        res.append(((seg,) + tail, None if junction is None else junction + 1))
            res = list(dict.fromkeys(res))
        memo[key] = res
        return res

    segs = set()
    for segments, before in paths(start, n_star):
        # ``before`` counts the segments preceding the junction
        k = None if before is None else before - 1
        segs.add(Segmentation(segments, Mode.OVERLAP, k))
    return n_star, sorted(segs, key=lambda s: (s.segments, s.fallback_junction or 0))


def _node_key(node):
    pos, ph, j = node
    return (pos, j, ph or "")


def _nonoverlap_segmentations(word: str, view: IndexView):
    L = len(word)
    ends: dict[int, list[int]] = {}
    for a in range(L):
        ends[a] = []
        for b in range(a, L):
            if view.lookup(word[a:b + 1]) is None:
                break
            ends[a].append(b)
    INF = 1 << 30
    # shortest number of segments from juncture i to the end
    rest = [INF] * (L + 1)
    rest[L] = 0
    for a in range(L - 1, -1, -1):
        for b in ends[a]:
            rest[a] = min(rest[a], rest[b + 1] + 1)
    if rest[0] >= INF:
        return None, []
    out = []

    def walk(a, acc):
        if a == L:
            out.append(Segmentation(tuple(acc), Mode.NONOVERLAP))
            return
        for b in ends[a]:
            if rest[b + 1] == rest[a] - 1:
                acc.append((a, b))
                walk(b + 1, acc)
                acc.pop()

    walk(0, [])
    return rest[0], out


def enumerate_segmentations(word: str, view: IndexView, mode: Mode | str = Mode.OVERLAP,
                            fallback: str = "all") -> list[Segmentation]:
    """All feasible segmentations of a padded word with the minimum segment count.

    In overlap mode, if no segmentation exists, one zero-overlap junction is
    allowed anywhere (``fallback="all"`` keeps every minimal placement,
    ``"leftmost"`` only the leftmost, ``"none"`` disables the fallback).
    Raises NoPronunciation when nothing is feasible.
    """
    mode = Mode(mode)
    if fallback not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {fallback!r}")
    if mode is Mode.NONOVERLAP:
        _, segs = _nonoverlap_segmentations(word, view)
    else:
        _, segs = _overlap_segmentations(word, view, allow_junction=False)
        if not segs and fallback != "none":
            _, segs = _overlap_segmentations(word, view, allow_junction=True)
            if segs and fallback == "leftmost":
                left = min(s.segments[s.fallback_junction][1] for s in segs)
                segs = [s for s in segs if s.segments[s.fallback_junction][1] == left]
    if not segs:
        raise NoPronunciation(word)
    return segs


def expand_candidates(word: str, segmentations, view: IndexView,
                      max_candidates: int | None = None) -> list[Candidate]:
    """Per-segment pronunciations of each segmentation, agreeing on overlaps."""
    out: list[Candidate] = []
    for seg in segmentations:
        pieces = seg.pieces(word)
        choices = []
        for p in pieces:
            dist = view.lookup(p)
            choices.append(sorted(dist.counts) if dist is not None else [])
        overlaps = seg.overlaps
        n = len(pieces)
        acc: list[str] = []

        def rec(k):
            if k == n:
                out.append(Candidate(seg, pieces, tuple(acc)))
                return
            need = acc[-1][-1] if k and overlaps[k - 1] else None
            for y in choices[k]:
                if need is not None and y[0] != need:
                    continue
                acc.append(y)
                rec(k + 1)
                acc.pop()

        rec(0)
        if max_candidates is not None and len(out) > max_candidates:
            log.warning("candidate cap %d exceeded for %r; truncating", max_candidates, word)
            return out[:max_candidates]
    return out


def generate_candidates(word: str, view: IndexView, mode: Mode | str = Mode.OVERLAP,
                        fallback: str = "all", max_candidates: int | None = None) -> list[Candidate]:
    segs = enumerate_segmentations(word, view, mode, fallback)
    cands = expand_candidates(word, segs, view, max_candidates)
    if not cands:
        raise NoPronunciation(word)
    return cands
