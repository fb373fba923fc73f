"""Full-matching substring index with a leave-one-out overlay.

Every substring of every padded entry is counted once per occurrence,
together with the aligned pronunciation of that substring.  Probability
helpers return exact ``(numerator, denominator)`` pairs so callers can pick
floats for speed or :class:`fractions.Fraction` for explanations.
"""

from __future__ import annotations

import hashlib
import pickle
from collections import Counter
from fractions import Fraction
from typing import Iterable, Mapping, Protocol

from .corpus import AlignedEntry

FORMAT_MAGIC = b"PBAIDX"
FORMAT_VERSION = 1


class PronunciationDistribution:
    """Pronunciation counts for one letter string."""

    __slots__ = ("counts", "total", "_left", "_right", "_both", "_agree")

    def __init__(self, counts: Mapping[str, int]):
        self.counts = counts
        self.total = sum(counts.values())
        self._left = self._right = self._both = None
        self._agree: dict = {}

    def __len__(self) -> int:
        return len(self.counts)

    def __repr__(self) -> str:
        return f"PronunciationDistribution({dict(self.counts)!r})"

    def count(self, y: str) -> int:
        return self.counts.get(y, 0)

    def estimate(self, y: str) -> tuple[int, int]:
        return self.counts.get(y, 0), self.total + 1

    def normalized(self, y: str) -> tuple[int, int]:
        return self.counts.get(y, 0), self.total

    def agreeing_mass(self, fixed: Mapping[int, str]) -> int:
        """Total count of pronunciations matching every fixed position."""
        if not fixed:
            return self.total
        if len(fixed) == 1:
            ((pos, ph),) = fixed.items()
            if pos == 0:
                if self._left is None:
                    self._left = _marginal(self.counts, lambda y: y[0])
                return self._left.get(ph, 0)
            if pos == -1 or pos == self._width() - 1:
                if self._right is None:
                    self._right = _marginal(self.counts, lambda y: y[-1])
                return self._right.get(ph, 0)
        elif len(fixed) == 2 and 0 in fixed:
            last = self._width() - 1
            if last in fixed or -1 in fixed:
                if self._both is None:
                    self._both = _marginal(self.counts, lambda y: (y[0], y[-1]))
                return self._both.get((fixed[0], fixed.get(last, fixed.get(-1))), 0)
        key = tuple(sorted(fixed.items()))
        mass = self._agree.get(key)
        if mass is None:
            mass = sum(c for y, c in self.counts.items() if all(y[i] == p for i, p in key))
            self._agree[key] = mass
        return mass

    def conditional(self, y: str, fixed: Mapping[int, str]) -> tuple[int, int]:
        """Estimated probability of ``y`` given phonemes fixed at some positions.

        Zero when ``y`` disagrees with a fixed phoneme, one when the fixed
        positions cover the whole string, otherwise the count of ``y`` over
        the agreeing mass plus one.
        """
        width = len(y)
        for pos, ph in fixed.items():
            if y[pos] != ph:
                return 0, 1
        covered = {p % width for p in fixed}
        if len(covered) == width:
            return 1, 1
        return self.counts.get(y, 0), self.agreeing_mass(fixed) + 1

    def _width(self) -> int:
        return len(next(iter(self.counts)))


def _marginal(counts, key) -> dict:
    out: dict = {}
    for y, c in counts.items():
        k = key(y)
        out[k] = out.get(k, 0) + c
    return out


class IndexView(Protocol):
    def lookup(self, x: str) -> PronunciationDistribution | None: ...


def substrings(entry: AlignedEntry, max_len: int | None = None):
    """Yield every (letters, phonemes) substring of a padded entry."""
    x, y = entry.letters, entry.phonemes
    n = len(x)
    for a in range(n):
        stop = n if max_len is None else min(n, a + max_len)
        for b in range(a + 1, stop + 1):
            yield x[a:b], y[a:b]


class SubstringIndex:
    """Letter substring -> pronunciation counts over a whole lexicon.

    ``max_len`` caps the indexed substring length; it exists only as a
    performance knob and must stay ``None`` for reference evaluations.
    """

    def __init__(self, table: dict[str, dict[str, int]], max_len: int | None = None,
                 meta: dict | None = None):
        self.table = table
        self.max_len = max_len
        # free-form provenance (e.g. lexicon fingerprint), persisted by save()
        self.meta = dict(meta or {})

    @classmethod
    def build(cls, entries: Iterable[AlignedEntry], max_len: int | None = None) -> "SubstringIndex":
        table: dict[str, dict[str, int]] = {}
        for entry in entries:
            for x, y in substrings(entry, max_len):
                d = table.get(x)
                if d is None:
                    table[x] = {y: 1}
                else:
                    d[y] = d.get(y, 0) + 1
        if not table:
            raise ValueError("cannot build an index from an empty lexicon")
        return cls(table, max_len)

    @classmethod
    def from_distributions(cls, table: Mapping[str, Mapping[str, int]]) -> "SubstringIndex":
        return cls({x: dict(d) for x, d in table.items()})

    def __len__(self) -> int:
        return len(self.table)

    def __contains__(self, x: str) -> bool:
        return x in self.table

    def lookup(self, x: str) -> PronunciationDistribution | None:
        counts = self.table.get(x)
        return None if counts is None else PronunciationDistribution(counts)

    def without(self, entry: AlignedEntry) -> "LeaveOneOutView":
        return LeaveOneOutView(self, entry)

    def view(self) -> "CachedView":
        return CachedView(self)

    def save(self, path) -> None:
        payload = pickle.dumps(
            {"version": FORMAT_VERSION, "max_len": self.max_len, "meta": self.meta,
             "table": self.table},
            protocol=pickle.HIGHEST_PROTOCOL,
        )
        digest = hashlib.sha256(payload).hexdigest().encode()
        with open(path, "wb") as fh:
            fh.write(FORMAT_MAGIC + b"%d\n" % FORMAT_VERSION + digest + b"\n" + payload)

    @classmethod
    def load(cls, path) -> "SubstringIndex":
        with open(path, "rb") as fh:
            header = fh.readline()
            digest = fh.readline().strip()
            payload = fh.read()
        if not header.startswith(FORMAT_MAGIC):
            raise ValueError(f"{path}: not an index file")
        if int(header[len(FORMAT_MAGIC):]) != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported index version {header!r}")
        if hashlib.sha256(payload).hexdigest().encode() != digest:
            raise ValueError(f"{path}: checksum mismatch")
        data = pickle.loads(payload)
        return cls(data["table"], data["max_len"], data.get("meta"))


class CachedView:
    """Read-through view over the whole index, memoizing distributions."""

    def __init__(self, base: SubstringIndex):
        self.base = base
        self._cache: dict[str, PronunciationDistribution | None] = {}

    def lookup(self, x: str) -> PronunciationDistribution | None:
        try:
            return self._cache[x]
        except KeyError:
            dist = self._cache[x] = self.base.lookup(x)
            return dist


class LeaveOneOutView(CachedView):
    """The base index with one entry's own substring counts subtracted."""

    def __init__(self, base: SubstringIndex, excluded: AlignedEntry):
        super().__init__(base)
        self.excluded = excluded
        delta: dict[str, Counter] = {}
        for x, y in substrings(excluded, base.max_len):
            delta.setdefault(x, Counter())[y] += 1
        self.delta = delta

    def lookup(self, x: str) -> PronunciationDistribution | None:
        try:
            return self._cache[x]
        except KeyError:
            pass
        counts = self.base.table.get(x)
        sub = self.delta.get(x)
        if counts is not None and sub:
            counts = {y: c - sub.get(y, 0) for y, c in counts.items() if c > sub.get(y, 0)}
        dist = self._cache[x] = PronunciationDistribution(counts) if counts else None
        return dist


def estimated_probability(view: IndexView, x: str, y: str) -> Fraction:
    """count(x, y) / (total(x) + 1); zero for an unseen string or pronunciation."""
    if not x:
        raise ValueError("empty letter string")
    dist = view.lookup(x)
    if dist is None:
        return Fraction(0)
    return Fraction(*dist.estimate(y))


def conditional_probability(view: IndexView, x: str, y: str, fixed: Mapping[int, str]) -> Fraction:
    dist = view.lookup(x)
    for pos, ph in fixed.items():
        if y[pos] != ph:
            return Fraction(0)
    if len({p % len(y) for p in fixed}) == len(y):
        return Fraction(1)
    if dist is None:
        return Fraction(0)
    return Fraction(*dist.conditional(y, fixed))
