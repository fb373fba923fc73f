"""Aligned lexicon handling: NETtalk parsing, filtering and direction swap.

Entries are stored boundary-padded (``#word#`` aligned with ``#pron#``).
NETtalk itself uses ``#`` as an interior phoneme (the /gz/ of *auxiliary*),
so interior ``#`` symbols are escaped to :data:`ESCAPED_HASH` on parse and
restored on output.
"""

from __future__ import annotations

import enum
import hashlib
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

log = logging.getLogger(__name__)

BOUNDARY = "#"
NULL = "-"
ESCAPED_HASH = "§"

HOMOPHONE_RULES = ("keep_first", "drop_group")


class CorpusError(ValueError):
    pass


class Direction(str, enum.Enum):
    TTS = "tts"
    STT = "stt"


@dataclass(frozen=True)
class AlignedEntry:
    """One word/pronunciation pair, one output symbol per input symbol.

    Both strings carry the boundary symbol at each end.
    """

    letters: str
    phonemes: str

    def __post_init__(self):
        if len(self.letters) != len(self.phonemes):
            raise CorpusError(f"unaligned entry {self.letters!r} / {self.phonemes!r}")
        for s in (self.letters, self.phonemes):
            if len(s) < 2 or s[0] != BOUNDARY or s[-1] != BOUNDARY:
                raise CorpusError(f"entry {s!r} is not boundary padded")
            if BOUNDARY in s[1:-1]:
                raise CorpusError(f"boundary symbol inside {s!r}")

    @classmethod
    def from_strings(cls, word: str, pron: str) -> "AlignedEntry":
        return cls(pad(escape(word)), pad(escape(pron)))

    @property
    def word(self) -> str:
        return self.letters[1:-1]

    @property
    def pronunciation(self) -> str:
        return self.phonemes[1:-1]

    def __len__(self) -> int:
        return len(self.letters)


def escape(s: str) -> str:
    return s.replace(BOUNDARY, ESCAPED_HASH)


def unescape(s: str) -> str:
    return s.replace(ESCAPED_HASH, BOUNDARY)


def pad(s: str) -> str:
    return BOUNDARY + s + BOUNDARY


def strip_symbols(s: str) -> str:
    """Remove null phonemes and boundary padding from an output string."""
    return s.replace(NULL, "").replace(BOUNDARY, "")


def parse_nettalk(raw: TextIO | Iterable[str], rejects: list[str] | None = None) -> list[AlignedEntry]:
    """Parse NETtalk-format lines (``word pron [stress flag]``).

    Malformed lines are logged and skipped (and appended to ``rejects``
    when given); an input with no valid entry at all raises CorpusError.
    """
    entries = []
    for lineno, line in enumerate(raw, 1):
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        fields = line.split()
        if len(fields) < 2:
            _reject(rejects, f"line {lineno}: expected word and pronunciation: {line!r}")
            continue
        word, pron = fields[0].lower(), fields[1]
        if len(word) != len(pron):
            _reject(rejects, f"line {lineno}: length mismatch {len(word)} vs {len(pron)}: {line!r}")
            continue
        entries.append(AlignedEntry.from_strings(word, pron))
    if not entries:
        raise CorpusError("no valid entries in corpus input")
    return entries


def _reject(rejects: list[str] | None, msg: str) -> None:
    log.warning(msg)
    if rejects is not None:
        rejects.append(msg)


def read_nettalk(path) -> list[AlignedEntry]:
    with open(path, encoding="latin-1") as fh:
        return parse_nettalk(fh)


def serialize_nettalk(entries: Iterable[AlignedEntry]) -> Iterator[str]:
    for e in entries:
        yield f"{unescape(e.word)}\t{unescape(e.pronunciation)}\n"


def swap_direction(entry: AlignedEntry) -> AlignedEntry:
    return AlignedEntry(entry.phonemes, entry.letters)


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[AlignedEntry, ...]
    direction: Direction = Direction.TTS
    homophone_rule: str = "keep_first"

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def alphabet(self) -> frozenset[str]:
        return frozenset(c for e in self.entries for c in e.word)

    def fingerprint(self) -> str:
        """Short content hash of the oriented, filtered entries."""
        h = hashlib.sha256(self.direction.value.encode())
        for e in self.entries:
            h.update(f"\n{e.letters}\t{e.phonemes}".encode())
        return h.hexdigest()[:16]


def filter_corpus(
    entries: Iterable[AlignedEntry],
    direction: Direction | str = Direction.TTS,
    rule: str = "keep_first",
    compare_stripped: bool = False,
) -> Lexicon:
    """Orient entries for ``direction`` and drop one-letter and clashing words.

    Plain entries are given in TTS orientation; a Lexicon is refiltered in
    its own orientation. Two entries clash when their
    output strings are identical: pronunciations for TTS (homophones),
    spellings for STT (homographs). ``rule`` decides the fate of a clash
    group: ``keep_first`` keeps its first member in input order,
    ``drop_group`` removes all members. With ``compare_stripped`` null
    phonemes are ignored when comparing outputs.
    """
    if rule not in HOMOPHONE_RULES:
        raise ValueError(f"unknown homophone rule {rule!r}")
    if isinstance(entries, Lexicon):
        # already oriented
        direction = entries.direction
        oriented = list(entries.entries)
    else:
        direction = Direction(direction)
        oriented = [e if direction is Direction.TTS else swap_direction(e) for e in entries]
    oriented = [e for e in oriented if len(e) - 2 > 1]

    def key(e):
        return e.pronunciation.replace(NULL, "") if compare_stripped else e.pronunciation

    groups: dict[str, int] = {}
    for e in oriented:
        groups[key(e)] = groups.get(key(e), 0) + 1
    kept, seen = [], set()
    for e in oriented:
        k = key(e)
        if groups[k] > 1 and (rule == "drop_group" or k in seen):
            continue
        seen.add(k)
        kept.append(e)
    if not kept:
        log.warning("corpus filter left no entries")
    return Lexicon(tuple(kept), direction, rule)


def load_lexicon(path, direction: Direction | str = Direction.TTS, rule: str = "keep_first",
                 compare_stripped: bool = False) -> Lexicon:
    return filter_corpus(read_nettalk(path), direction, rule, compare_stripped)
