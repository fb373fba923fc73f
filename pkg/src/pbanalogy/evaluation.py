"""Leave-one-out evaluation with fractional tie credit.

Each word is pronounced from an index view that excludes it.  Nulls and
boundary symbols are stripped from both the output and the reference.  When
several pronunciations share the best score, the word earns the fraction of
them that are correct, and its phoneme credit is the mean over them of
``max(0, 1 - levenshtein / len(reference))``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from rapidfuzz.distance import Levenshtein

from . import __version__
from .corpus import AlignedEntry, Lexicon, strip_symbols, unescape
from .decision import pronunciation_scores
from .index import SubstringIndex
from .lattice import Mode, NoPronunciation, generate_candidates
from .probscore import decide
from .strategies import COMPONENTS, CandidateSet, StrategySpec, component_ranks, points

log = logging.getLogger(__name__)

PHONE_AGGREGATIONS = ("perword", "corpus")
LOWER = StrategySpec(("UNIT",), alias="LOWER")
UPPER = "ORACLE"


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance (substitution, insertion, deletion)."""
    return Levenshtein.distance(a, b)


@dataclass
class WordResult:
    index: int
    word: str
    reference: str
    outputs: tuple[str, ...]
    tie_set_size: int
    correct_in_tie: int
    word_credit: Fraction
    phoneme_error: Fraction
    phoneme_credit: Fraction
    silenced: bool = False
    n_candidates: int = 0

    @property
    def reference_length(self) -> int:
        return len(self.reference)


def credit(index: int, entry: AlignedEntry, ties: Sequence[str], n_candidates: int = 0) -> WordResult:
    """Score a tie set of assembled pronunciations against the reference."""
    reference = strip_symbols(entry.phonemes)
    outputs = tuple(strip_symbols(y) for y in ties)
    if not outputs:
        return WordResult(index, entry.word, reference, (), 0, 0, Fraction(0),
                          Fraction(len(reference)), Fraction(0), silenced=True)
    n = len(outputs)
    dists = [levenshtein(o, reference) for o in outputs]
    correct = sum(d == 0 for d in dists)
    ref_len = len(reference)
    if ref_len:
        phon = sum(max(Fraction(0), 1 - Fraction(d, ref_len)) for d in dists) / n
    else:
        phon = Fraction(correct, n)
    return WordResult(index, entry.word, reference, outputs, n, correct, Fraction(correct, n),
                      Fraction(sum(dists), n), phon, n_candidates=n_candidates)


def oracle_scores(cs: CandidateSet, entry: AlignedEntry) -> dict[str, int]:
    """Negated edit distance to the reference: the best possible secondary heuristic."""
    reference = strip_symbols(entry.phonemes)
    return {y: -levenshtein(strip_symbols(y), reference) for y in cs.classes}


def score_word(entry: AlignedEntry, view, strategies, mode: Mode | str = Mode.OVERLAP,
               index: int = 0, fallback: str = "all", max_candidates: int | None = None):
    """Pronounce ``entry`` through ``view`` and credit the result.

    ``strategies`` may be a single spec (returns one WordResult) or a list
    (returns a list, candidates generated once).
    """
    single = not isinstance(strategies, (list, tuple))
    specs = [strategies] if single else list(strategies)
    try:
        cands = generate_candidates(entry.letters, view, mode, fallback, max_candidates)
    except NoPronunciation:
        out = [credit(index, entry, ()) for _ in specs]
        return out[0] if single else out
    cs = CandidateSet(entry.letters, cands, view)
    out = []
    for spec in specs:
        if spec == UPPER:
            scores = oracle_scores(cs, entry)
        else:
            scores = pronunciation_scores(spec, cs)
        _, ties = decide(scores)
        out.append(credit(index, entry, ties, len(cands)))
    return out[0] if single else out


class _RowMixin:
    def row(self, timing: bool = True) -> dict[str, str]:
        return {
            "strategy": self.strategy,
            "direction": self.direction,
            "mode": self.mode,
            "root": self.root,
            "words_pct": f"{self.word_accuracy:.3f}",
            "phones_pct": f"{self.phoneme_accuracy:.3f}",
            "silenced": str(self.silenced),
            "wall_ms": str(self.wall_ms) if timing and self.wall_ms is not None else "-",
        }


@dataclass
class EvaluationReport(_RowMixin):
    strategy: str
    direction: str
    mode: str
    root: str
    results: list[WordResult]
    phone_agg: str = "perword"
    wall_ms: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.results)

    @property
    def silenced(self) -> int:
        return sum(r.silenced for r in self.results)

    @property
    def word_accuracy(self) -> float:
        return 100 * float(sum((r.word_credit for r in self.results), Fraction(0)) / len(self.results))

    @property
    def phoneme_accuracy(self) -> float:
        if self.phone_agg == "corpus":
            errors = sum((r.phoneme_error for r in self.results), Fraction(0))
            total = sum(r.reference_length for r in self.results)
            return 100 * float(1 - errors / total)
        return 100 * float(sum((r.phoneme_credit for r in self.results), Fraction(0)) / len(self.results))


REPORT_COLUMNS = ("strategy", "direction", "mode", "root", "words_pct", "phones_pct", "silenced", "wall_ms")
DETAIL_COLUMNS = ("index", "word", "reference", "outputs", "tie_size", "correct", "word_credit",
                  "phoneme_credit", "silenced")


# -- corpus-level runs ------------------------------------------------------------

_STATE: dict = {}


def _work(indices: Sequence[int]):
    st = _STATE
    index, entries = st["index"], st["entries"]
    out = []
    for i in indices:
        entry = entries[i]
        view = index.without(entry)
        out.append((i, score_word(entry, view, st["specs"], st["mode"], i, st["fallback"],
                                  st["max_candidates"])))
    return out


def evaluate_many(lexicon: Lexicon, strategies: Sequence, mode: Mode | str = Mode.OVERLAP,
                  jobs: int = 1, index: SubstringIndex | None = None, fallback: str = "all",
                  phone_agg: str = "perword", max_candidates: int | None = None,
                  words: Iterable[int] | None = None) -> list[EvaluationReport]:
    """Leave-one-out evaluation of several strategies in one pass over the words.

    Results do not depend on ``jobs``: words are reassembled in lexicon order
    and accuracies are exact rational sums.
    """
    mode = Mode(mode)
    if phone_agg not in PHONE_AGGREGATIONS:
        raise ValueError(f"unknown phoneme aggregation {phone_agg!r}")
    if index is None:
        index = SubstringIndex.build(lexicon)
    selected = list(range(len(lexicon))) if words is None else list(words)
    specs = list(strategies)
    t0 = time.perf_counter()
    _STATE.update(index=index, entries=lexicon.entries, specs=specs, mode=mode,
                  fallback=fallback, max_candidates=max_candidates)
    try:
        per_word: dict[int, list[WordResult]] = {}
        if jobs > 1 and len(selected) > 1:
            size = max(1, min(200, len(selected) // (jobs * 4) or 1))
            chunks = [selected[s:s + size] for s in range(0, len(selected), size)]
            with ProcessPoolExecutor(jobs, mp_context=mp.get_context("fork")) as ex:
                for part in ex.map(_work, chunks):
                    per_word.update(part)
        else:
            per_word.update(_work(selected))
    finally:
        _STATE.clear()
    wall_ms = int(round(1000 * (time.perf_counter() - t0)))
    reports = []
    for s, spec in enumerate(specs):
        name = "UPPER" if spec == UPPER else spec.name
        root = "1" if spec == UPPER else str(spec.root)
        reports.append(EvaluationReport(
            name, lexicon.direction.value, mode.value, root,
            [per_word[i][s] for i in selected], phone_agg, wall_ms,
            {"homophone_rule": lexicon.homophone_rule, "jobs": jobs},
        ))
    return reports


def evaluate_corpus(lexicon: Lexicon, strategy: StrategySpec, mode: Mode | str = Mode.OVERLAP,
                    jobs: int = 1, **kwargs) -> EvaluationReport:
    return evaluate_many(lexicon, [strategy], mode, jobs, **kwargs)[0]


def bounds(lexicon: Lexicon, mode: Mode | str = Mode.OVERLAP, jobs: int = 1, **kwargs):
    """(lower, upper) reports: unit score and edit-distance oracle."""
    lower, upper = evaluate_many(lexicon, [LOWER, UPPER], mode, jobs, **kwargs)
    return lower, upper


# -- vectorized sweep over classic combinations --------------------------------------

@dataclass
class AggregateReport(_RowMixin):
    """Accuracy row without per-word detail, built from exact totals."""

    strategy: str
    direction: str
    mode: str
    root: str
    n_words: int
    word_total: Fraction
    phone_total: Fraction
    phone_errors: Fraction
    reference_symbols: int
    silenced: int
    phone_agg: str = "perword"
    wall_ms: int | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.n_words

    @property
    def word_accuracy(self) -> float:
        return 100 * float(self.word_total / self.n_words)

    @property
    def phoneme_accuracy(self) -> float:
        if self.phone_agg == "corpus":
            return 100 * float(1 - self.phone_errors / self.reference_symbols)
        return 100 * float(self.phone_total / self.n_words)


def combination_masks(bitstrings: Sequence[str]) -> np.ndarray:
    """Boolean (M, 11) matrix of selected components."""
    masks = np.zeros((len(bitstrings), len(COMPONENTS)), dtype=bool)
    for m, b in enumerate(bitstrings):
        for j, bit in enumerate(b):
            masks[m, j] = bit == "1"
    return masks


def _combined_points(pts: np.ndarray, masks: np.ndarray, rule: str) -> np.ndarray:
    n = pts.shape[1]
    if rule == "sum":
        return masks.astype(np.int64) @ pts
    # N**11 fits in int64 up to N = 50; beyond that fall back to Python ints
    dtype = np.int64 if n <= 50 else object
    out = np.ones((masks.shape[0], n), dtype=dtype)
    p = pts.astype(dtype)
    for j in range(masks.shape[1]):
        sel = masks[:, j]
        if sel.any():
            out[sel] = out[sel] * p[j]
    return out


def _combo_work(indices: Sequence[int]):
    st = _STATE
    index, entries, masks = st["index"], st["entries"], st["masks"]
    acc_word: dict[int, np.ndarray] = {}
    acc_phone: dict[tuple[int, int], np.ndarray] = {}
    acc_err: dict[int, np.ndarray] = {}
    silenced, ref_symbols, silent_errors = 0, 0, 0
    for i in indices:
        entry = entries[i]
        reference = strip_symbols(entry.phonemes)
        ref_symbols += len(reference)
        view = index.without(entry)
        try:
            cands = generate_candidates(entry.letters, view, st["mode"], st["fallback"], st["max_candidates"])
        except NoPronunciation:
            silenced += 1
            silent_errors += len(reference)
            continue
        cs = CandidateSet(entry.letters, cands, view)
        pts = np.array([points(component_ranks(c, cs)) for c in COMPONENTS], dtype=np.int64)
        scores = _combined_points(pts, masks, st["combination"])
        # candidates grouped by pronunciation, classes in sorted order
        names = sorted(cs.classes)
        order = [k for y in names for k in cs.classes[y]]
        starts = np.cumsum([0] + [len(cs.classes[y]) for y in names[:-1]])
        class_best = np.maximum.reduceat(scores[:, order], starts, axis=1)
        best = class_best.max(axis=1)
        tie = class_best == best[:, None]
        dists = [levenshtein(strip_symbols(y), reference) for y in names]
        correct = np.array([d == 0 for d in dists], dtype=np.int64)
        ref_len = len(reference)
        phon = np.array([max(0, ref_len - d) for d in dists], dtype=np.int64)
        tie_i = tie.astype(np.int64)
        n_tie = tie_i.sum(axis=1)
        n_correct = tie_i @ correct
        n_phon = tie_i @ phon
        n_err = tie_i @ np.array(dists, dtype=np.int64)
        for n in np.unique(n_tie):
            sel = n_tie == n
            n = int(n)
            acc_word.setdefault(n, np.zeros(len(masks), dtype=np.int64))[sel] += n_correct[sel]
            acc_err.setdefault(n, np.zeros(len(masks), dtype=np.int64))[sel] += n_err[sel]
            key = (max(ref_len, 1), n)
            # an empty reference earns full credit only from correct outputs
            value = n_phon[sel] if ref_len else n_correct[sel]
            acc_phone.setdefault(key, np.zeros(len(masks), dtype=np.int64))[sel] += value
    return acc_word, acc_phone, acc_err, silenced, ref_symbols, silent_errors


def _merge(into: dict, part: dict) -> None:
    for k, v in part.items():
        if k in into:
            into[k] = into[k] + v
        else:
            into[k] = v


def evaluate_combinations(lexicon: Lexicon, bitstrings: Sequence[str], mode: Mode | str = Mode.OVERLAP,
                          jobs: int = 1, index: SubstringIndex | None = None, fallback: str = "all",
                          combination: str = "product", phone_agg: str = "perword",
                          max_candidates: int | None = None,
                          words: Iterable[int] | None = None) -> list[AggregateReport]:
    """Leave-one-out accuracy of many classic rank combinations in one pass.

    Equivalent to :func:`evaluate_many` on the same bitstrings (rows are
    identical) but scores all combinations of a word with a few array
    operations.  Per-word detail is not kept.
    """
    mode = Mode(mode)
    if phone_agg not in PHONE_AGGREGATIONS:
        raise ValueError(f"unknown phoneme aggregation {phone_agg!r}")
    if index is None:
        index = SubstringIndex.build(lexicon)
    bitstrings = list(bitstrings)
    specs = [StrategySpec(tuple(c for c, b in zip(COMPONENTS, bs) if b == "1"), combination=combination,
                          alias=bs) for bs in bitstrings]
    masks = combination_masks([bs.ljust(len(COMPONENTS), "0") for bs in bitstrings])
    selected = list(range(len(lexicon))) if words is None else list(words)
    t0 = time.perf_counter()
    _STATE.update(index=index, entries=lexicon.entries, masks=masks, mode=mode, fallback=fallback,
                  max_candidates=max_candidates, combination=combination)
    acc_word: dict = {}
    acc_phone: dict = {}
    acc_err: dict = {}
    silenced = ref_symbols = silent_errors = 0
    try:
        if jobs > 1 and len(selected) > 1:
            size = max(1, min(200, len(selected) // (jobs * 4) or 1))
            chunks = [selected[s:s + size] for s in range(0, len(selected), size)]
            with ProcessPoolExecutor(jobs, mp_context=mp.get_context("fork")) as ex:
                parts = list(ex.map(_combo_work, chunks))
        else:
            parts = [_combo_work(selected)]
    finally:
        _STATE.clear()
    for w, p, e, sil, refs, sil_err in parts:
        _merge(acc_word, w)
        _merge(acc_phone, p)
        _merge(acc_err, e)
        silenced += sil
        ref_symbols += refs
        silent_errors += sil_err
    wall_ms = int(round(1000 * (time.perf_counter() - t0)))
    reports = []
    for m, spec in enumerate(specs):
        word_total = sum((Fraction(int(v[m]), n) for n, v in acc_word.items()), Fraction(0))
        phone_total = sum((Fraction(int(v[m]), r * n) for (r, n), v in acc_phone.items()), Fraction(0))
        phone_err = sum((Fraction(int(v[m]), n) for n, v in acc_err.items()), Fraction(silent_errors))
        reports.append(AggregateReport(
            spec.name, lexicon.direction.value, mode.value, "1", len(selected), word_total,
            phone_total, phone_err, ref_symbols, silenced, phone_agg, wall_ms,
            {"homophone_rule": lexicon.homophone_rule, "jobs": jobs},
        ))
    return reports


# -- TSV output ----------------------------------------------------------------------

def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def report_header(config: dict, homophone_rule: str) -> str:
    return f"# pbanalogy {__version__} config={config_hash(config)} homophone_rule={homophone_rule}\n"


def format_rows(reports: Iterable[EvaluationReport], timing: bool = True) -> list[str]:
    return ["\t".join(r.row(timing)[c] for c in REPORT_COLUMNS) + "\n" for r in reports]


def write_report(path, reports: Sequence[EvaluationReport], config: dict, homophone_rule: str,
                 timing: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report_header(config, homophone_rule))
        fh.write("\t".join(REPORT_COLUMNS) + "\n")
        fh.writelines(format_rows(reports, timing))


def write_detail(path, report: EvaluationReport) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(DETAIL_COLUMNS) + "\n")
        for r in report.results:
            fh.write("\t".join([
                str(r.index), unescape(r.word), unescape(r.reference),
                ",".join(unescape(o) for o in r.outputs), str(r.tie_set_size),
                str(r.correct_in_tie), str(r.word_credit), f"{float(r.phoneme_credit):.6f}",
                str(int(r.silenced)),
            ]) + "\n")


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)
