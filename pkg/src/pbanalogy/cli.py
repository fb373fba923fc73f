"""Command-line interface: ``pba {build-index,pronounce,evaluate,bounds,sweep}``.

Every option can also come from a JSON config file (``--config``) whose keys
are the :class:`RunConfig` field names; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from . import __version__, probscore
from .corpus import HOMOPHONE_RULES, Direction, Lexicon, escape, load_lexicon, pad, unescape
from .decision import pronunciation_scores
from .evaluation import (
    LOWER,
    PHONE_AGGREGATIONS,
    REPORT_COLUMNS,
    UPPER,
    config_hash,
    evaluate_combinations,
    evaluate_many,
    format_rows,
    report_header,
    write_detail,
    write_report,
)
from .index import SubstringIndex
from .lattice import FALLBACK_POLICIES, Mode, NoPronunciation, generate_candidates
from .strategies import COMBINATIONS, COMPONENTS, CandidateSet, StrategySpec, parse_strategy

log = logging.getLogger(__name__)

EXIT_OK, EXIT_SILENT, EXIT_USAGE = 0, 1, 2
SWEEP_BATCH = 32
COMBO_BATCH = 256


class ConfigError(ValueError):
    pass


def parse_root(value) -> object:
    """``"n"`` or an integer degree >= 1."""
    if isinstance(value, int) and not isinstance(value, bool):
        root = value
    else:
        text = str(value).strip().lower()
        if text == "n":
            return "n"
        try:
            root = int(text)
        except ValueError:
            raise ConfigError(f"root must be a positive integer or 'n', got {value!r}") from None
    if root < 1:
        raise ConfigError(f"root must be >= 1, got {root}")
    return root


def forced_mode(spec: StrategySpec) -> Mode | None:
    """PROB needs non-overlapping segments; PROD and the COND rules overlap-one."""
    if spec.alias == "PROB":
        return Mode.NONOVERLAP
    if spec.alias == "PROD" or spec.rule in probscore.COND_RULES:
        return Mode.OVERLAP
    return None


@dataclass
class RunConfig:
    corpus: str | None = None
    index: str | None = None
    direction: str = "tts"
    mode: str | None = None
    strategy: str = "CONDF"
    root: object = 1
    collate: bool = True
    combination: str = "product"
    jobs: int = 1
    out: str | None = None
    detail: str | None = None
    phone_agg: str = "perword"
    fallback: str = "all"
    homophone_rule: str = "keep_first"
    compare_stripped: bool = False
    timing: bool = True
    max_candidates: int | None = None
    max_len: int | None = None

    def __post_init__(self):
        self.direction = Direction(self.direction).value
        self.root = parse_root(self.root)
        if self.mode is not None:
            self.mode = Mode(self.mode).value
        for name, allowed in (("phone_agg", PHONE_AGGREGATIONS), ("fallback", FALLBACK_POLICIES),
                              ("homophone_rule", HOMOPHONE_RULES), ("combination", COMBINATIONS)):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.corpus is not None and not str(self.corpus).strip():
            raise ConfigError("empty corpus path")

    def spec(self, strategy: str | None = None, root=None) -> StrategySpec:
        try:
            return parse_strategy(strategy or self.strategy, root=self.root if root is None else root,
                                  collate=self.collate, combination=self.combination)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def mode_for(self, spec: StrategySpec) -> Mode:
        forced = forced_mode(spec)
        if forced is not None:
            if self.mode is not None and Mode(self.mode) is not forced:
                raise ConfigError(f"{spec.name} requires --mode {forced.value}")
            return forced
        return Mode(self.mode or Mode.OVERLAP.value)

    def hashed(self, **extra) -> dict:
        """Settings that determine report contents (no paths, jobs or timing)."""
        skip = {"corpus", "index", "out", "detail", "jobs", "timing"}
        out = {k: v for k, v in asdict(self).items() if k not in skip}
        out.update(extra)
        return out


def _merge_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        known = {f.name for f in fields(RunConfig)}
        for k, v in data.items():
            k = k.replace("-", "_")
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}")
            values[k] = v
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return RunConfig(**values)


# -- loading ------------------------------------------------------------------------

def _load(cfg: RunConfig, need_corpus: bool = True) -> tuple[Lexicon | None, SubstringIndex]:
    lexicon = None
    if cfg.corpus:
        lexicon = load_lexicon(cfg.corpus, cfg.direction, cfg.homophone_rule, cfg.compare_stripped)
    elif need_corpus or not cfg.index:
        raise ConfigError("--corpus is required")
    if cfg.index:
        index = SubstringIndex.load(cfg.index)
        meta = index.meta
        if lexicon is not None and meta.get("lexicon") not in (None, lexicon.fingerprint()):
            raise ConfigError(f"{cfg.index} was built from a different lexicon or direction")
        if lexicon is None and meta.get("direction") not in (None, cfg.direction):
            raise ConfigError(f"{cfg.index} was built for direction {meta['direction']}")
    else:
        index = SubstringIndex.build(lexicon, cfg.max_len)
    return lexicon, index


def _open_out(path):
    return open(path, "w", encoding="utf-8") if path else sys.stdout


def _summary(report) -> str:
    row = report.row()
    timing = f", {row['wall_ms']} ms" if row["wall_ms"] != "-" else ""
    return (f"{row['strategy']} {row['direction']} {row['mode']} root={row['root']}: "
            f"words {row['words_pct']}% phones {row['phones_pct']}% "
            f"silenced {row['silenced']} ({len(report)} words{timing})")


def _emit_report(cfg: RunConfig, reports, extra: dict, lexicon: Lexicon) -> None:
    config = cfg.hashed(lexicon=lexicon.fingerprint(), **extra)
    if cfg.out:
        write_report(cfg.out, reports, config, lexicon.homophone_rule, cfg.timing)
        for r in reports:
            print(_summary(r))
    else:
        sys.stdout.write(report_header(config, lexicon.homophone_rule))
        sys.stdout.write("\t".join(REPORT_COLUMNS) + "\n")
        sys.stdout.writelines(format_rows(reports, cfg.timing))
        for r in reports:
            print(_summary(r), file=sys.stderr)


# -- subcommands -------------------------------------------------------------------

def cmd_build_index(cfg: RunConfig, args) -> int:
    if not cfg.out:
        raise ConfigError("build-index needs --out")
    lexicon, index = _load(cfg)
    index.meta.update(lexicon=lexicon.fingerprint(), direction=cfg.direction,
                      homophone_rule=cfg.homophone_rule, entries=len(lexicon))
    index.save(cfg.out)
    print(f"indexed {len(lexicon)} entries, {len(index)} substrings -> {cfg.out}")
    return EXIT_OK


def _format_score(v) -> str:
    if isinstance(v, Fraction):
        return f"{float(v):.6g} ({v})" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, tuple):
        return ",".join(_format_score(x) for x in v)
    return str(v)


def _explain_generic(cs: CandidateSet) -> str:
    lines = []
    for c, f, ds in zip(cs.candidates, cs.freqs, cs.dists):
        arcs = "  ".join(f"{unescape(p)}:{unescape(y)}({fk}/{d.total})"
                         for p, y, fk, d in zip(c.pieces, c.prons, f, ds))
        lines.append(f"{unescape(c.assembled)}  <-  {arcs}")
    return "\n".join(lines)


def cmd_pronounce(cfg: RunConfig, args) -> int:
    spec = cfg.spec()
    mode = cfg.mode_for(spec)
    lexicon, index = _load(cfg, need_corpus=bool(args.loo))
    word = args.word if cfg.direction == "stt" else args.word.lower()
    if lexicon is not None:
        alphabet = lexicon.alphabet()
    else:
        alphabet = {unescape(x) for x in index.table if len(x) == 1 and x != "#"}
    unknown = sorted(set(word) - set(alphabet))
    if not word or unknown:
        raise ConfigError(f"symbols not in the corpus alphabet: {' '.join(unknown) or '(empty word)'}")
    letters = pad(escape(word))
    view = index.view()
    if args.loo:
        entry = next((e for e in lexicon if e.letters == letters), None)
        if entry is None:
            log.warning("%r is not in the lexicon; nothing to leave out", word)
        else:
            view = index.without(entry)
    try:
        cands = generate_candidates(letters, view, mode, cfg.fallback, cfg.max_candidates)
    except NoPronunciation:
        print(f"no pronunciation for {word!r} ({mode.value} mode)", file=sys.stderr)
        return EXIT_SILENT
    cs = CandidateSet(letters, cands, view)
    scores = pronunciation_scores(spec, cs)
    ranking, ties = probscore.decide(scores)
    print(f"# {spec.name} {mode.value}: {len(cands)} candidates, {len(ranking)} pronunciations, "
          f"{len(ties)} tied best")
    for r, (y, s) in enumerate(ranking[:args.top], 1):
        print(f"{r}\t{probscore.surface(y)}\t{unescape(y)}\t{_format_score(s)}")
    if args.explain:
        print()
        rule = "PROD" if spec.rule == "PRODUCT" and spec.factor == "est" else spec.rule
        if rule in probscore.COND_RULES:
            print(probscore.explain(cs, rule))
        else:
            print(_explain_generic(cs))
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args) -> int:
    spec = cfg.spec()
    mode = cfg.mode_for(spec)
    lexicon, index = _load(cfg)
    report = evaluate_many(lexicon, [spec], mode, cfg.jobs, index=index, fallback=cfg.fallback,
                           phone_agg=cfg.phone_agg, max_candidates=cfg.max_candidates)[0]
    _emit_report(cfg, [report], {"command": "evaluate", "mode": mode.value}, lexicon)
    if cfg.detail:
        write_detail(cfg.detail, report)
    return EXIT_OK


def cmd_bounds(cfg: RunConfig, args) -> int:
    mode = Mode(cfg.mode or Mode.OVERLAP.value)
    lexicon, index = _load(cfg)
    reports = evaluate_many(lexicon, [LOWER, UPPER], mode, cfg.jobs, index=index, fallback=cfg.fallback,
                            phone_agg=cfg.phone_agg, max_candidates=cfg.max_candidates)
    _emit_report(cfg, reports, {"command": "bounds", "mode": mode.value}, lexicon)
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------------

def expand_strategies(text: str) -> list[str]:
    """Comma list of strategies; ``all5``, ``all11`` and ``singletons`` expand
    to bitstring families."""
    out: list[str] = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        key = tok.lower()
        if key in ("all5", "all11"):
            width = int(key[3:])
            out.extend("".join(b) for b in itertools.product("01", repeat=width) if "1" in b)
        elif key == "singletons":
            out.extend("".join("1" if j == i else "0" for j in range(len(COMPONENTS)))
                       for i in range(len(COMPONENTS)))
        else:
            out.append(tok)
    return out


def expand_roots(text: str) -> list:
    """Comma list of degrees, ranges ``a-b`` allowed, plus ``n``."""
    out: list = []
    for tok in (t.strip() for t in str(text).split(",")):
        if not tok:
            continue
        if "-" in tok:
            a, b = (int(x) for x in tok.split("-", 1))
            out.extend(parse_root(r) for r in range(a, b + 1))
        else:
            out.append(parse_root(tok))
    return out


def sweep_grid(cfg: RunConfig, strategies: str, roots: str) -> list[tuple[StrategySpec, Mode]]:
    """Grid points in output order; classic combinations ignore the root and
    appear once."""
    grid, seen = [], set()
    for text in expand_strategies(strategies):
        for root in expand_roots(roots) or [1]:
            spec = cfg.spec(text, root)
            if spec.is_classic:
                spec = cfg.spec(text, 1)
            mode = cfg.mode_for(spec)
            key = (spec.name, mode)
            if key not in seen:
                seen.add(key)
                grid.append((spec, mode))
    return grid


def _read_existing(path: str, header: str) -> dict[tuple[str, str], str]:
    if not path or not os.path.exists(path):
        return {}
    with open(path, encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        return {}
    if lines[0] != header:
        raise ConfigError(f"{path} holds a sweep with a different configuration; choose another --out")
    done = {}
    for line in lines[2:]:
        parts = line.rstrip("\n").split("\t")
        if len(parts) == len(REPORT_COLUMNS):
            done[(parts[0], parts[2])] = line
    return done


def _write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".sweep-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def cmd_sweep(cfg: RunConfig, args) -> int:
    grid = sweep_grid(cfg, args.strategies, args.roots)
    lexicon, index = _load(cfg)
    config = cfg.hashed(lexicon=lexicon.fingerprint(), command="sweep",
                        grid=[(s.name, m.value) for s, m in grid])
    header = report_header(config, lexicon.homophone_rule)
    done = _read_existing(cfg.out, header)
    todo = [(s, m) for s, m in grid if (s.name, m.value) not in done]
    if done:
        print(f"resuming: {len(grid) - len(todo)} of {len(grid)} rows already present", file=sys.stderr)

    def flush():
        text = header + "\t".join(REPORT_COLUMNS) + "\n"
        text += "".join(done[(s.name, m.value)] for s, m in grid if (s.name, m.value) in done)
        if cfg.out:
            _write_atomic(cfg.out, text)
        return text

    common = dict(fallback=cfg.fallback, phone_agg=cfg.phone_agg, max_candidates=cfg.max_candidates)
    for mode in (Mode.OVERLAP, Mode.NONOVERLAP):
        batch_specs = [s for s, m in todo if m is mode]
        classic = [s for s in batch_specs if s.is_classic]
        other = [s for s in batch_specs if not s.is_classic]
        if len(classic) > 1:
            for start in range(0, len(classic), COMBO_BATCH):
                chunk = classic[start:start + COMBO_BATCH]
                bits = [s.alias or s.name for s in chunk]
                reports = evaluate_combinations(lexicon, bits, mode, cfg.jobs, index=index,
                                                combination=cfg.combination, **common)
                for spec, rep in zip(chunk, reports):
                    rep.strategy = spec.name
                    done[(spec.name, mode.value)] = format_rows([rep], cfg.timing)[0]
                flush()
                print(f"{mode.value}: {len(done)}/{len(grid)} rows", file=sys.stderr)
        else:
            other = classic + other
        for start in range(0, len(other), SWEEP_BATCH):
            chunk = other[start:start + SWEEP_BATCH]
            reports = evaluate_many(lexicon, chunk, mode, cfg.jobs, index=index, **common)
            for spec, rep in zip(chunk, reports):
                done[(spec.name, mode.value)] = format_rows([rep], cfg.timing)[0]
            flush()
            print(f"{mode.value}: {len(done)}/{len(grid)} rows", file=sys.stderr)
    text = flush()
    if not cfg.out:
        sys.stdout.write(text)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--corpus", help="NETtalk-format lexicon")
    common.add_argument("--index", help="prebuilt index from build-index")
    common.add_argument("--direction", choices=[d.value for d in Direction])
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--strategy", help="bitstring (5 or 11 digits), component, rule or PRODUCT:<factor>")
    common.add_argument("--root", help="root degree 1..10 or n (per-candidate segment count)")
    common.add_argument("--no-collate", dest="collate", action="store_const", const=False)
    common.add_argument("--combination", choices=COMBINATIONS, help="rank combination rule")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--phone-agg", choices=PHONE_AGGREGATIONS)
    common.add_argument("--fallback", choices=FALLBACK_POLICIES, help="silence fallback policy")
    common.add_argument("--homophone-rule", choices=HOMOPHONE_RULES)
    common.add_argument("--compare-stripped", action="store_const", const=True,
                        help="ignore null phonemes when detecting homophones")
    common.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                        help="write '-' for wall_ms so reports are byte-reproducible")
    common.add_argument("--max-candidates", type=int, help="per-word candidate cap (diagnostic when hit)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pba", description="Pronunciation by analogy.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", parents=[common], help="build and save the substring index")
    p.add_argument("--max-len", type=int, help="cap on substring length (performance knob)")
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("pronounce", parents=[common], help="pronounce one word")
    p.add_argument("word")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--explain", action="store_true", help="print per-candidate factors")
    p.add_argument("--loo", action="store_true", help="leave the word itself out of the index")
    p.set_defaults(func=cmd_pronounce)

    p = sub.add_parser("evaluate", parents=[common], help="leave-one-out evaluation of one strategy")
    p.add_argument("--detail", help="per-word TSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bounds", parents=[common], help="lower (unit score) and upper (oracle) bounds")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", parents=[common], help="evaluate a grid of strategies and roots")
    p.add_argument("--strategies", default="", help="comma list; all5, all11, singletons expand")
    p.add_argument("--roots", default="1", help="comma list of degrees, ranges a-b, or n")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _merge_config(args)
        return args.func(cfg, args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"pba {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
