"""Command-line pipelines: ``tbcompact <subcommand> ...``.

Every subcommand writes into ``--out`` (default ``out``) and never over an
input file.  ``--config FILE`` reads flat ``key=value`` lines whose keys are
the long flag names (``min-count`` or ``min_count``); flags given on the
command line win.  Exit status is 0 on success, 2 for bad input or usage and
1 for internal errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .compaction import (ORDERS, compact, iter_stages, linguistic_compact,
                         stages_to_csv, threshold_report)
from .evaluation import evaluate_corpus, format_table
from .grammar import (GrammarError, grammar_from_trees, growth_curve,
                      read_grammar, rules_from_trees, write_grammar)
from .synth import ConfigError, GeneratorConfig, default_base_grammar, generate, sidecar_json
from .trees import TreebankParseError, normalize, read_treebank, write_treebank

log = logging.getLogger("tbcompact")


class InputError(Exception):
    """Anything the user can fix: unreadable files, bad values, bad syntax."""


# -- argument types ------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _probability(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a probability in [0, 1], got {text}")
    return value


def _bool(text):
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text}")


# -- parser construction -------------------------------------------------------

def _common(p, seed=True):
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--json", action="store_true", help="also write JSON where a CSV is written")
    p.add_argument("--config", help="key=value file; command-line flags override it")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness")


def _order(p):
    p.add_argument("--order", choices=ORDERS, default="flat-first",
                   help="rule visiting order (random uses --seed)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tbcompact",
        description="Treebank grammar extraction, compaction and evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("extract", help="treebank files -> grammar.txt + growth.csv")
    p.add_argument("inputs", nargs="*", metavar="TREEBANK")
    p.add_argument("--sample-every", type=_positive_int, default=1000, metavar="T")
    _common(p)

    p = sub.add_parser("growth", help="treebank files -> growth.csv")
    p.add_argument("inputs", nargs="*", metavar="TREEBANK")
    p.add_argument("--sample-every", type=_positive_int, default=1000, metavar="T")
    _common(p)

    p = sub.add_parser("compact", help="grammar -> compacted.txt + compaction.json")
    p.add_argument("inputs", nargs="*", metavar="GRAMMAR")
    p.add_argument("--mode", choices=("naive", "linguistic"), default="naive")
    p.add_argument("--ratio", type=_positive_float, default=1.0, metavar="R")
    _order(p)
    _common(p)

    p = sub.add_parser("threshold", help="grammar -> thresholded.txt + threshold.json")
    p.add_argument("inputs", nargs="*", metavar="GRAMMAR")
    p.add_argument("--min-count", type=_positive_int, default=2, metavar="K")
    _common(p)

    p = sub.add_parser("stage", help="treebank files -> stages.csv")
    p.add_argument("inputs", nargs="*", metavar="TREEBANK")
    p.add_argument("--chunks", type=_positive_int, default=10, metavar="N")
    p.add_argument("--mode", choices=("naive", "linguistic"), default="naive")
    p.add_argument("--ratio", type=_positive_float, default=1.0, metavar="R")
    _order(p)
    _common(p)

    p = sub.add_parser("eval", help="grammars + gold treebank -> eval.json + eval.txt")
    p.add_argument("inputs", nargs="*", metavar="GRAMMAR",
                   help="one or more grammars; the first is the size reference")
    p.add_argument("--gold", nargs="+", default=[], metavar="TREEBANK")
    scope = p.add_mutually_exclusive_group()
    scope.add_argument("--labelled", dest="scope", action="store_const", const="labelled")
    scope.add_argument("--unlabelled", dest="scope", action="store_const", const="unlabelled")
    p.set_defaults(scope="both")
    _common(p, seed=False)

    p = sub.add_parser("synth", help="synthetic treebank + synth.json sidecar")
    p.add_argument("--grammar", help="base grammar file (default: bundled 50-rule grammar)")
    p.add_argument("--sentences", type=int, default=1000, metavar="N")
    p.add_argument("--flatten-probability", type=_probability, default=0.3, metavar="P")
    p.add_argument("--max-depth", type=_positive_int, default=8)
    p.add_argument("--root", default=None)
    p.add_argument("--files", type=_positive_int, default=1, metavar="K",
                   help="split the corpus over K files")
    _common(p)
    return parser


# -- config files --------------------------------------------------------------

def read_config(path) -> dict[str, str]:
    out = {}
    text = _read_text(path)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq or not key.strip():
            raise InputError(f"{path}: line {lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _config_defaults(subparser, config, path):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, value in config.items():
        if key in ("labelled", "unlabelled") and "scope" in actions:
            try:
                if _bool(value):
                    defaults["scope"] = key
            except argparse.ArgumentTypeError as exc:
                raise InputError(f"{path}: bad value for {key}: {exc}") from None
            continue
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise InputError(f"{path}: unknown key {key!r} for this command")
        try:
            if key == "inputs" or action.nargs == "+":
                defaults[key] = value.split()
            elif isinstance(action, argparse._StoreTrueAction):
                defaults[key] = _bool(value)
            elif action.type is not None:
                defaults[key] = action.type(value)
            else:
                defaults[key] = value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InputError(f"{path}: bad value for {key}: {exc}") from None
        if action.choices is not None and defaults[key] not in action.choices:
            raise InputError(f"{path}: {key} must be one of {list(action.choices)}")
    subparser.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _config_defaults(sub, config, args.config)
        args = parser.parse_args(argv)
    return args


# -- helpers -------------------------------------------------------------------

def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        reason = getattr(exc, "strerror", None) or str(exc)
        raise InputError(f"{path}: cannot read: {reason}") from None


def _check_inputs(paths, what, minimum=1):
    if len(paths) < minimum:
        raise InputError(f"expected at least {minimum} {what} file(s)")
    for path in paths:
        if not os.path.isfile(path) or not os.access(path, os.R_OK):
            raise InputError(f"{path}: cannot read {what} file")


def _load_trees(paths):
    trees = []
    for path in paths:
        try:
            raw = read_treebank(_read_text(path))
        except TreebankParseError as exc:
            raise InputError(f"{path}: {exc}") from None
        for t in raw:
            t = normalize(t)
            if t is not None:
                trees.append(t)
    return trees


def _load_grammar(path):
    try:
        return read_grammar(_read_text(path))
    except GrammarError as exc:
        raise InputError(f"{path}: {exc}") from None


class _Outputs:
    """Output paths under ``--out``, refusing to clobber any input."""

    def __init__(self, out_dir, inputs, names=()):
        self.dir = Path(out_dir)
        self._inputs = {Path(p).resolve() for p in inputs}
        self._pending = []
        for name in names:
            self.path(name)

    def path(self, name):
        path = self.dir / name
        if path.resolve() in self._inputs:
            raise InputError(f"{path}: output would overwrite an input file")
        return path

    def add(self, name, text):
        self._pending.append((self.path(name), text))

    def commit(self):
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            for path, text in self._pending:
                with open(path, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write output: {exc}") from None
        for path, _ in self._pending:
            log.info("wrote %s", path)


def _meta(args, **extra):
    meta = {"tool": f"tbcompact {__version__}", "command": args.command}
    if hasattr(args, "seed"):
        meta["seed"] = args.seed
    meta.update(extra)
    meta["inputs"] = list(args.inputs) + list(getattr(args, "gold", []))
    return meta


def _comment_header(meta):
    lines = []
    for key, value in meta.items():
        if isinstance(value, (list, tuple)):
            value = " ".join(str(v) for v in value)
        lines.append(f"# {key}: {value}")
    return "\n".join(lines) + "\n"


def _dump(obj):
    return json.dumps(obj, indent=2) + "\n"


# -- subcommands ---------------------------------------------------------------

def cmd_extract(args, with_grammar=True):
    _check_inputs(args.inputs, "treebank")
    outputs = _Outputs(args.out, args.inputs,
                       ("growth.csv", "growth.json", "grammar.txt"))
    trees = _load_trees(args.inputs)
    tokens = sum(len(t.leaves()) for t in trees)
    log.info("%d trees, %d tokens", len(trees), tokens)
    meta = _meta(args, sample_every=args.sample_every)
    curve = growth_curve(trees, args.sample_every)
    header = _comment_header(meta)
    outputs.add("growth.csv", header + curve.to_csv())
    if args.json:
        outputs.add("growth.json", _dump({"meta": meta, "points": curve.points}))
    if with_grammar:
        try:
            grammar = grammar_from_trees(trees)
        except GrammarError as exc:
            raise InputError(str(exc)) from None
        log.info("%d distinct rules", len(grammar))
        outputs.add("grammar.txt", write_grammar(grammar, meta))
    outputs.commit()
    return 0


def cmd_growth(args):
    return cmd_extract(args, with_grammar=False)


def cmd_compact(args):
    _check_inputs(args.inputs, "grammar")
    if len(args.inputs) != 1:
        raise InputError("compact takes exactly one grammar file")
    outputs = _Outputs(args.out, args.inputs, ("compacted.txt", "compaction.json"))
    grammar = _load_grammar(args.inputs[0])
    if args.mode == "naive":
        out, report = compact(grammar, args.order, args.seed)
    else:
        out, report = linguistic_compact(grammar, args.ratio, args.order, args.seed)
    meta = _meta(args, mode=args.mode, ratio=args.ratio if args.mode == "linguistic" else None,
                 order=report.order_used)
    log.info("%d -> %d rules (%.2f%% reduction)", report.initial_size,
             report.final_size, report.reduction)
    outputs.add("compacted.txt", write_grammar(out, meta))
    outputs.add("compaction.json", report.to_json(meta))
    outputs.commit()
    return 0


def cmd_threshold(args):
    _check_inputs(args.inputs, "grammar")
    if len(args.inputs) != 1:
        raise InputError("threshold takes exactly one grammar file")
    outputs = _Outputs(args.out, args.inputs, ("thresholded.txt", "threshold.json"))
    grammar = _load_grammar(args.inputs[0])
    out, report = threshold_report(grammar, args.min_count)
    meta = _meta(args, min_count=args.min_count)
    log.info("%d -> %d rules", report.initial_size, report.final_size)
    outputs.add("thresholded.txt", write_grammar(out, meta))
    outputs.add("threshold.json", report.to_json(meta))
    outputs.commit()
    return 0


def chunk_files(paths, n):
    """Split ``paths`` into ``n`` runs by file count; the remainder goes last."""
    if n < 1:
        raise InputError("--chunks must be >= 1")
    if n > len(paths):
        raise InputError(f"--chunks {n} exceeds the number of input files ({len(paths)})")
    size = len(paths) // n
    chunks = [paths[i * size:(i + 1) * size] for i in range(n - 1)]
    chunks.append(paths[(n - 1) * size:])
    return chunks


def cmd_stage(args):
    _check_inputs(args.inputs, "treebank")
    chunks = chunk_files(list(args.inputs), args.chunks)
    outputs = _Outputs(args.out, args.inputs, ("stages.csv", "staged.txt", "stages.json"))
    rule_chunks = []
    for files in chunks:
        trees = _load_trees(files)
        rule_chunks.append(rules_from_trees(trees))
    meta = _meta(args, chunks=args.chunks, mode=args.mode, order=args.order,
                 ratio=args.ratio if args.mode == "linguistic" else None)
    rows, final = [], None
    try:
        for row, final in iter_stages(rule_chunks, args.order, args.seed, args.mode, args.ratio):
            log.info("stage %d: %d extracted, %d compacted", *row)
            rows.append(row)
    except GrammarError as exc:
        raise InputError(str(exc)) from None
    outputs.add("stages.csv", _comment_header(meta) + stages_to_csv(rows))
    outputs.add("staged.txt", write_grammar(final, meta))
    if args.json:
        outputs.add("stages.json", _dump({"meta": meta,
                                          "stages": [r._asdict() for r in rows]}))
    outputs.commit()
    return 0


def cmd_eval(args):
    _check_inputs(args.inputs, "grammar")
    _check_inputs(args.gold, "gold treebank")
    outputs = _Outputs(args.out, list(args.inputs) + list(args.gold),
                       ("eval.json", "eval.txt"))
    grammars = [(path, _load_grammar(path)) for path in args.inputs]
    gold = _load_trees(args.gold)
    stems = [Path(path).stem for path in args.inputs]
    unique = len(set(stems)) == len(stems)
    columns = {}
    for path, grammar in grammars:
        name = Path(path).stem if unique else path
        if name in columns:
            name = f"{name}#{len(columns) + 1}"
        columns[name] = evaluate_corpus(grammar, gold)
        log.info("%s: %d sentences, %d fallback parses", name,
                 columns[name].sentences_evaluated, columns[name].fallback_parses)
    full_size = len(grammars[0][1]) if len(grammars) > 1 else None
    meta = _meta(args, scope=args.scope)
    table = format_table(columns, full_size, labelled=args.scope != "unlabelled",
                         unlabelled=args.scope != "labelled")
    doc = {"meta": meta,
           "grammars": {n: r.to_dict(full_size) for n, r in columns.items()}}
    outputs.add("eval.json", _dump(doc))
    outputs.add("eval.txt", table)
    outputs.commit()
    sys.stdout.write(_dump(doc) if args.json else table)
    return 0


def cmd_synth(args):
    inputs = [args.grammar] if args.grammar else []
    _check_inputs(inputs, "grammar", minimum=0)
    args.inputs = inputs
    base = _load_grammar(args.grammar) if args.grammar else default_base_grammar()
    if args.sentences < 0:
        raise InputError("--sentences must be >= 0")
    config = GeneratorConfig(base, args.flatten_probability, args.max_depth,
                             args.sentences, args.seed, args.root)
    outputs = _Outputs(args.out, inputs)
    try:
        trees, usage = generate(config)
    except ConfigError as exc:
        raise InputError(str(exc)) from None
    meta = _meta(args, flatten_probability=args.flatten_probability,
                 max_depth=args.max_depth, sentences=args.sentences, files=args.files)
    if args.files == 1:
        names = ["synth.mrg"]
    else:
        width = len(str(args.files - 1))
        names = [f"synth_{i:0{width}d}.mrg" for i in range(args.files)]
    parts = [trees[i * len(trees) // args.files:(i + 1) * len(trees) // args.files]
             for i in range(args.files)]
    header = _comment_header(meta)
    for name, part in zip(names, parts):
        outputs.add(name, header + (write_treebank(part) if part else ""))
    outputs.add("synth.json", sidecar_json(config, usage, dict(meta, files=names)))
    log.info("%d sentences, %d distinct base rules used", len(trees), len(usage))
    outputs.commit()
    return 0


COMMANDS = {
    "extract": cmd_extract,
    "growth": cmd_growth,
    "compact": cmd_compact,
    "threshold": cmd_threshold,
    "stage": cmd_stage,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="tbcompact: %(message)s",
                        stream=sys.stderr, force=True)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:
        # argparse: usage errors exit 2, --help/--version exit 0
        return exc.code if isinstance(exc.code, int) else 2
    except (InputError, ConfigError, TreebankParseError, GrammarError) as exc:
        print(f"tbcompact: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"tbcompact: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
