"""Grammar compaction: removing rules whose right-hand side other rules parse."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

from .grammar import Grammar, Rule
from .parser import ChartParser
from .trees import Tree, write_tree

ORDERS = ("flat-first", "input", "random")
PARSABLE = "parsable"
BELOW_THRESHOLD = "below-threshold"
OUTPROBABILIZED = "outprobabilized"
_TIE_TOL = 1e-12


@dataclass
class Elimination:
    rule: Rule
    reason: str
    witness: Tree | None = None

    def to_dict(self):
        return {
            "rule": str(self.rule),
            "count": self.rule.count,
            "reason": self.reason,
            "witness": None if self.witness is None else write_tree(self.witness),
        }


@dataclass
class CompactionReport:
    initial_size: int
    final_size: int = 0
    eliminated: list = field(default_factory=list)
    order_used: str = "flat-first"
    mode: str = "naive"
    ratio: float | None = None

    @property
    def reduction(self) -> float:
        """Size reduction as a percentage of the initial grammar."""
        if not self.initial_size:
            return 0.0
        return 100.0 * (self.initial_size - self.final_size) / self.initial_size

    def to_dict(self, meta=None):
        out = {}
        if meta:
            out["meta"] = dict(meta)
        out.update({
            "mode": self.mode,
            "ratio": self.ratio,
            "order_used": self.order_used,
            "initial_size": self.initial_size,
            "final_size": self.final_size,
            "grammar_size": self.final_size,
            "reduction_percent": round(self.reduction, 4),
            "eliminated": [e.to_dict() for e in self.eliminated],
        })
        return out

    def to_json(self, meta=None) -> str:
        return json.dumps(self.to_dict(meta), indent=2) + "\n"


def flat_first_key(r: Rule):
    return (-len(r.rhs), r.lhs, r.rhs)


def visiting_order(grammar: Grammar, order="flat-first", seed=None):
    """Return ``(rules, descriptor)`` for an ordering policy.

    ``order`` is ``"flat-first"`` (longest right-hand side first, then
    lexicographic), ``"input"`` (grammar insertion order), ``"random"``
    (shuffled with ``seed``) or an explicit sequence of rules.
    """
    rules = grammar.rules()
    if not isinstance(order, str):
        explicit = [Rule(r.lhs, r.rhs, grammar.count(r)) for r in order]
        if sorted(r.key for r in explicit) != sorted(r.key for r in rules):
            raise ValueError("explicit order must list every grammar rule once")
        return explicit, "explicit"
    if order == "flat-first":
        return sorted(rules, key=flat_first_key), "flat-first"
    if order == "input":
        return rules, "input"
    if order == "random":
        rng = random.Random(seed)
        rules.sort(key=lambda r: r.key)
        rng.shuffle(rules)
        return rules, f"random(seed={seed})"
    raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")


def compact(grammar: Grammar, order="flat-first", seed=None,
            witnesses=True) -> tuple[Grammar, CompactionReport]:
    """Eliminate every rule parsable by the rules still present at its visit."""
    visit, descriptor = visiting_order(grammar, order, seed)
    parser = ChartParser(grammar, weighted=False)
    report = CompactionReport(len(grammar), order_used=descriptor)
    gone = set()
    for r in visit:
        if parser.recognize(r.rhs, r.lhs, excluded=(r,)):
            witness = None
            if witnesses:
                witness = parser.viterbi(r.rhs, r.lhs, excluded=(r,)).tree
            parser.discard(r)
            gone.add(r.key)
            report.eliminated.append(Elimination(r, PARSABLE, witness))
    out = grammar.subset(r for r in grammar.rules() if r.key not in gone)
    report.final_size = len(out)
    return out, report


def linguistic_compact(grammar: Grammar, ratio=1.0, order="flat-first",
                       seed=None) -> tuple[Grammar, CompactionReport]:
    """Eliminate a rule only when its best alternative parse is more probable.

    Rule ``R`` goes iff the Viterbi derivation of its right-hand side without
    ``R`` has probability strictly greater than ``ratio * P(R)``.  All
    probabilities are frozen at their pre-compaction values.
    """
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    for r in grammar.rules():
        if r.count <= 0:
            raise ValueError(f"rule {r} has non-positive count")
    frozen = grammar.logprobs()
    visit, descriptor = visiting_order(grammar, order, seed)
    parser = ChartParser(grammar, logprobs=frozen)
    report = CompactionReport(len(grammar), order_used=descriptor,
                              mode="linguistic", ratio=ratio)
    log_ratio = math.log(ratio)
    gone = set()
    for r in visit:
        result = parser.viterbi(r.rhs, r.lhs, excluded=(r,))
        if not result.recognized:
            continue
        bar = log_ratio + frozen[r.key]
        if result.logprob > bar + _TIE_TOL * max(1.0, abs(bar)):
            parser.discard(r)
            gone.add(r.key)
            report.eliminated.append(Elimination(r, OUTPROBABILIZED, result.tree))
    out = grammar.subset(r for r in grammar.rules() if r.key not in gone)
    report.final_size = len(out)
    return out, report


def threshold(grammar: Grammar, min_count: int) -> Grammar:
    """Keep rules occurring at least ``min_count`` times."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    return grammar.subset(r for r in grammar.rules() if r.count >= min_count)


def threshold_report(grammar: Grammar, min_count: int) -> tuple[Grammar, CompactionReport]:
    out = threshold(grammar, min_count)
    report = CompactionReport(len(grammar), len(out), mode="threshold",
                              order_used="input")
    report.eliminated = [Elimination(r, BELOW_THRESHOLD)
                         for r in grammar.rules() if r not in out]
    return out, report


class StageRow(NamedTuple):
    stage: int
    extracted: int
    compacted: int


def iter_stages(chunks: Iterable[Sequence[Rule]], order="flat-first", seed=None,
                mode="naive", ratio=1.0) -> Iterator[tuple[StageRow, Grammar]]:
    """Add each chunk's rules to the running survivors and compact again."""
    seen = set()
    running = Grammar()
    stage = 0
    for stage, chunk in enumerate(chunks, 1):
        chunk = list(chunk)
        seen.update(r.key for r in chunk)
        running = running.copy().add_rules(chunk)
        if mode == "naive":
            running, _ = compact(running, order, seed, witnesses=False)
        elif mode == "linguistic":
            running, _ = linguistic_compact(running, ratio, order, seed)
        else:
            raise ValueError(f"unknown compaction mode {mode!r}")
        yield StageRow(stage, len(seen), len(running)), running
    if stage == 0:
        raise ValueError("staged compaction needs at least one chunk")


def staged_compact(chunks, order="flat-first", seed=None, mode="naive",
                   ratio=1.0) -> list[StageRow]:
    return [row for row, _ in iter_stages(chunks, order, seed, mode, ratio)]


def stages_to_csv(rows: Iterable[StageRow]) -> str:
    lines = ["stage,extracted,compacted"]
    lines += [f"{r.stage},{r.extracted},{r.compacted}" for r in rows]
    return "\n".join(lines) + "\n"
