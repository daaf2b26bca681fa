"""Counted context-free grammars read off normalized treebank trees."""
from __future__ import annotations

import json
import math
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .trees import TOP, Tree, collapse_unary, strip_top


class GrammarError(ValueError):
    pass


class GrammarFormatError(GrammarError):
    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Rule:
    """``lhs -> rhs``.  Identity and hashing ignore ``count``."""

    lhs: str
    rhs: tuple
    count: int = field(default=1, compare=False)

    def __post_init__(self):
        if not self.rhs:
            raise GrammarError(f"epsilon rule for {self.lhs!r} rejected")
        object.__setattr__(self, "lhs", sys.intern(self.lhs))
        object.__setattr__(self, "rhs", tuple(sys.intern(s) for s in self.rhs))

    @property
    def key(self):
        return (self.lhs, self.rhs)

    def with_count(self, count):
        return Rule(self.lhs, self.rhs, count)

    def __str__(self):
        return f"{self.lhs} -> {' '.join(self.rhs)}"


def rule(text: str, count: int = 1) -> Rule:
    """Build a rule from ``"NP -> DT NN"``."""
    lhs, sep, rhs = text.partition("->")
    if not sep:
        raise GrammarError(f"missing '->' in {text!r}")
    return Rule(lhs.strip(), tuple(rhs.split()), count)


class Grammar:
    """A rule multiset with per-LHS totals and maximum-likelihood probabilities.

    Rules keep insertion order, which is the ``input`` visiting order used by
    the compactor.
    """

    def __init__(self, rules: Iterable[Rule] = (), roots=None):
        self._counts: dict[tuple, int] = {}
        self.lhs_totals: Counter = Counter()
        self.roots: Counter = Counter(roots or {})
        self.add_rules(rules)

    def add(self, r: Rule) -> None:
        if not r.rhs:
            raise GrammarError(f"epsilon rule for {r.lhs!r} rejected")
        if r.count < 0:
            raise GrammarError(f"negative count for {r}")
        key = r.key
        self._counts[key] = self._counts.get(key, 0) + r.count
        if r.count:
            self.lhs_totals[r.lhs] += r.count

    def add_rules(self, rules: Iterable[Rule]) -> "Grammar":
        for r in rules:
            self.add(r)
        return self

    def remove(self, r: Rule) -> Rule:
        """Drop a rule entirely; return it with the count it had."""
        count = self._counts.pop(r.key)
        self.lhs_totals[r.lhs] -= count
        if self.lhs_totals[r.lhs] <= 0:
            del self.lhs_totals[r.lhs]
        return Rule(r.lhs, r.rhs, count)

    def __len__(self):
        return len(self._counts)

    def __contains__(self, r):
        return r.key in self._counts

    def __iter__(self):
        return iter(self.rules())

    def __eq__(self, other):
        if not isinstance(other, Grammar):
            return NotImplemented
        return self._counts == other._counts and self.roots == other.roots

    def __repr__(self):
        return f"<Grammar rules={len(self)} nonterminals={len(self.lhs_totals)}>"

    def rules(self) -> list[Rule]:
        return [Rule(lhs, rhs, c) for (lhs, rhs), c in self._counts.items()]

    def sorted_rules(self) -> list[Rule]:
        return [Rule(lhs, rhs, self._counts[lhs, rhs])
                for lhs, rhs in sorted(self._counts)]

    def count(self, r: Rule) -> int:
        return self._counts.get(r.key, 0)

    def probability(self, r: Rule) -> float:
        total = self.lhs_totals.get(r.lhs, 0)
        return self._counts[r.key] / total if total else 0.0

    def logprob(self, r: Rule) -> float:
        p = self.probability(r)
        return math.log(p) if p > 0 else -math.inf

    def logprobs(self) -> dict[tuple, float]:
        """Frozen snapshot of rule log-probabilities keyed by ``(lhs, rhs)``."""
        return {(lhs, rhs): math.log(c / self.lhs_totals[lhs]) if c else -math.inf
                for (lhs, rhs), c in self._counts.items()}

    @property
    def nonterminals(self) -> set[str]:
        return {lhs for lhs, _ in self._counts}

    @property
    def terminals(self) -> set[str]:
        nts = self.nonterminals
        return {s for _, rhs in self._counts for s in rhs if s not in nts}

    def symbols(self) -> set[str]:
        return self.nonterminals | {s for _, rhs in self._counts for s in rhs}

    def copy(self) -> "Grammar":
        g = Grammar(roots=self.roots)
        g._counts = dict(self._counts)
        g.lhs_totals = Counter(self.lhs_totals)
        return g

    def subset(self, rules: Iterable[Rule]) -> "Grammar":
        """Grammar over ``rules`` carrying this grammar's counts."""
        return Grammar((Rule(r.lhs, r.rhs, self._counts[r.key]) for r in rules),
                       roots=self.roots)

    def default_roots(self) -> list[str]:
        """Observed roots by frequency, else LHS symbols never used on a RHS."""
        if self.roots:
            return sorted(self.roots, key=lambda c: (-self.roots[c], c))
        used = {s for _, rhs in self._counts for s in rhs}
        tops = sorted(self.nonterminals - used)
        return tops or sorted(self.nonterminals)


def extract_rules(tree: Tree) -> list[Rule]:
    """Read one rule off each branching node, after unary collapsing.

    The ``TOP`` wrapper is skipped and preterminals emit nothing, so every
    rule has at least two right-hand-side symbols.  Counts aggregate
    identical rules; order is first occurrence in pre-order.
    """
    tree = collapse_unary(strip_top(tree))
    counts: Counter = Counter()
    for node in tree.subtrees():
        if node.children:
            counts[node.label, tuple(c.label for c in node.children)] += 1
    return [Rule(lhs, rhs, c) for (lhs, rhs), c in counts.items()]


def root_label(tree: Tree) -> str | None:
    """Parsing goal contributed by a normalized tree, or None for a lone tag."""
    tree = collapse_unary(strip_top(tree))
    return None if tree.is_leaf else tree.label


def check_categories(trees: Iterable[Tree]) -> None:
    """Raise if some label is used both as a POS tag and as a phrasal label."""
    pos, phrasal = set(), set()
    for tree in trees:
        for node in tree.subtrees():
            if node.label == TOP:
                continue
            (phrasal if node.children else pos).add(node.label)
    both = pos & phrasal
    if both:
        raise GrammarError(
            f"labels used both as POS tag and phrasal category: {sorted(both)}")


def grammar_from_trees(trees: Iterable[Tree]) -> Grammar:
    trees = list(trees)
    check_categories(trees)
    g = Grammar()
    for tree in trees:
        g.add_rules(extract_rules(tree))
        root = root_label(tree)
        if root is not None:
            g.roots[root] += 1
    return g


@dataclass
class GrowthCurve:
    points: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["tokens,distinct_rules"]
        lines += [f"{t},{n}" for t, n in self.points]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps([list(p) for p in self.points])

    def power_law_exponent(self, min_tokens=0) -> float:
        """Least-squares slope of log(rules) against log(tokens)."""
        import numpy as np

        pts = np.array([p for p in self.points if p[0] >= min_tokens and p[1] > 0],
                       dtype=float)
        slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
        return float(slope)


def growth_curve(trees: Iterable[Tree], sample_every: int) -> GrowthCurve:
    """Distinct-rule count sampled whenever the token total crosses a boundary."""
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    seen = set()
    tokens = 0
    curve = GrowthCurve()
    for tree in trees:
        before = tokens // sample_every
        tokens += len(strip_top(tree).leaves())
        seen.update(r.key for r in extract_rules(tree))
        if tokens // sample_every > before:
            curve.points.append((tokens, len(seen)))
    return curve


def write_grammar(grammar: Grammar, meta: dict | None = None) -> str:
    lines = []
    for k, v in (meta or {}).items():
        if isinstance(v, (list, tuple)):
            v = " ".join(str(x) for x in v)
        lines.append(f"# {k}: {v}")
    if grammar.roots:
        roots = " ".join(f"{c}:{n}" for c, n in sorted(grammar.roots.items()))
        lines.append(f"# roots: {roots}")
    for r in grammar.sorted_rules():
        lines.append(f"{r.count} {r}")
    return "\n".join(lines) + "\n"


def read_grammar(text: str) -> Grammar:
    """Parse ``<count> <LHS> -> <C1> <C2> ...`` lines.

    ``#`` lines are comments, except ``# roots: S:12 NP:3`` which restores the
    root counts written by :func:`write_grammar`.
    """
    g = Grammar()
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.startswith("roots:"):
                for item in body[len("roots:"):].split():
                    cat, _, n = item.rpartition(":")
                    g.roots[cat] += int(n)
            continue
        head, arrow, rhs = stripped.partition("->")
        parts = head.split()
        if not arrow or len(parts) != 2:
            raise GrammarFormatError(f"malformed rule line {line!r}", lineno)
        try:
            count = int(parts[0])
        except ValueError:
            raise GrammarFormatError(f"bad count {parts[0]!r}", lineno) from None
        if count <= 0:
            raise GrammarFormatError(f"count must be positive, got {count}", lineno)
        symbols = rhs.split()
        if not symbols or "->" in symbols:
            raise GrammarFormatError("empty or malformed right-hand side", lineno)
        g.add(Rule(parts[1], tuple(symbols), count))
    return g


def merge_counts(rules: Iterable[Rule]) -> list[Rule]:
    counts: Counter = Counter()
    for r in rules:
        counts[r.key] += r.count
    return [Rule(lhs, rhs, c) for (lhs, rhs), c in counts.items()]


def rules_from_trees(trees: Sequence[Tree]) -> list[Rule]:
    return merge_counts(r for t in trees for r in extract_rules(t))
