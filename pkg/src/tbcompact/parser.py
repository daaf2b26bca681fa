"""Exact CKY-style recognition and Viterbi parsing over n-ary grammars.

Rules are indexed in a prefix trie over their right-hand sides, so an n-ary
rule is binarized on the fly from the left without ever introducing new
symbols.  Each chart cell gets a unary closure; in the weighted case the
closure is a Dijkstra pass, which terminates on unary cycles because every
cycle has probability below one.

Any input symbol, terminal or not, seeds its cell as a leaf with probability
one.  That is what lets a rule's right-hand side be parsed as a sentence.
"""
from __future__ import annotations

import heapq
import math
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, NamedTuple, Sequence

from .grammar import Grammar, GrammarError, Rule
from .trees import Tree, assign_spans

_LEAF, _UNARY, _NARY = 0, 1, 2
_LEAF_KEY = ()
_TIE_TOL = 1e-12


class DegenerateGrammarError(GrammarError):
    """A cycle of unary rules that all have probability one."""


class ParseResult(NamedTuple):
    recognized: bool
    tree: Tree | None = None
    logprob: float | None = None
    fallback: bool = False

    @property
    def prob(self):
        return None if self.logprob is None else math.exp(self.logprob)


class _Node:
    __slots__ = ("children", "complete")

    def __init__(self):
        self.children = {}
        # (rule id, rule, logprob, tie-break key), sorted by key
        self.complete = []


def _better(score, key, old):
    old_score = old[0]
    tol = _TIE_TOL * max(1.0, abs(old_score))
    if score > old_score + tol:
        return True
    if score < old_score - tol:
        return False
    return key < old[1]


class ChartParser:
    """Parser compiled from a fixed rule set.

    ``logprobs`` maps ``(lhs, rhs)`` to a log-probability and defaults to the
    grammar's maximum-likelihood estimates.  With ``weighted=False`` every
    rule scores zero, which is all that recognition and witness derivations
    need.  :meth:`discard` retires a rule permanently; ``excluded`` arguments
    hide rules for a single call.
    """

    def __init__(self, grammar: Grammar | Iterable[Rule], logprobs=None,
                 weighted=True):
        if isinstance(grammar, Grammar):
            rules = grammar.rules()
            if weighted and logprobs is None:
                logprobs = grammar.logprobs()
        else:
            rules = list(grammar)
            if weighted and logprobs is None:
                logprobs = Grammar(rules).logprobs()
        self.weighted = weighted
        self.rules = rules
        self._ids = {r.key: i for i, r in enumerate(rules)}
        self._dead = bytearray(len(rules))
        self._root = _Node()
        self._unary = {}  # child symbol -> [(rid, rule, logprob, key)]
        for rid, r in enumerate(rules):
            lp = logprobs[r.key] if weighted else 0.0
            if lp == -math.inf:
                self._dead[rid] = 1
            entry = (rid, r, lp, r.key)
            if len(r.rhs) == 1:
                self._unary.setdefault(r.rhs[0], []).append(entry)
                continue
            node = self._root
            for sym in r.rhs:
                node = node.children.setdefault(sym, _Node())
            node.complete.append(entry)
        for entries in self._unary.values():
            entries.sort(key=lambda e: e[3])
        for node in self._iter_nodes():
            node.complete.sort(key=lambda e: e[3])
        if weighted:
            self._check_degenerate(logprobs)

    def _iter_nodes(self):
        stack = [self._root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

    def _check_degenerate(self, logprobs):
        graph = {}
        for r in self.rules:
            if len(r.rhs) == 1 and logprobs[r.key] == 0.0:
                graph.setdefault(r.lhs, set()).add(r.rhs[0])
        try:
            TopologicalSorter(graph).prepare()
        except CycleError as exc:
            cycle = exc.args[1]
            raise DegenerateGrammarError(
                "unary cycle of probability-one rules: "
                + " -> ".join(cycle)) from None

    def discard(self, r: Rule) -> None:
        self._dead[self._ids[r.key]] = 1

    def is_active(self, r: Rule) -> bool:
        rid = self._ids.get(r.key)
        return rid is not None and not self._dead[rid]

    def _skip_ids(self, excluded):
        ids = self._ids
        return {ids[r.key] for r in excluded if r.key in ids}

    # -- recognition ---------------------------------------------------------

    def recognize(self, symbols: Sequence[str], goal: str,
                  excluded: Iterable[Rule] = ()) -> bool:
        """True iff ``goal`` derives ``symbols`` without the excluded rules."""
        n = len(symbols)
        if n == 0:
            raise ValueError("input must contain at least one symbol")
        skip = self._skip_ids(excluded)
        dead = self._dead
        root_children = self._root.children
        unary = self._unary
        passive = [[None] * (n + 1) for _ in range(n)]
        active = [[None] * (n + 1) for _ in range(n)]
        for span in range(1, n + 1):
            for i in range(n - span + 1):
                j = i + span
                act = set()
                if span == 1:
                    cell = {symbols[i]}
                else:
                    cell = set()
                    for k in range(i + 1, j):
                        left = active[i][k]
                        right = passive[k][j]
                        if not left or not right:
                            continue
                        for node in left:
                            ch = node.children
                            if len(ch) <= len(right):
                                for sym, nxt in ch.items():
                                    if sym in right:
                                        act.add(nxt)
                            else:
                                for sym in right:
                                    nxt = ch.get(sym)
                                    if nxt is not None:
                                        act.add(nxt)
                    for node in act:
                        for rid, r, _, _ in node.complete:
                            if not dead[rid] and rid not in skip:
                                cell.add(r.lhs)
                agenda = list(cell)
                while agenda:
                    sym = agenda.pop()
                    for rid, r, _, _ in unary.get(sym, ()):
                        if r.lhs not in cell and not dead[rid] and rid not in skip:
                            cell.add(r.lhs)
                            agenda.append(r.lhs)
                passive[i][j] = cell
                if j < n or i > 0:
                    for sym in cell:
                        nxt = root_children.get(sym)
                        if nxt is not None:
                            act.add(nxt)
                    active[i][j] = act
        return goal in passive[0][n]

    # -- Viterbi -------------------------------------------------------------

    def _chart(self, symbols, skip):
        n = len(symbols)
        dead = self._dead
        root_children = self._root.children
        unary = self._unary
        passive = [[None] * (n + 1) for _ in range(n)]
        active = [[None] * (n + 1) for _ in range(n)]
        for span in range(1, n + 1):
            for i in range(n - span + 1):
                j = i + span
                act = {}
                cands = {}
                if span == 1:
                    cands[symbols[i]] = (0.0, _LEAF_KEY, (_LEAF,))
                else:
                    for k in range(i + 1, j):
                        left = active[i][k]
                        right = passive[k][j]
                        if not left or not right:
                            continue
                        for node, (lscore, lsplits, _) in left.items():
                            ch = node.children
                            if len(ch) <= len(right):
                                pairs = [(s, nxt) for s, nxt in ch.items() if s in right]
                            else:
                                pairs = [(s, ch[s]) for s in right if s in ch]
                            for sym, nxt in pairs:
                                score = lscore + right[sym][0]
                                splits = lsplits + (k,)
                                old = act.get(nxt)
                                if old is None or _better(score, splits, old):
                                    act[nxt] = (score, splits, (node, k, sym))
                    for node, (ascore, splits, _) in act.items():
                        for rid, r, lp, rkey in node.complete:
                            if dead[rid] or rid in skip:
                                continue
                            score = ascore + lp
                            key = (rkey, splits)
                            old = cands.get(r.lhs)
                            if old is None or _better(score, key, old):
                                cands[r.lhs] = (score, key, (_NARY, r, node))
                cell = self._closure(cands, unary, dead, skip)
                passive[i][j] = cell
                if j < n or i > 0:
                    for sym, entry in cell.items():
                        nxt = root_children.get(sym)
                        if nxt is not None:
                            act[nxt] = (entry[0], (), (None, i, sym))
                active[i][j] = act
        return passive, active

    @staticmethod
    def _closure(cands, unary, dead, skip):
        final = {}
        heap = [(-e[0], e[1], sym) for sym, e in cands.items()]
        heapq.heapify(heap)
        while heap:
            _, _, sym = heapq.heappop(heap)
            if sym in final:
                continue
            entry = cands[sym]
            final[sym] = entry
            for rid, r, lp, rkey in unary.get(sym, ()):
                if dead[rid] or rid in skip or r.lhs in final:
                    continue
                score = entry[0] + lp
                key = (rkey, ())
                old = cands.get(r.lhs)
                if old is None or _better(score, key, old):
                    cands[r.lhs] = (score, key, (_UNARY, r, sym))
                    heapq.heappush(heap, (-score, key, r.lhs))
        return final

    def _build(self, passive, active, leaves, i, j, sym):
        _, _, bp = passive[i][j][sym]
        if bp[0] == _LEAF:
            leaf = leaves[i]
            return Tree.leaf(leaf.label, leaf.word)
        if bp[0] == _UNARY:
            return Tree(bp[1].lhs, [self._build(passive, active, leaves, i, j, bp[2])])
        r, node = bp[1], bp[2]
        children = []
        end = j
        while True:
            prev, k, csym = active[i][end][node][2]
            if prev is None:
                children.append(self._build(passive, active, leaves, i, end, csym))
                break
            children.append(self._build(passive, active, leaves, k, end, csym))
            node, end = prev, k
        children.reverse()
        return Tree(r.lhs, children)

    def viterbi(self, symbols: Sequence[str], goal: str,
                excluded: Iterable[Rule] = (), words=None) -> ParseResult:
        """Most probable derivation of ``symbols`` from ``goal``."""
        return self.best_parse(symbols, [goal], excluded, words)

    def best_parse(self, symbols, goals, excluded=(), words=None) -> ParseResult:
        """Best derivation over several goal categories; earlier goals win ties."""
        if not symbols:
            raise ValueError("input must contain at least one symbol")
        passive, active = self._chart(symbols, self._skip_ids(excluded))
        top = passive[0][len(symbols)]
        best = None
        for goal in goals:
            entry = top.get(goal)
            if entry is None:
                continue
            if best is None or entry[0] > best[1][0] + _TIE_TOL * max(1.0, abs(best[1][0])):
                best = (goal, entry)
        if best is None:
            return ParseResult(False)
        leaves = [Tree.leaf(s, None if words is None else words[i])
                  for i, s in enumerate(symbols)]
        tree = self._build(passive, active, leaves, 0, len(symbols), best[0])
        assign_spans(tree)
        return ParseResult(True, tree, best[1][0])

    def parse_sentence(self, pos_tags: Sequence[str], roots: Sequence[str],
                       words=None) -> ParseResult:
        """Viterbi parse over all roots, or a flagged flat fallback tree.

        The fallback puts every token directly under ``roots[0]``, which
        callers order by frequency.
        """
        if not pos_tags:
            raise ValueError("empty tag sequence")
        result = self.best_parse(pos_tags, roots, words=words)
        if result.recognized:
            return result
        label = roots[0] if roots else "S"
        leaves = [Tree.leaf(t, None if words is None else words[i])
                  for i, t in enumerate(pos_tags)]
        tree = Tree(label, leaves)
        assign_spans(tree)
        return ParseResult(False, tree, None, fallback=True)


def recognize(grammar, symbols, goal, excluded=()) -> bool:
    return ChartParser(grammar, weighted=False).recognize(symbols, goal, excluded)


def viterbi(grammar, symbols, goal, excluded=(), logprobs=None) -> ParseResult:
    return ChartParser(grammar, logprobs=logprobs).viterbi(symbols, goal, excluded)


def parse_sentence(grammar: Grammar, pos_tags, roots=None, words=None) -> ParseResult:
    roots = list(roots) if roots is not None else grammar.default_roots()
    return ChartParser(grammar).parse_sentence(pos_tags, roots, words)


def rules_used(tree: Tree) -> list[Rule]:
    """Rules at the internal nodes of a derivation tree, in pre-order."""
    return [Rule(node.label, tuple(c.label for c in node.children))
            for node in tree.subtrees() if node.children]
