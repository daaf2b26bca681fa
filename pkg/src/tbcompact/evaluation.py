"""PARSEVAL bracket scoring in the evalb convention."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping

from .grammar import Grammar
from .parser import ChartParser
from .trees import TOP, Tree, collapse_unary, strip_top

PUNCTUATION = frozenset({".", ",", ":", "''", "``", "-LRB-", "-RRB-"})


class YieldMismatchError(ValueError):
    pass


def extract_brackets(tree: Tree, punctuation=PUNCTUATION) -> Counter:
    """Multiset of ``(label, start, end)`` over non-punctuation token indices.

    Every internal node except ``TOP`` contributes one bracket; preterminals
    never do.  Brackets covering only punctuation are dropped.
    """
    brackets = Counter()
    _brackets(tree, 0, punctuation, brackets)
    return brackets


def _brackets(node, pos, punctuation, out):
    if node.is_leaf:
        return pos + (node.label not in punctuation)
    start = pos
    for child in node.children:
        pos = _brackets(child, pos, punctuation, out)
    if pos > start and node.label != TOP:
        out[node.label, start, pos] += 1
    return pos


def _unlabel(brackets: Counter) -> Counter:
    out = Counter()
    for (_, start, end), n in brackets.items():
        out[start, end] += n
    return out


def _yield_length(tree, punctuation):
    return sum(leaf.label not in punctuation for leaf in tree.leaves())


def score_pair(gold: Tree, test: Tree, labelled=True,
               punctuation=PUNCTUATION) -> tuple[int, int, int]:
    """Return ``(matched, gold_count, test_count)`` for one sentence."""
    if _yield_length(gold, punctuation) != _yield_length(test, punctuation):
        raise YieldMismatchError(
            f"gold has {_yield_length(gold, punctuation)} scored tokens, "
            f"test has {_yield_length(test, punctuation)}")
    g = extract_brackets(gold, punctuation)
    t = extract_brackets(test, punctuation)
    if not labelled:
        g, t = _unlabel(g), _unlabel(t)
    return sum((g & t).values()), sum(g.values()), sum(t.values())


def _pct(num, den):
    return 100.0 * num / den if den else 0.0


@dataclass
class EvalReport:
    labelled_matched: int = 0
    unlabelled_matched: int = 0
    gold_brackets: int = 0
    test_brackets: int = 0
    sentences_evaluated: int = 0
    fallback_parses: int = 0
    skipped: int = 0
    grammar_size: int | None = None

    @property
    def labelled_recall(self):
        return _pct(self.labelled_matched, self.gold_brackets)

    @property
    def labelled_precision(self):
        return _pct(self.labelled_matched, self.test_brackets)

    @property
    def unlabelled_recall(self):
        return _pct(self.unlabelled_matched, self.gold_brackets)

    @property
    def unlabelled_precision(self):
        return _pct(self.unlabelled_matched, self.test_brackets)

    @property
    def labelled_f1(self):
        r, p = self.labelled_recall, self.labelled_precision
        return 2 * r * p / (r + p) if r + p else 0.0

    def add(self, labelled, unlabelled):
        lm, gold, test = labelled
        self.labelled_matched += lm
        self.unlabelled_matched += unlabelled[0]
        self.gold_brackets += gold
        self.test_brackets += test
        self.sentences_evaluated += 1

    def to_dict(self, full_size=None):
        out = asdict(self)
        out.update(
            labelled_recall=round(self.labelled_recall, 4),
            labelled_precision=round(self.labelled_precision, 4),
            unlabelled_recall=round(self.unlabelled_recall, 4),
            unlabelled_precision=round(self.unlabelled_precision, 4),
        )
        if full_size and self.grammar_size is not None:
            out["reduction_percent"] = round(
                100.0 * (full_size - self.grammar_size) / full_size, 4)
        return out

    def to_json(self, meta=None, full_size=None):
        out = {"meta": dict(meta)} if meta else {}
        out.update(self.to_dict(full_size))
        return json.dumps(out, indent=2) + "\n"


def evaluate_corpus(grammar: Grammar, gold_trees: Iterable[Tree], roots=None,
                    parser: ChartParser | None = None) -> EvalReport:
    """Parse each gold tag sequence and micro-average bracket scores.

    Gold trees are scored with their ``TOP`` wrapper removed and unary chains
    collapsed, matching the shape of trees the grammar can produce.  Fallback
    parses are scored like any other parse and counted separately.
    """
    parser = parser or ChartParser(grammar)
    roots = list(roots) if roots is not None else grammar.default_roots()
    report = EvalReport(grammar_size=len(grammar))
    for gold in gold_trees:
        gold = collapse_unary(strip_top(gold))
        tokens = gold.tokens()
        result = parser.parse_sentence([t.pos for t in tokens], roots,
                                       [t.word for t in tokens])
        try:
            labelled = score_pair(gold, result.tree, True)
            unlabelled = score_pair(gold, result.tree, False)
        except YieldMismatchError:
            report.skipped += 1
            continue
        report.add(labelled, unlabelled)
        report.fallback_parses += result.fallback
    return report


_ROWS = (
    ("Labelled evaluation", None),
    ("Recall", "labelled_recall"),
    ("Precision", "labelled_precision"),
    ("Unlabelled evaluation", None),
    ("Recall", "unlabelled_recall"),
    ("Precision", "unlabelled_precision"),
)


def format_table(columns: Mapping[str, EvalReport], full_size=None,
                 labelled=True, unlabelled=True) -> str:
    """Aligned plain-text table with one column per grammar."""
    names = list(columns)
    rows = []
    for title, attr in _ROWS:
        is_labelled = title.startswith("Labelled") or (
            attr is not None and attr.startswith("labelled"))
        if (is_labelled and not labelled) or (not is_labelled and not unlabelled):
            continue
        if attr is None:
            rows.append((title,))
        else:
            rows.append((title, *(f"{getattr(columns[n], attr):.2f}%" for n in names)))
    rows.append(("Grammar size", *(f"{columns[n].grammar_size:,}" for n in names)))
    if full_size:
        rows.append(("reduction (as % of full)",
                     *(f"{100.0 * (full_size - columns[n].grammar_size) / full_size:.0f}%"
                       for n in names)))
    header = ("", *names)
    width0 = max(len(r[0]) for r in rows + [header])
    widths = [max(len(r[i]) for r in rows + [header] if len(r) > i)
              for i in range(1, len(header))]
    lines = ["  ".join([header[0].ljust(width0)]
                       + [h.rjust(w) for h, w in zip(header[1:], widths)])]
    for r in rows:
        if len(r) == 1:
            lines.append(f"-- {r[0]} --")
        else:
            lines.append("  ".join([r[0].ljust(width0)]
                                   + [c.rjust(w) for c, w in zip(r[1:], widths)]))
    fallbacks = ", ".join(f"{n}: {columns[n].fallback_parses}" for n in names)
    lines.append(f"fallback parses: {fallbacks}")
    return "\n".join(lines) + "\n"
