"""scikit-learn style wrappers so the pipeline composes with ``Pipeline``.

``X`` is a treebank (trees or bracketed text) for the extractor and the
parser, and a :class:`~tbcompact.grammar.Grammar` for the grammar-to-grammar
transformers::

    Pipeline([("extract", GrammarExtractor()),
              ("threshold", RuleThreshold(min_count=2)),
              ("compact", GrammarCompactor(mode="linguistic"))]).fit_transform(trees)
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .compaction import (ORDERS, compact, linguistic_compact, threshold,
                         threshold_report)
from .evaluation import EvalReport, evaluate_corpus
from .grammar import Grammar, grammar_from_trees, read_grammar
from .parser import ChartParser
from .trees import Tree, normalize, read_treebank

MODES = ("naive", "linguistic")


def check_trees(X, normalized=False) -> list[Tree]:
    """Coerce ``X`` to a list of normalized trees.

    Accepts bracketed text or an iterable of :class:`Tree`.  Trees that
    normalize to nothing are dropped.  ``normalized=True`` skips the
    normalization pass for input known to be clean.
    """
    if isinstance(X, str):
        X = read_treebank(X)
    elif isinstance(X, Tree):
        raise TypeError("expected a sequence of trees, got a single Tree")
    out = []
    for t in X:
        if not isinstance(t, Tree):
            raise TypeError(f"expected Tree, got {type(t).__name__}")
        t = t if normalized else normalize(t)
        if t is not None:
            out.append(t)
    return out


def check_grammar(X) -> Grammar:
    if isinstance(X, Grammar):
        return X
    if isinstance(X, str):
        return read_grammar(X)
    raise TypeError(f"expected Grammar or grammar text, got {type(X).__name__}")


def check_tag_sequences(X) -> list[tuple[list[str], list[str] | None]]:
    """Coerce ``X`` to ``(tags, words)`` pairs; trees contribute their tokens."""
    out = []
    for item in X:
        if isinstance(item, Tree):
            toks = item.tokens()
            out.append(([t.pos for t in toks], [t.word for t in toks]))
        elif isinstance(item, str):
            raise TypeError("tag sequences must be lists of tags, not strings")
        else:
            tags = list(item)
            if not tags:
                raise ValueError("empty tag sequence")
            out.append((tags, None))
    return out


def _check_params(mode=None, ratio=None, order=None, min_count=None):
    if mode is not None and mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if ratio is not None and not ratio > 0:
        raise ValueError("ratio must be positive")
    if order is not None and isinstance(order, str) and order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}, got {order!r}")
    if min_count is not None and min_count < 1:
        raise ValueError("min_count must be >= 1")


class GrammarExtractor(TransformerMixin, BaseEstimator):
    """Treebank -> counted grammar."""

    def __init__(self, normalized=False):
        self.normalized = normalized

    def fit(self, X, y=None):
        trees = check_trees(X, self.normalized)
        self.grammar_ = grammar_from_trees(trees)
        self.n_trees_ = len(trees)
        self.n_tokens_ = sum(len(t.leaves()) for t in trees)
        return self

    def transform(self, X):
        return grammar_from_trees(check_trees(X, self.normalized))

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).grammar_


class RuleThreshold(TransformerMixin, BaseEstimator):
    """Drop rules seen fewer than ``min_count`` times."""

    def __init__(self, min_count=2):
        self.min_count = min_count

    def fit(self, X, y=None):
        _check_params(min_count=self.min_count)
        self.grammar_, self.report_ = threshold_report(check_grammar(X), self.min_count)
        return self

    def transform(self, X):
        _check_params(min_count=self.min_count)
        return threshold(check_grammar(X), self.min_count)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).grammar_


class GrammarCompactor(TransformerMixin, BaseEstimator):
    """Naive or probability-guided compaction of a grammar."""

    def __init__(self, mode="naive", ratio=1.0, order="flat-first",
                 random_state=None):
        self.mode = mode
        self.ratio = ratio
        self.order = order
        self.random_state = random_state

    def _run(self, grammar):
        _check_params(self.mode, self.ratio, self.order)
        if self.mode == "naive":
            return compact(grammar, self.order, self.random_state)
        return linguistic_compact(grammar, self.ratio, self.order, self.random_state)

    def fit(self, X, y=None):
        self.grammar_, self.report_ = self._run(check_grammar(X))
        return self

    def transform(self, X):
        return self._run(check_grammar(X))[0]

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).grammar_


class TreebankParser(BaseEstimator):
    """Extract, optionally threshold and compact, then Viterbi-parse.

    Thresholding is applied before compaction.  ``predict`` takes tag
    sequences (or trees, whose tokens are used) and returns trees, falling
    back to a flat tree when the grammar has no parse.
    """

    def __init__(self, min_count=1, compaction=None, ratio=1.0,
                 order="flat-first", random_state=None):
        self.min_count = min_count
        self.compaction = compaction
        self.ratio = ratio
        self.order = order
        self.random_state = random_state

    def fit(self, X, y=None):
        _check_params(self.compaction, self.ratio, self.order, self.min_count)
        trees = check_trees(X)
        self.full_grammar_ = grammar_from_trees(trees)
        grammar = self.full_grammar_
        if self.min_count > 1:
            grammar = threshold(grammar, self.min_count)
        self.report_ = None
        if self.compaction == "naive":
            grammar, self.report_ = compact(grammar, self.order, self.random_state)
        elif self.compaction == "linguistic":
            grammar, self.report_ = linguistic_compact(
                grammar, self.ratio, self.order, self.random_state)
        self.grammar_ = grammar
        self.roots_ = grammar.default_roots()
        self.parser_ = ChartParser(grammar)
        return self

    def predict(self, X) -> list[Tree]:
        check_is_fitted(self, "parser_")
        return [self.parser_.parse_sentence(tags, self.roots_, words).tree
                for tags, words in check_tag_sequences(X)]

    def evaluate(self, X) -> EvalReport:
        check_is_fitted(self, "parser_")
        return evaluate_corpus(self.grammar_, check_trees(X), self.roots_, self.parser_)

    def score(self, X, y=None) -> float:
        """Labelled bracket F1 on gold trees, as a fraction."""
        return self.evaluate(X).labelled_f1 / 100.0
