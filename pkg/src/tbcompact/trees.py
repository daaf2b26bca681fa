"""Penn-style bracketed trees: reading, normalization, writing."""
from __future__ import annotations

import re
import sys
from typing import Iterable, Iterator, NamedTuple

TOP = "TOP"
NULL_TAG = "-NONE-"
RESERVED_LABELS = frozenset({"-NONE-", "-LRB-", "-RRB-"})
# -NULL-, *, *T*-1, *U*, *?*, *EXP*-2, ...
NULL_WORD_RE = re.compile(r"^(-NULL-|\*([A-Z?]*\*)?(-\d+)?)$")
_FUNC_TAG_RE = re.compile(r"[-=]")
_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


class TreebankParseError(ValueError):
    """Malformed bracketing, with a 1-based line/column position."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class Token(NamedTuple):
    word: str
    pos: str


class Tree:
    """A constituent tree.

    Internal nodes have a non-empty ``children`` list.  A preterminal has no
    children and carries the surface ``word``.  A bare category leaf (as in a
    derivation of a rule right-hand side) has neither children nor word.
    ``start``/``end`` give the end-exclusive token span once assigned.
    """

    __slots__ = ("label", "children", "word", "start", "end")

    def __init__(self, label, children=(), word=None):
        self.label = sys.intern(label)
        self.children = list(children)
        self.word = word
        self.start = 0
        self.end = 0

    @classmethod
    def leaf(cls, pos, word=None):
        return cls(pos, (), word)

    @property
    def is_leaf(self):
        return not self.children

    @property
    def is_preterminal(self):
        return not self.children

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return (self.label == other.label and self.word == other.word
                and self.children == other.children)

    def __hash__(self):
        return hash((self.label, self.word, tuple(self.children)))

    def __repr__(self):
        return f"Tree({write_tree(self)!r})"

    def __str__(self):
        return write_tree(self)

    def subtrees(self) -> Iterator["Tree"]:
        """Pre-order traversal over all nodes."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def leaves(self) -> list["Tree"]:
        return [node for node in self.subtrees() if node.is_leaf]

    def tokens(self) -> list[Token]:
        return [Token(leaf.word, leaf.label) for leaf in self.leaves()]

    def pos_tags(self) -> list[str]:
        return [leaf.label for leaf in self.leaves()]

    def num_nodes(self):
        return sum(1 for _ in self.subtrees())

    def copy(self):
        out = Tree(self.label, [c.copy() for c in self.children], self.word)
        out.start, out.end = self.start, self.end
        return out


def assign_spans(tree: Tree, start: int = 0) -> int:
    """Number leaves left to right from ``start``; return the end offset."""
    tree.start = start
    if tree.is_leaf:
        tree.end = start + 1
        return tree.end
    pos = start
    for child in tree.children:
        pos = assign_spans(child, pos)
    tree.end = pos
    return pos


def _tokenize(text):
    for lineno, line in enumerate(text.splitlines(), 1):
        if line.lstrip().startswith("#"):
            continue
        for m in _TOKEN_RE.finditer(line):
            yield m.group(), lineno, m.start() + 1


def read_treebank(text: str) -> list[Tree]:
    """Parse concatenated bracketed s-expressions into trees.

    An unlabeled outermost bracket becomes a ``TOP`` node.  No normalization
    is applied.  Raises :class:`TreebankParseError` on malformed input.
    """
    tokens = list(_tokenize(text))
    _check_balance(tokens)
    trees = []
    # each stack frame: [label, children, words, line, col]
    stack = []
    pending_label = False
    for tok, line, col in tokens:
        if tok == "(":
            stack.append([None, [], [], line, col])
            pending_label = True
            continue
        if tok == ")":
            label, children, words, fline, fcol = stack.pop()
            pending_label = False
            node = _build_node(label, children, words, fline, fcol)
            if stack:
                stack[-1][1].append(node)
            else:
                trees.append(node)
            continue
        if not stack:
            raise TreebankParseError(f"token {tok!r} outside brackets", line, col)
        if pending_label:
            stack[-1][0] = tok
            pending_label = False
        else:
            stack[-1][2].append(tok)
    for tree in trees:
        assign_spans(tree)
    return trees


def _check_balance(tokens):
    depth = 0
    for tok, line, col in tokens:
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise TreebankParseError("unexpected ')'", line, col)
    if depth:
        line, col = (tokens[-1][1], tokens[-1][2] + 1) if tokens else (1, 1)
        raise TreebankParseError(
            f"end of input with {depth} unclosed '('", line, col)


def _build_node(label, children, words, line, col):
    if label is None:
        label = TOP
    if words and children:
        raise TreebankParseError(
            f"node {label!r} mixes words and constituents", line, col)
    if len(words) > 1:
        raise TreebankParseError(
            f"preterminal {label!r} dominates {len(words)} tokens", line, col)
    if words:
        return Tree.leaf(label, words[0])
    if not children:
        raise TreebankParseError(f"empty constituent {label!r}", line, col)
    return Tree(label, children)


def iter_treebank_files(paths: Iterable[str]) -> Iterator[Tree]:
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            yield from read_treebank(fh.read())


def strip_label(label: str) -> str:
    """Cut function tags and coindices: ``NP-SBJ=2`` -> ``NP``."""
    label = label.strip()
    if label in RESERVED_LABELS:
        return label
    m = _FUNC_TAG_RE.search(label, 1)
    return label[:m.start()] if m else label


def is_null(leaf: Tree) -> bool:
    return leaf.label == NULL_TAG or (
        leaf.word is not None and NULL_WORD_RE.match(leaf.word) is not None)


def normalize(tree: Tree) -> Tree | None:
    """Strip function tags, drop null elements and emptied nodes.

    Returns a new tree with fresh spans, or ``None`` if nothing survives.
    """
    out = _normalize(tree)
    if out is not None:
        assign_spans(out)
    return out


def _normalize(node):
    if node.is_leaf:
        if is_null(node):
            return None
        return Tree(strip_label(node.label), (), node.word)
    kids = [k for k in map(_normalize, node.children) if k is not None]
    if not kids:
        return None
    return Tree(strip_label(node.label), kids)


def strip_top(tree: Tree) -> Tree:
    """Remove an unlabeled wrapper with a single child."""
    if tree.label == TOP and len(tree.children) == 1:
        return tree.children[0]
    return tree


def collapse_unary(tree: Tree) -> Tree:
    """Replace every single-child internal node by its child.

    ``S[NP[-NULL-], VP[VB, NP[QP[..]]], .]`` becomes ``S[VP[VB, QP[..]], .]``
    after normalization, so no unary rules are ever read off.
    """
    while len(tree.children) == 1:
        tree = tree.children[0]
    if tree.is_leaf:
        out = Tree(tree.label, (), tree.word)
    else:
        out = Tree(tree.label, [collapse_unary(c) for c in tree.children])
    assign_spans(out, tree.start)
    return out


def write_tree(tree: Tree) -> str:
    """Single-line bracketed form.  ``TOP`` is written unlabeled."""
    parts = []
    _write(tree, parts)
    return "".join(parts)


def _write(node, parts):
    if node.is_leaf:
        if node.word is None:
            parts.append(node.label)
        else:
            parts.append(f"({node.label} {node.word})")
        return
    parts.append("( " if node.label == TOP else f"({node.label} ")
    for i, child in enumerate(node.children):
        if i:
            parts.append(" ")
        _write(child, parts)
    parts.append(")")


def write_treebank(trees: Iterable[Tree]) -> str:
    return "".join(write_tree(t) + "\n" for t in trees)
