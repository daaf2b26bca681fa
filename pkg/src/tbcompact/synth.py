"""Synthetic treebanks from a known PCFG, with partial-bracketing noise.

Every sentence draws from its own stream, ``numpy.random.default_rng([seed,
index])`` (PCG64 seeded through SeedSequence), so sentence ``i`` is the same
whatever the corpus size and whatever the flattening probability: the
derivation is drawn first and the flattening decisions after it.
"""
from __future__ import annotations

import bisect
import json
from collections import Counter
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .grammar import Grammar, Rule, read_grammar, write_grammar
from .trees import Tree, assign_spans

RNG_ALGORITHM = "numpy-PCG64/SeedSequence([seed, sentence_index])"


class ConfigError(ValueError):
    pass


def default_base_grammar() -> Grammar:
    text = resources.files(__package__).joinpath("data/base_grammar.txt").read_text()
    return read_grammar(text)


@dataclass
class GeneratorConfig:
    base_grammar: Grammar
    flatten_probability: float = 0.3
    max_depth: int = 8
    sentence_count: int = 1000
    seed: int = 0
    root: str | None = None

    def start_symbol(self):
        if self.root:
            return self.root
        return self.base_grammar.default_roots()[0]

    def validate(self):
        g = self.base_grammar
        if not 0.0 <= self.flatten_probability <= 1.0:
            raise ConfigError("flatten_probability must lie in [0, 1]")
        if self.sentence_count < 0 or self.max_depth < 1:
            raise ConfigError("sentence_count must be >= 0 and max_depth >= 1")
        short = [str(r) for r in g.rules() if len(r.rhs) < 2]
        if short:
            raise ConfigError(f"base grammar has rules shorter than 2: {short}")
        if self.start_symbol() not in g.nonterminals:
            raise ConfigError(f"start symbol {self.start_symbol()!r} has no rules")
        heights = min_heights(g)
        bad = sorted(a for a in g.nonterminals
                     if heights.get(a, float("inf")) > self.max_depth)
        if bad:
            raise ConfigError(
                f"nonterminals cannot terminate within depth {self.max_depth}: {bad}")

    def to_dict(self):
        return {
            "seed": self.seed,
            "flatten_probability": self.flatten_probability,
            "max_depth": self.max_depth,
            "sentence_count": self.sentence_count,
            "root": self.start_symbol(),
            "rng": RNG_ALGORITHM,
            "base_grammar": write_grammar(self.base_grammar).splitlines(),
        }


def min_heights(grammar: Grammar) -> dict[str, int]:
    """Smallest tree height each nonterminal can reach (preterminals are 0)."""
    nts = grammar.nonterminals
    height: dict[str, int] = {}
    rules = grammar.rules()
    changed = True
    while changed:
        changed = False
        for r in rules:
            kids = [0 if s not in nts else height.get(s) for s in r.rhs]
            if None in kids:
                continue
            h = 1 + max(kids)
            if h < height.get(r.lhs, h + 1):
                height[r.lhs] = h
                changed = True
    return height


class _TooDeep(Exception):
    pass


class _Sampler:
    def __init__(self, grammar: Grammar):
        self.nts = grammar.nonterminals
        self.options = {}
        for lhs in sorted(self.nts):
            rules = sorted((r for r in grammar.rules() if r.lhs == lhs),
                           key=lambda r: r.rhs)
            cum = np.cumsum([r.count for r in rules], dtype=float)
            self.options[lhs] = (rules, list(cum / cum[-1]))

    def expand(self, sym, rng, budget, used):
        if budget == 0:
            raise _TooDeep
        rules, cum = self.options[sym]
        idx = min(bisect.bisect_right(cum, rng.random()), len(rules) - 1)
        r = rules[idx]
        used.append(r.key)
        kids = [self.expand(s, rng, budget - 1, used) if s in self.nts
                else Tree.leaf(s, s.lower()) for s in r.rhs]
        return Tree(r.lhs, kids)


def sentence_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _flatten(node, p, rng):
    kids = []
    for child in node.children:
        if child.is_leaf:
            kids.append(Tree.leaf(child.label, child.word))
            continue
        splice = rng.random() < p
        flat = _flatten(child, p, rng)
        if splice:
            kids.extend(flat.children)
        else:
            kids.append(flat)
    return Tree(node.label, kids)


def flatten(tree: Tree, p: float, seed) -> Tree:
    """Splice out each internal non-root node independently with probability p.

    ``seed`` is an int or a numpy Generator.  Decisions are drawn top-down in
    pre-order; the yield is unchanged.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if tree.is_leaf:
        return Tree.leaf(tree.label, tree.word)
    out = _flatten(tree, p, rng)
    assign_spans(out)
    return out


def generate(config: GeneratorConfig, max_attempts=1000):
    """Sample ``(trees, usage)``; usage counts every base rule drawn."""
    config.validate()
    sampler = _Sampler(config.base_grammar)
    start = config.start_symbol()
    usage: Counter = Counter()
    trees = []
    for index in range(config.sentence_count):
        rng = sentence_rng(config.seed, index)
        for _ in range(max_attempts):
            used = []
            try:
                tree = sampler.expand(start, rng, config.max_depth, used)
                break
            except _TooDeep:
                continue
        else:
            raise ConfigError(
                f"sentence {index}: no derivation within depth "
                f"{config.max_depth} after {max_attempts} attempts")
        usage.update(used)
        tree = flatten(tree, config.flatten_probability, rng)
        trees.append(tree)
    return trees, usage


def usage_rules(usage: Counter) -> list[Rule]:
    return [Rule(lhs, rhs, n) for (lhs, rhs), n in sorted(usage.items())]


def sidecar_json(config: GeneratorConfig, usage: Counter, meta=None) -> str:
    out = {"meta": dict(meta)} if meta else {}
    out.update(config.to_dict())
    out["usage_log"] = {f"{lhs} -> {' '.join(rhs)}": n
                        for (lhs, rhs), n in sorted(usage.items())}
    out["distinct_rules_used"] = len(usage)
    return json.dumps(out, indent=2) + "\n"
