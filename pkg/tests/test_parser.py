import math
import random

import pytest

from oracles import (best_derivation, close, derivation_probability,
                     random_grammar, sample_yield)
from tbcompact.grammar import Grammar, rule
from tbcompact.parser import (ChartParser, DegenerateGrammarError, parse_sentence,
                              recognize, rules_used, viterbi)
from tbcompact.trees import write_tree

COORD_INPUT = ["DT", "NN", "CC", "DT", "NN"]


def test_recognize_examples(coord_grammar, unary_cycle_grammar):
    two = Grammar([rule("NP -> NP CC NP"), rule("NP -> DT NN")])
    assert recognize(two, COORD_INPUT, "NP")
    only = Grammar([rule("NP -> DT NN")])
    assert not recognize(only, ["DT", "NN"], "NP", excluded=[rule("NP -> DT NN")])
    assert recognize(unary_cycle_grammar, ["B", "B"], "A", excluded=[rule("A -> B B")])
    assert recognize(coord_grammar, COORD_INPUT, "NP", excluded=[rule("NP -> DT NN CC DT NN")])


def test_unknown_symbols_fail_quietly(coord_grammar):
    assert not recognize(coord_grammar, ["DT", "XYZ"], "NP")
    assert not recognize(coord_grammar, ["DT", "NN"], "NOPE")
    assert not viterbi(coord_grammar, ["DT", "XYZ"], "NP").recognized


def test_goal_matches_single_leaf(coord_grammar):
    assert recognize(coord_grammar, ["NP"], "NP")
    assert viterbi(coord_grammar, ["NP"], "NP").logprob == 0.0


def test_empty_input_rejected(coord_grammar):
    with pytest.raises(ValueError):
        recognize(coord_grammar, [], "NP")
    with pytest.raises(ValueError):
        parse_sentence(coord_grammar, [])


def test_viterbi_coordination(coord_grammar):
    flat = rule("NP -> DT NN CC DT NN")
    result = viterbi(coord_grammar, COORD_INPUT, "NP", excluded=[flat])
    assert result.recognized
    assert result.prob == pytest.approx((20 / 122) * (100 / 122) ** 2, rel=1e-12)
    assert result.prob == pytest.approx(0.1101, abs=5e-5)
    assert write_tree(result.tree) == "(NP (NP DT NN) CC (NP DT NN))"
    probs = {k: math.exp(v) for k, v in coord_grammar.logprobs().items()}
    oracle = best_derivation([r for r in coord_grammar.rules() if r != flat], probs,
                             COORD_INPUT, "NP")
    assert close(oracle, result.prob)


def test_viterbi_prefers_flat_rule_when_more_probable():
    g = Grammar([rule("NP -> DT NN CC DT NN", 100), rule("NP -> NP CC NP", 1),
                 rule("NP -> DT NN", 1)])
    result = viterbi(g, COORD_INPUT, "NP")
    assert write_tree(result.tree) == "(NP DT NN CC DT NN)"
    assert result.prob == pytest.approx(100 / 102)


def test_viterbi_trivial_probability_one():
    g = Grammar([rule("S -> A B"), rule("A -> a"), rule("B -> b")])
    result = viterbi(g, ["a", "b"], "S")
    assert result.prob == 1.0 and result.logprob == 0.0
    assert write_tree(result.tree) == "(S (A a) (B b))"
    assert [str(r) for r in rules_used(result.tree)] == ["S -> A B", "A -> a", "B -> b"]


def test_unrecognized_result_is_empty(coord_grammar):
    result = viterbi(coord_grammar, ["CC", "CC"], "NP")
    assert result == (False, None, None, False)
    assert result.prob is None


def test_parse_sentence_examples(coord_grammar):
    g = Grammar([rule("NP -> DT NN")])
    result = parse_sentence(g, ["DT", "NN"], ["NP"], words=["the", "cat"])
    assert write_tree(result.tree) == "(NP (DT the) (NN cat))" and result.prob == 1.0
    two = Grammar([rule("NP -> NP CC NP", 20), rule("NP -> DT NN", 100)])
    assert write_tree(parse_sentence(two, COORD_INPUT, ["NP"]).tree) == "(NP (NP DT NN) CC (NP DT NN))"


def test_parse_sentence_fallback(coord_grammar):
    coord_grammar.roots.update({"NP": 3})
    result = parse_sentence(coord_grammar, ["CC", "DT"], words=["and", "the"])
    assert result.fallback and not result.recognized and result.logprob is None
    assert write_tree(result.tree) == "(NP (CC and) (DT the))"


def test_best_root_across_goals():
    g = Grammar([rule("S -> A B", 1), rule("S -> A C", 3), rule("X -> A B")])
    result = parse_sentence(g, ["A", "B"], ["S", "X"])
    assert result.tree.label == "X" and result.prob == 1.0
    tie = Grammar([rule("S -> A B"), rule("X -> A B")])
    assert parse_sentence(tie, ["A", "B"], ["X", "S"]).tree.label == "X"
    assert parse_sentence(tie, ["A", "B"], ["S", "X"]).tree.label == "S"


def test_tie_break_leftmost_split():
    g = Grammar([rule("NP -> NP CC NP")])
    result = viterbi(g, ["NP", "CC", "NP", "CC", "NP"], "NP")
    assert write_tree(result.tree) == "(NP NP CC (NP NP CC NP))"


def test_tie_break_rule_order():
    g = Grammar([rule("S -> a B"), rule("S -> A b"), rule("A -> a"), rule("B -> b")])
    result = viterbi(g, ["a", "b"], "S")
    assert write_tree(result.tree) == "(S (A a) b)"


def test_tie_break_is_stable_across_insertion_order():
    rules = [rule("S -> a B"), rule("S -> A b"), rule("A -> a"), rule("B -> b")]
    trees = {viterbi(Grammar(random.Random(s).sample(rules, 4)), ["a", "b"], "S").tree
             for s in range(10)}
    assert len(trees) == 1


def test_unary_cycles_terminate():
    g = Grammar([rule("B -> C", 1), rule("B -> b", 1), rule("C -> B", 1), rule("C -> c", 1),
                 rule("A -> B B")])
    result = viterbi(g, ["c", "b"], "A")
    assert write_tree(result.tree) == "(A (B (C c)) (B b))"
    assert result.prob == pytest.approx(0.125)


def test_degenerate_unary_cycle_rejected(unary_cycle_grammar):
    with pytest.raises(DegenerateGrammarError, match="probability-one"):
        ChartParser(unary_cycle_grammar)
    assert recognize(unary_cycle_grammar, ["B"], "C")


def test_discard_is_permanent(coord_grammar):
    p = ChartParser(coord_grammar, weighted=False)
    p.discard(rule("NP -> DT NN"))
    assert not p.is_active(rule("NP -> DT NN"))
    assert not p.recognize(["DT", "NN"], "NP")
    assert p.recognize(COORD_INPUT, "NP")


def _cases(seed, n):
    rng = random.Random(seed)
    while n:
        g = random_grammar(rng)
        try:
            parser = ChartParser(g)
        except DegenerateGrammarError:
            continue
        nts = sorted(g.nonterminals)
        goal = rng.choice(nts)
        if rng.random() < 0.6:
            symbols = sample_yield(g, rng, goal)
        else:
            symbols = [rng.choice(nts + ["a", "b", "c"]) for _ in range(rng.randint(1, 7))]
        if symbols is None:
            continue
        excluded = [rng.choice(g.rules())] if rng.random() < 0.3 else []
        n -= 1
        yield g, parser, symbols, goal, excluded


@pytest.mark.parametrize("seed", range(3))
def test_matches_exhaustive_oracle(seed):
    for g, parser, symbols, goal, excluded in _cases(seed, 100):
        usable = [r for r in g.rules() if r not in excluded]
        probs = {k: math.exp(v) for k, v in g.logprobs().items()}
        expected = best_derivation(usable, probs, symbols, goal)
        result = parser.viterbi(symbols, goal, excluded)
        assert parser.recognize(symbols, goal, excluded) == result.recognized
        assert result.recognized == (expected is not None), (g, symbols, goal)
        if expected is None:
            continue
        assert close(result.prob, expected)
        assert [leaf.label for leaf in result.tree.leaves()] == list(symbols)
        assert result.tree.label == goal
        assert close(derivation_probability(result.tree, usable, probs), expected)


def test_monotonicity():
    rng = random.Random(11)
    for g, parser, symbols, goal, _ in _cases(5, 150):
        before = parser.recognize(symbols, goal)
        extra = random_grammar(rng, max_rules=2)
        bigger = Grammar(list(g.rules()) + [r for r in extra.rules() if r not in g])
        if before:
            assert recognize(bigger, symbols, goal)
        else:
            r = rng.choice(g.rules())
            assert not parser.recognize(symbols, goal, excluded=[r])
