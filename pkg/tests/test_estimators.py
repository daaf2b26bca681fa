import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from conftest import coordination
from tbcompact.estimators import (GrammarCompactor, GrammarExtractor, RuleThreshold,
                                  TreebankParser, check_grammar, check_tag_sequences,
                                  check_trees)
from tbcompact.grammar import grammar_from_trees, rule, write_grammar
from tbcompact.synth import GeneratorConfig, default_base_grammar, generate
from tbcompact.trees import read_treebank, write_tree

TEXT = """
( (S (NP-SBJ (DT the) (NN cat)) (VP (VBD sat)) (. .)) )
( (S (NP (NP (DT a) (NN dog)) (CC and) (NP (DT a) (NN cat))) (VP (VBD ran)) (. .)) )
( (S (NP (DT a) (NN dog) (CC and) (DT a) (NN cat)) (VP (VBD ran)) (. .)) )
"""


def test_params_and_clone():
    est = GrammarCompactor(mode="linguistic", ratio=0.5, order="random", random_state=3)
    assert est.get_params() == {"mode": "linguistic", "ratio": 0.5, "order": "random",
                                "random_state": 3}
    other = clone(est).set_params(ratio=2.0)
    assert other.ratio == 2.0 and est.ratio == 0.5
    parser = TreebankParser(min_count=2, compaction="naive")
    assert clone(parser).get_params()["min_count"] == 2
    assert "RuleThreshold(min_count=3)" == repr(RuleThreshold(3))


def test_extractor_accepts_text_and_trees():
    trees = read_treebank(TEXT)
    a = GrammarExtractor().fit_transform(TEXT)
    b = GrammarExtractor().fit_transform(trees)
    assert a == b == grammar_from_trees(check_trees(trees))
    ext = GrammarExtractor().fit(TEXT)
    assert ext.n_trees_ == 3 and ext.n_tokens_ == 18


def test_pipeline_composition():
    pipe = Pipeline([("extract", GrammarExtractor()),
                     ("threshold", RuleThreshold(min_count=1)),
                     ("compact", GrammarCompactor())])
    out = pipe.fit_transform(TEXT)
    assert rule("NP -> DT NN CC DT NN") not in out
    assert rule("NP -> NP CC NP") in out
    assert pipe.named_steps["compact"].report_.final_size == len(out)


def test_transformers_match_functions(coord_grammar):
    comp = GrammarCompactor().fit(coord_grammar)
    assert comp.grammar_ == comp.transform(coord_grammar)
    text = write_grammar(coord_grammar)
    assert GrammarCompactor().fit_transform(text) == comp.grammar_
    th = RuleThreshold(min_count=3).fit(coord_grammar)
    assert len(th.grammar_) == 2 and th.report_.final_size == 2
    ling = GrammarCompactor(mode="linguistic").fit_transform(coordination(flat=100, coord=1, base=1))
    assert len(ling) == 3


@pytest.mark.parametrize("est", [
    GrammarCompactor(mode="fancy"), GrammarCompactor(ratio=0),
    GrammarCompactor(order="sideways"), RuleThreshold(min_count=0),
])
def test_bad_params_rejected(est, coord_grammar):
    with pytest.raises(ValueError):
        est.fit(coord_grammar)


def test_validation_helpers():
    with pytest.raises(TypeError):
        check_trees(read_treebank(TEXT)[0])
    with pytest.raises(TypeError):
        check_trees(["(S (A a))"])
    with pytest.raises(TypeError):
        check_grammar(42)
    with pytest.raises(TypeError):
        check_tag_sequences(["DT NN"])
    with pytest.raises(ValueError):
        check_tag_sequences([[]])
    assert check_trees("( (NP (-NONE- *)))") == []


def test_treebank_parser():
    parser = TreebankParser()
    with pytest.raises(NotFittedError):
        parser.predict([["DT", "NN"]])
    parser.fit(TEXT)
    (tree,) = parser.predict([["DT", "NN", "VBD", "."]])
    assert write_tree(tree) == "(S (NP DT NN) VBD .)"
    # sentences 2 and 3 share a tag sequence, so one of them must be misparsed
    assert parser.score(TEXT) == pytest.approx(12 / 14)
    report = parser.evaluate(TEXT)
    assert report.sentences_evaluated == 3
    (fallback,) = parser.predict([["CC", "CC"]])
    assert write_tree(fallback) == "(S CC CC)"


def test_parser_with_words_from_trees():
    parser = TreebankParser(compaction="naive").fit(TEXT)
    gold = check_trees(TEXT)
    trees = parser.predict(gold)
    assert [t.tokens() for t in trees] == [g.tokens() for g in gold]
    assert rule("NP -> DT NN CC DT NN") not in parser.grammar_
    assert parser.report_.final_size == len(parser.grammar_)


def test_parser_on_synthetic_corpus():
    train, _ = generate(GeneratorConfig(default_base_grammar(), 0.2, sentence_count=400, seed=1))
    test, _ = generate(GeneratorConfig(default_base_grammar(), 0.2, sentence_count=50, seed=2))
    full = TreebankParser().fit(train)
    small = TreebankParser(min_count=2, compaction="linguistic").fit(train)
    assert len(small.grammar_) < len(full.grammar_)
    assert 0.5 < full.score(test) <= 1.0
