"""Treebank grammar extraction, compaction, parsing and evaluation."""
__version__ = "0.1.0"

from .compaction import (CompactionReport, compact, linguistic_compact,
                         staged_compact, threshold)
from .estimators import (GrammarCompactor, GrammarExtractor, RuleThreshold,
                         TreebankParser)
from .evaluation import EvalReport, evaluate_corpus, extract_brackets, score_pair
from .grammar import (Grammar, GrowthCurve, Rule, extract_rules,
                      grammar_from_trees, growth_curve, read_grammar, rule,
                      write_grammar)
from .parser import ChartParser, ParseResult, parse_sentence, recognize, viterbi
from .synth import GeneratorConfig, default_base_grammar, flatten, generate
from .trees import (Tree, TreebankParseError, collapse_unary, normalize,
                    read_treebank, write_tree, write_treebank)

__all__ = [
    "ChartParser", "CompactionReport", "EvalReport", "GeneratorConfig",
    "Grammar", "GrammarCompactor", "GrammarExtractor", "GrowthCurve",
    "ParseResult", "Rule", "RuleThreshold", "Tree", "TreebankParseError",
    "TreebankParser", "collapse_unary", "compact", "default_base_grammar",
    "evaluate_corpus", "extract_brackets", "extract_rules", "flatten",
    "generate", "grammar_from_trees", "growth_curve", "linguistic_compact",
    "normalize", "parse_sentence", "read_grammar", "read_treebank",
    "recognize", "rule", "score_pair", "staged_compact", "threshold",
    "viterbi", "write_grammar", "write_tree", "write_treebank",
]
