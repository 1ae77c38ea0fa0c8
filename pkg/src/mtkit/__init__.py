"""mtkit: data tooling for multilingual low-resource MT experiments.

Covers the full two-stage recipe: aligned bitext corpora with provenance
manifests, BPE / overlap-aware BPE subword vocabularies, vocabulary
diagnostics, direction-tagged and balance-capped training mixtures,
lexical stand-in translators, synthetic bitext (back-translation and
pivoting), BLEU/spBLEU/chrF evaluation, and a config-driven pipeline
that runs the whole experiment deterministically.
"""

from .corpus import (
    DEFAULT_LANGUAGES,
    BitextCorpus,
    CorpusStats,
    Provenance,
    SentencePair,
    clean_corpus,
    concat_corpora,
    corpus_stats,
    load_bitext,
    split_validation,
    write_bitext,
)
from .vocab import (
    DEFAULT_HRL,
    DEFAULT_LRL,
    END_OF_WORD,
    LangCorpusSet,
    VocabConfig,
    Vocabulary,
    default_special_tokens,
    load_vocabulary,
    pretokenize,
    train_bpe,
    train_obpe,
)
from .vocab_metrics import (
    avg_tokens_per_pair,
    representation_change,
    speed_report,
    vocabulary_report,
)
from .translator import (
    NULL_WORD,
    ExternalProcessTranslator,
    IdentityTranslator,
    Lexicon,
    LexiconTranslator,
    RoutingTranslator,
    TranslatorModel,
    load_translator,
    train_lexicon,
)
from .synthesis import backtranslate, mix_real_synthetic, pivot_synthesize
from .dataset_builder import (
    BalancePlan,
    DirectionSpec,
    PlanEntry,
    TrainingMixture,
    build_stage1_mixture,
    build_stage2_mixture,
    downsample,
    export_mixture,
    make_balance_plan,
    parse_direction,
    tag_direction,
)
from .metrics import (
    BleuConfig,
    ChrfConfig,
    EvalReport,
    EvalRow,
    bleu,
    chrf,
    evaluate_directions,
    select_best,
    spbleu,
)
from .pipeline import (
    STEPS,
    RunResult,
    load_multiparallel,
    run_pipeline,
    validate_config,
)
from .toy import generate_toy_data, new_direction_labels
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BalancePlan", "BitextCorpus", "BleuConfig", "ChrfConfig", "CorpusStats",
    "DEFAULT_HRL", "DEFAULT_LANGUAGES", "DEFAULT_LRL", "DirectionSpec",
    "END_OF_WORD", "EvalReport", "EvalRow", "ExternalProcessTranslator",
    "IdentityTranslator", "LangCorpusSet", "Lexicon", "LexiconTranslator",
    "NULL_WORD", "PlanEntry", "Provenance", "RoutingTranslator", "RunResult",
    "STEPS", "SentencePair", "TrainingMixture", "TranslatorModel",
    "VocabConfig", "Vocabulary", "avg_tokens_per_pair", "backtranslate",
    "bleu", "build_stage1_mixture", "build_stage2_mixture", "chrf",
    "clean_corpus", "concat_corpora", "corpus_stats",
    "default_special_tokens", "downsample", "errors", "evaluate_directions",
    "export_mixture", "generate_toy_data", "load_bitext",
    "load_multiparallel", "load_translator", "load_vocabulary",
    "make_balance_plan", "mix_real_synthetic", "new_direction_labels",
    "parse_direction", "pivot_synthesize", "pretokenize",
    "representation_change", "run_pipeline", "select_best", "speed_report",
    "spbleu", "split_validation", "tag_direction", "train_bpe",
    "train_lexicon", "train_obpe", "validate_config", "vocabulary_report",
    "write_bitext", "__version__",
]
