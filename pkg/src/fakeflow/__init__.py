"""fakeflow: fake news detection from the flow of affective information
across document segments."""

__version__ = "0.1.0"

from .corpus import (
    RawArticle,
    SegmentedDocument,
    TokenizedDocument,
    Vocabulary,
    build_vocabulary,
    encode,
    load_corpus,
    merge_source_lists,
    project_and_sample,
    segment,
    split_train_val,
    tokenize,
)
from .evaluation import (
    EvaluationReport,
    McNemarResult,
    compute_metrics,
    majority_baseline,
    mcnemar,
    mcnemar_from_counts,
)
from .lexicon import (
    AffectFeatureMatrix,
    CategoryLexicon,
    LexiconSet,
    RatingLexicon,
    extract_affect,
    feature_names,
    load_category_lexicon,
    load_lexicon_set,
    load_rating_lexicon,
)
from .model import Example, FakeFlowConfig, FakeFlowModel, ForwardTrace
from .report import attention_profile, emit_plot_data, flow_statistics, highlight_emotions
from .train import SearchSpace, TrainConfig, TrialResult, random_search, select_n_segments, train

__all__ = [
    "AffectFeatureMatrix",
    "CategoryLexicon",
    "EvaluationReport",
    "Example",
    "FakeFlowConfig",
    "FakeFlowModel",
    "ForwardTrace",
    "LexiconSet",
    "McNemarResult",
    "RatingLexicon",
    "RawArticle",
    "SearchSpace",
    "SegmentedDocument",
    "TokenizedDocument",
    "TrainConfig",
    "TrialResult",
    "Vocabulary",
    "attention_profile",
    "build_vocabulary",
    "compute_metrics",
    "emit_plot_data",
    "encode",
    "extract_affect",
    "feature_names",
    "flow_statistics",
    "highlight_emotions",
    "load_category_lexicon",
    "load_corpus",
    "load_lexicon_set",
    "load_rating_lexicon",
    "majority_baseline",
    "mcnemar",
    "mcnemar_from_counts",
    "merge_source_lists",
    "project_and_sample",
    "random_search",
    "segment",
    "select_n_segments",
    "split_train_val",
    "tokenize",
    "train",
]
