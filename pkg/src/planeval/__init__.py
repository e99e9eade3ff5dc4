"""planeval: step-wise evaluation and decoding for grounded task plans."""

from .aggregate import (
    CorpusSummary,
    EvalReport,
    TaskResult,
    aggregate_corpus,
    aggregate_plan,
    build_report,
    geometric_weights,
)
from .analysis import (
    LengthBucketReport,
    LengthErrorHistogram,
    SplitStats,
    bucket_by_length,
    dataset_stats,
    length_error_histogram,
)
from .env import (
    FlattenConfig,
    ObjectRow,
    ObjectTable,
    encode_environment,
    flatten,
    load_table,
    truncate_encoding,
)
from .generator import (
    DecodeMode,
    DecodeTrace,
    GeneratorRequest,
    GeneratorResponse,
    HttpGeneratorClient,
    ScriptedGenerator,
    build_prompt,
    run_iterative,
    run_single_pass,
)
from .kas import (
    ActionPhrase,
    StepScore,
    extract_key_actions,
    kas_plan,
    kas_step,
    phrase_match_score,
)
from .lexicon import ActionLexicon, default_lexicon, load_lexicon, load_lexicon_file
from .metrics import (
    BleuStepScorer,
    CiderStepScorer,
    IdfTable,
    KasStepScorer,
    StepScorer,
    bleu_step,
    build_idf,
    cider_step,
    score_plan,
)
from .plan import (
    AlignedPair,
    Plan,
    TaskRecord,
    align,
    load_dataset,
    load_predictions,
    parse_plan,
    serialize_plan,
)
from .text import TOKENIZER_ID, tokenize

__version__ = "0.1.0"

__all__ = [
    "ActionLexicon",
    "ActionPhrase",
    "AlignedPair",
    "BleuStepScorer",
    "CiderStepScorer",
    "CorpusSummary",
    "DecodeMode",
    "DecodeTrace",
    "EvalReport",
    "FlattenConfig",
    "GeneratorRequest",
    "GeneratorResponse",
    "HttpGeneratorClient",
    "IdfTable",
    "KasStepScorer",
    "LengthBucketReport",
    "LengthErrorHistogram",
    "ObjectRow",
    "ObjectTable",
    "Plan",
    "ScriptedGenerator",
    "SplitStats",
    "StepScore",
    "StepScorer",
    "TaskRecord",
    "TaskResult",
    "TOKENIZER_ID",
    "aggregate_corpus",
    "aggregate_plan",
    "align",
    "bleu_step",
    "bucket_by_length",
    "build_idf",
    "build_prompt",
    "build_report",
    "cider_step",
    "dataset_stats",
    "default_lexicon",
    "encode_environment",
    "extract_key_actions",
    "flatten",
    "geometric_weights",
    "kas_plan",
    "kas_step",
    "length_error_histogram",
    "load_dataset",
    "load_lexicon",
    "load_lexicon_file",
    "load_predictions",
    "load_table",
    "parse_plan",
    "phrase_match_score",
    "run_iterative",
    "run_single_pass",
    "score_plan",
    "serialize_plan",
    "tokenize",
    "truncate_encoding",
]
