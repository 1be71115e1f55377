"""negfact: rule-based factuality detection for clinical text.

Classifies a target entity in a sentence as affirmed, negated, or
possible using trigger phrases and scope rules, ships baseline/fixed
German trigger sets, projects annotated corpora across languages through
markup-preserving machine translation, and scores predictions per label.
"""

from .core import (
    AnnotatedSentence,
    FactualityLabel,
    MarkupError,
    NormalizationPolicy,
    NormalizedText,
    SpanError,
    normalize,
    parse_tagged,
    read_corpus,
    render_tagged,
    write_corpus,
)
from .engine import (
    Detection,
    EngineConfig,
    LanguageMismatch,
    Precedence,
    classify,
    classify_batch,
    tokenize,
)
from .evaluation import ConfusionMatrix, EvalReport, compare, load_predictions, metrics, score
from .projection import (
    BackendError,
    CorruptionConfig,
    MtBackend,
    ProjectionRecord,
    ProjectionStatus,
    http_backend,
    project_corpus,
    stub_backend,
    validate_translation,
)
from .triggers import (
    Trigger,
    TriggerCategory,
    TriggerMatcher,
    TriggerSet,
    compile_trigger_set,
    load_bundled,
    load_trigger_set,
    validate_trigger_set,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedSentence",
    "BackendError",
    "ConfusionMatrix",
    "CorruptionConfig",
    "Detection",
    "EngineConfig",
    "EvalReport",
    "FactualityLabel",
    "LanguageMismatch",
    "MarkupError",
    "MtBackend",
    "NormalizationPolicy",
    "NormalizedText",
    "Precedence",
    "ProjectionRecord",
    "ProjectionStatus",
    "SpanError",
    "Trigger",
    "TriggerCategory",
    "TriggerMatcher",
    "TriggerSet",
    "classify",
    "classify_batch",
    "compare",
    "compile_trigger_set",
    "http_backend",
    "load_bundled",
    "load_predictions",
    "load_trigger_set",
    "metrics",
    "normalize",
    "parse_tagged",
    "project_corpus",
    "read_corpus",
    "render_tagged",
    "score",
    "stub_backend",
    "tokenize",
    "validate_translation",
    "validate_trigger_set",
    "write_corpus",
    "__version__",
]
