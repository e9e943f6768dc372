from .lexicon import Lexicon, LexiconError, Verb, default_lexicon, load_lexicon
from .templates import (
    AMBIGUITY_TYPES,
    FAIRNESS_RULE_COUNT,
    Template,
    TemplateError,
    all_templates,
    get_template,
    render_rule,
)
from .detect import DetectResult, detect_ambiguity
from .generate import (
    AmbiguousPrompt,
    Benchmark,
    BenchmarkRecord,
    GenerationConfig,
    GenerationError,
    Interpretation,
    combine_fairness,
    complexify,
    enumerate_interpretations,
    generate_benchmark,
    instantiate_template,
    load_benchmark,
    save_benchmark,
    validate_benchmark,
)

__all__ = [
    "AMBIGUITY_TYPES",
    "AmbiguousPrompt",
    "Benchmark",
    "BenchmarkRecord",
    "DetectResult",
    "FAIRNESS_RULE_COUNT",
    "GenerationConfig",
    "GenerationError",
    "Interpretation",
    "Lexicon",
    "LexiconError",
    "Template",
    "TemplateError",
    "Verb",
    "all_templates",
    "combine_fairness",
    "complexify",
    "default_lexicon",
    "detect_ambiguity",
    "enumerate_interpretations",
    "generate_benchmark",
    "get_template",
    "instantiate_template",
    "load_benchmark",
    "load_lexicon",
    "render_rule",
    "save_benchmark",
    "validate_benchmark",
]
