"""wirref: who is "we"? Referent disambiguation for German 1PL pronouns in
parliamentary debates - corpus handling, weak supervision, baselines,
agreement statistics and per-party analyses."""

__version__ = "0.1.0"

from .annotation import RefClass  # noqa: F401
from .corpus import (  # noqa: F401
    PRONOUN_INVENTORY,
    PronounInstance,
    Segment,
    Token,
    context_window,
    corpus_stats,
    extract_instances,
    ingest,
    split_pair,
)
from .depmatch import Pattern, compile_pattern, load_patterns, match, match_all  # noqa: F401
from .weaksup import (  # noqa: F401
    build_matrix,
    downsample,
    fit_label_model,
    majority_vote,
    predict_silver,
    sample_for_review,
)
