"""Language-adherence evaluation toolkit for multilingual LLMs.

Measures whether a model answers in the language it was asked in (adherence
ratio, cumulative accuracy, cross-lingual answer overlap) from generation
logs, analyzes per-layer parameter deltas between two checkpoints, and emits
freeze plans for partial training of language-related layers.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    FilteredSubset,
    IngestOptions,
    ParallelCorpus,
    QAItem,
    build_filtered_subset,
    ingest_corpus,
)
from .matcher import (  # noqa: F401
    CorrectSets,
    GenerationRecord,
    Verdict,
    collect_sets,
    judge,
    normalize,
)
from .metrics import (  # noqa: F401
    UNDEFINED,
    CoCoColaReport,
    OverlapMatrix,
    build_overlap_matrix,
    build_report,
    cococola_general,
    cococola_simplified,
    cumulative_accuracy,
    delta_accuracy,
    is_defined,
    jaccard,
    known_unknown,
)
