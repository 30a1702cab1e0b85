"""cellnas: immune-network search over cell-based neural architectures.

Candidate cells are two-component codes (layer types + triangular
connection bits); the search clones and hypermutates high-affinity
antibodies, suppresses near-duplicates, and freezes each stage's best cell
as the prefix for the next. Affinity comes from a pluggable evaluator: a
deterministic surrogate landscape for desk-scale work, or an external
training worker over a line-delimited JSON protocol.
"""

from cellnas._core import BACKEND
from cellnas.engine import (
    Antibody,
    ConfigError,
    SearchConfig,
    SearchReport,
    StageMemory,
    TerminationDecision,
    check_termination,
    run_generation,
    run_id_for,
    run_search,
    run_stage,
)
from cellnas.evaluators import (
    CachedEvaluator,
    EvaluationBudget,
    EvaluationError,
    EvaluationRequest,
    EvaluationResponse,
    ProtocolError,
    SurrogateEvaluator,
    SurrogateLandscape,
    WorkerEvaluator,
    surrogate_evaluate,
)
from cellnas.genotype import (
    LAYER_CATALOG,
    CellCode,
    CodeError,
    LayerKind,
    OpClass,
    connection_bit_index,
    from_text,
    random_code,
    second_component_length,
    to_text,
    validate,
)
from cellnas.graph import (
    CellGraph,
    ModelSpec,
    decode,
    dump_graph,
    export_dot,
    graph_records,
    prune_unreachable,
)
from cellnas.mutation import (
    MutationParams,
    MutationTier,
    assign_tier,
    mutate,
    mutation_rate,
)
from cellnas.similarity import (
    SimilarityVerdict,
    hamming,
    interspecific_similar,
    jaccard,
    suppress,
    tanimoto,
)

__version__ = "0.1.0"

__all__ = [
    "Antibody",
    "BACKEND",
    "CachedEvaluator",
    "CellCode",
    "CellGraph",
    "CodeError",
    "ConfigError",
    "EvaluationBudget",
    "EvaluationError",
    "EvaluationRequest",
    "EvaluationResponse",
    "LAYER_CATALOG",
    "LayerKind",
    "ModelSpec",
    "MutationParams",
    "MutationTier",
    "OpClass",
    "ProtocolError",
    "SearchConfig",
    "SearchReport",
    "SimilarityVerdict",
    "StageMemory",
    "SurrogateEvaluator",
    "SurrogateLandscape",
    "TerminationDecision",
    "WorkerEvaluator",
    "assign_tier",
    "check_termination",
    "connection_bit_index",
    "decode",
    "dump_graph",
    "export_dot",
    "from_text",
    "graph_records",
    "hamming",
    "interspecific_similar",
    "jaccard",
    "mutate",
    "mutation_rate",
    "prune_unreachable",
    "random_code",
    "run_generation",
    "run_id_for",
    "run_search",
    "run_stage",
    "second_component_length",
    "suppress",
    "surrogate_evaluate",
    "tanimoto",
    "to_text",
    "validate",
]
