"""Constrained spectral clustering via generalized Laplacian eigenproblems.

Data affinities and must-link constraints form one Laplacian (G);
cannot-link constraints plus a scaled complete "demand" graph form a
second (H). The k smallest finite eigenpairs of L_G x = lambda L_H x
embed the vertices; a threshold sweep (k=2, with an a-posteriori
eigenvalue certificate) or k-means (k>2) produces the clustering.
"""

from .embedding import EmbeddingResult, compute_embedding
from .eigen import EigenSolution, dense_generalized_eigs, generalized_eigs
from .errors import (
    ConstraintConflictError,
    DegenerateEigenvectorError,
    DisconnectedGraphError,
    GraphValidationError,
    IllPosedProblemError,
    IterativeSolveError,
    SpeclustError,
)
from .generators import (
    LabeledPointCloud,
    erdos_renyi_graph,
    four_moons,
    knn_graph,
    noisy_knn,
    sample_constraints,
)
from .graph import (
    DegreeVector,
    WeightedGraph,
    cut,
    demand_cut,
    laplacian_quadratic,
    largest_component,
)
from .merge import ConstraintSet, MergedProblem, auto_weight, merge
from .metrics import QualityReport, badness, brute_force_phi, rand_index
from .operators import LaplacianOperator, build_preconditioner, solve
from .partition import (
    Partition,
    SweepResult,
    cheeger_sweep,
    kmeans,
    refine_per_component_sweep,
)
from .pipeline import PipelineConfig, RunReport, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "WeightedGraph", "DegreeVector", "laplacian_quadratic", "cut", "demand_cut",
    "largest_component",
    "LaplacianOperator", "build_preconditioner", "solve",
    "ConstraintSet", "MergedProblem", "auto_weight", "merge",
    "EigenSolution", "dense_generalized_eigs", "generalized_eigs",
    "EmbeddingResult", "compute_embedding",
    "Partition", "SweepResult", "cheeger_sweep", "kmeans",
    "refine_per_component_sweep",
    "QualityReport", "badness", "brute_force_phi", "rand_index",
    "LabeledPointCloud", "four_moons", "knn_graph", "erdos_renyi_graph",
    "noisy_knn", "sample_constraints",
    "PipelineConfig", "RunReport", "run_pipeline",
    "SpeclustError", "GraphValidationError", "DisconnectedGraphError",
    "ConstraintConflictError", "IllPosedProblemError",
    "DegenerateEigenvectorError", "IterativeSolveError",
]
