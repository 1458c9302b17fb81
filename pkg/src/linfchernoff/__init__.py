"""Dependence parameters and matrix Chernoff checks for explicit distributions over {0,1}^n."""

from .concentration import (
    MatrixEnsemble,
    check_claim_bound_zv,
    expected_spectrum,
    expected_sum,
    matrix_fact_checks,
    monte_carlo_tail,
    second_part_check,
    tail_bound,
    trace_mgf_check,
    z_matrix,
)
from .constructions import (
    build_counterexample,
    product_distribution,
    tree_distribution,
    uniform_k_subsets,
    verify_claim_B1,
    verify_claim_B2,
    verify_homogenization_influence,
)
from .distributions import (
    ConditioningSpec,
    Distribution,
    build_distribution,
    condition,
    homogenize,
    marginals,
    pick_distribution,
    sample,
)
from .errors import LinfError
from .graphs import WeightedGraph, effective_resistance, leverage_scores, sample_tree
from .influence import (
    ONE_SIDED,
    TWO_SIDED,
    ami_parameter,
    analyze,
    linf_parameter,
    one_sided_influence,
    two_sided_influence,
    verify_ii_ami_identity,
)
from .scp import check_scp, coupling_exists, verify_scp_implies_twosided
from .sparsifier import edge_marginal_check, sparsify, spectral_check

__all__ = [
    "ami_parameter",
    "analyze",
    "build_counterexample",
    "build_distribution",
    "check_claim_bound_zv",
    "check_scp",
    "condition",
    "ConditioningSpec",
    "coupling_exists",
    "Distribution",
    "edge_marginal_check",
    "effective_resistance",
    "expected_spectrum",
    "expected_sum",
    "homogenize",
    "leverage_scores",
    "linf_parameter",
    "LinfError",
    "marginals",
    "matrix_fact_checks",
    "MatrixEnsemble",
    "monte_carlo_tail",
    "ONE_SIDED",
    "one_sided_influence",
    "pick_distribution",
    "product_distribution",
    "sample",
    "sample_tree",
    "second_part_check",
    "sparsify",
    "spectral_check",
    "tail_bound",
    "trace_mgf_check",
    "tree_distribution",
    "TWO_SIDED",
    "two_sided_influence",
    "uniform_k_subsets",
    "verify_claim_B1",
    "verify_claim_B2",
    "verify_homogenization_influence",
    "verify_ii_ami_identity",
    "verify_scp_implies_twosided",
    "WeightedGraph",
    "z_matrix",
]

__version__ = "0.1.0"
