"""Contextuality toolkit for marginal scenarios.

Exact affine embeddings of probability vectors, noncontextuality and
non-disturbance polytopes, scenario-preserving measurement maps, the KCBS
qutrit model, and the invasiveness-cost and contextual-fraction quantifiers.
"""

from .imm import (
    Imm,
    identity_imm,
    imm_from_flat,
    imm_from_full,
    imm_from_json,
    imm_to_json,
    is_scenario_preserving,
    kcbs_constraints,
    parametrize_kcbs,
    reduced_map,
    simulate,
    structural_checks,
    validate_imm,
    vertex_transport,
    w_of_y,
    y_of_w,
)
from .polytope import (
    FacetSystem,
    VertexPolytope,
    facet_check,
    facet_member,
    kcbs_nc_polytope,
    kcbs_nd_polytope,
    member,
    separating_certificate,
)
from .quantifiers import (
    CfResult,
    IcConfig,
    IcResult,
    SweepCell,
    SweepTable,
    contextual_fraction_lp,
    invasiveness_cost,
    sweep,
    sweep_csv,
)
from .quantum_kcbs import (
    QutritFamilyParams,
    density_matrix,
    kcbs_value,
    model_q,
    pentagram_vectors,
    probabilities,
)
from .scenario import (
    AffineEmbedding,
    Context,
    MarginalScenario,
    Observable,
    derive_embedding,
    deterministic_vertices,
    embed,
    kcbs_embedding,
    kcbs_scenario,
    project,
    validate_model,
)

__version__ = "0.1.0"

__all__ = [
    "AffineEmbedding",
    "CfResult",
    "Context",
    "FacetSystem",
    "IcConfig",
    "IcResult",
    "Imm",
    "MarginalScenario",
    "Observable",
    "QutritFamilyParams",
    "SweepCell",
    "SweepTable",
    "VertexPolytope",
    "contextual_fraction_lp",
    "density_matrix",
    "derive_embedding",
    "deterministic_vertices",
    "embed",
    "facet_check",
    "facet_member",
    "identity_imm",
    "imm_from_flat",
    "imm_from_full",
    "imm_from_json",
    "imm_to_json",
    "invasiveness_cost",
    "is_scenario_preserving",
    "kcbs_constraints",
    "kcbs_embedding",
    "kcbs_nc_polytope",
    "kcbs_nd_polytope",
    "kcbs_scenario",
    "kcbs_value",
    "member",
    "model_q",
    "parametrize_kcbs",
    "pentagram_vectors",
    "probabilities",
    "project",
    "reduced_map",
    "separating_certificate",
    "simulate",
    "structural_checks",
    "sweep",
    "sweep_csv",
    "validate_imm",
    "validate_model",
    "vertex_transport",
    "w_of_y",
    "y_of_w",
]
