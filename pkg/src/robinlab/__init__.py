"""Galerkin laboratory for the Laplacian with nonlocal Robin boundary conditions."""

__version__ = "0.1.0"

from .mesh import Mesh, build_interval_mesh, build_rectangle_mesh, refine
from .measures import (
    AdmissibilityVerdict,
    BoundaryMeasure,
    ConstantKernel,
    JumpMeasure,
    TruncatedFractionalKernel,
    ZeroKernel,
    admissibility_verdict,
    effective_local_measure,
    marginal_measure,
    scale_pair,
)
from .forms import (
    FormMatrices,
    assemble_boundary_mass,
    assemble_jump,
    assemble_lumped_mass,
    assemble_operator,
    assemble_stiffness,
    dirichlet_operator,
)
from .spectral import (
    ConvergenceError,
    Propagator,
    SpectralDecomposition,
    decompose,
    dirichlet_principle_solve,
    propagator,
    resolvent_apply,
)

__all__ = [
    "AdmissibilityVerdict",
    "BoundaryMeasure",
    "ConstantKernel",
    "ConvergenceError",
    "FormMatrices",
    "JumpMeasure",
    "Mesh",
    "Propagator",
    "SpectralDecomposition",
    "TruncatedFractionalKernel",
    "ZeroKernel",
    "admissibility_verdict",
    "assemble_boundary_mass",
    "assemble_jump",
    "assemble_lumped_mass",
    "assemble_operator",
    "assemble_stiffness",
    "build_interval_mesh",
    "build_rectangle_mesh",
    "decompose",
    "dirichlet_operator",
    "dirichlet_principle_solve",
    "effective_local_measure",
    "marginal_measure",
    "propagator",
    "refine",
    "resolvent_apply",
    "scale_pair",
]
