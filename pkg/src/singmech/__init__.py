"""Symbolic-numeric analysis of singular (degenerate) Lagrangian systems.

Workflow: build or load a model, rank its velocity Hessian to split
coordinates into canonical/noncanonical, construct the partial
Hamiltonian data (H0 plus additional Hamiltonians), classify the theory
through the F/G linear system, then integrate the reduced first-order
equations or cross-check against the constraint picture and multi-time
dynamics.  The ``singmech`` CLI drives the same pipeline from model
files.
"""

__version__ = "0.1.0"

from ._kernel import BACKEND as KERNEL_BACKEND
from .brackets import (
    Classification,
    FGSystem,
    Observable,
    D_op,
    bracket,
    build_FG,
    classify,
    poisson_reduced,
    solve_noncanonical_velocities,
)
from .dirac import (
    ConstraintSet,
    build_constraints,
    dirac_bracket,
    poisson_full,
    verify_correspondence,
)
from .dynamics import (
    IntegratorConfig,
    State,
    Trajectory,
    evolve_observable,
    integrate,
    oracle_trajectory,
    reduced_rhs,
)
from .expr import (
    Binding,
    Expr,
    Symbol,
    ZeroVerdict,
    differentiate,
    evaluate,
    free_symbols,
    is_zero,
    render,
    simplify,
    substitute,
)
from .hamiltonian import (
    PartialHamiltonianSystem,
    build_system,
    momenta,
    solve_canonical_velocities,
    verify_nondynamical,
)
from .lagrangian import (
    CoordinatePartition,
    HessianReport,
    LagrangianModel,
    SamplingConfig,
    build_model,
    hessian,
    rank_and_partition,
)
from .modelfile import load_model, load_multitime
from .multitime import (
    MultiTimeSystem,
    TimePath,
    from_partial,
    integrability_residual,
    integrate_path,
)
from .parser import parse
from .pipeline import AnalysisConfig, AnalysisResult, analyze, report_dict
from .sampling import PointSampler

__all__ = [name for name in dir() if not name.startswith("_")]
