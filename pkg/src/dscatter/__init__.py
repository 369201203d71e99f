"""dscatter: the plane d-bar scattering transform and its combinatorial appendix.

Core pipeline: sampled potentials on centered square lattices (grids), the
scattering-normalized Fourier transform (fourier), the corrected solid
Cauchy transform and friends (cauchy), weighted Sobolev diagnostics
(sobolev), the mu-system solver and k-sweeps (scattering), the multilinear
series decomposition (series), and exact matroid-polytope verification
(matroid).  The command line lives in dscatter.cli.
"""

from ._kernels import backend_name
from .cauchy import (
    C1C2Report,
    KernelPlan,
    cauchy_transform,
    check_C1_C2,
    conj_cauchy_transform,
    dbar,
    fractional_integral,
    kernel_plan,
    partial,
)
from .fourier import (
    ConvolutionReport,
    check_convolution_identities,
    dual_spec,
    forward_transform,
    inverse_transform,
    padded_convolve,
    phase_grid,
)
from .grids import (
    ComplexGrid,
    GridFormatError,
    GridSpec,
    GridSpecError,
    export_csv,
    load_grid,
    make_grid,
    read_grid,
    save_grid,
    write_grid,
    zero_grid,
)
from .matroid import (
    BasisPair,
    GeomReport,
    PairReport,
    PolytopePoint,
    VectorFamily,
    appendix_basis_pair,
    build_E1,
    build_E2,
    enumerate_bases,
    is_basis,
    phi_point,
    verify_lemma_geom,
    verify_pair,
)
from .scattering import (
    SolveFailure,
    SolveReport,
    SolverOptions,
    SweepError,
    apply_Tk,
    inverse_scatter,
    scatter_at,
    scatter_grid,
    solve_mu,
)
from .series import (
    DbarKReport,
    ExpansionResult,
    dbar_k_residual,
    expand,
    expansion_term,
    remainder_term,
)
from .sobolev import (
    EmbeddingReport,
    SobolevParams,
    embedding_report,
    lp_norm,
    sobolev_norm,
    weighted_lp_norm,
)

__version__ = "0.1.0"
