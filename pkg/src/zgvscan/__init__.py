"""zgvscan: zero-group-velocity points of quadratic eigenvalue pencils.

The library locates points (k, omega) where an eigencurve omega(k) of
W(k, omega) u = ((ik)^2 L2 + ik L1 + L0 + omega^2 M) u = 0 has zero slope,
by scanning shift targets with a structured shift-invert eigensolver and
refining candidates with Gauss-Newton.
"""

from .arnoldi import ArnoldiOptions, RitzPair, eigs_closest
from .dense import (
    SchurFactorization,
    SingularTriplet,
    eig_dense,
    kron,
    lstsq,
    schur,
    smallest_singular_triplets,
    solve_sylvester,
)
from .errors import (
    Breakdown,
    DegenerateQuotient,
    DimensionMismatch,
    EigenvalueCollision,
    InvalidMaterial,
    NoConvergence,
    NonRealEntries,
    OracleTooLarge,
    ParseError,
    RankDeficient,
    SingularMass,
    SingularSylvester,
    StagnatedResidual,
    ZgvError,
)
from .mfrd import (
    ShiftInvertCache,
    StructuredDeltaOracle,
    apply_shift_invert,
    build_cache,
    build_explicit_deltas,
    rayleigh_mu,
)
from .pencil import QuadraticPencil
from .refine import (
    CROSSING,
    REJECTED,
    TRIVIAL_ZGV,
    ZGV,
    GaussNewtonState,
    ZgvPoint,
    classify,
    evaluate_W,
    gauss_newton,
    gep_omega,
    initial_vectors,
)
from .scanner import Mep3Candidate, ScanConfig, ScanResult, scan, trivial_zgv
from .waveguide import (
    Discretization,
    DispersionGrid,
    PlateMaterial,
    assemble_plate,
    dispersion_sweep,
    example21,
    parse_material,
    zgv_oracle,
)

__version__ = "0.1.0"
