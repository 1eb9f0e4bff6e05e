"""Built-in test problems: a 3 x 3 reference pencil, elastic-plate pencils
from a 1D spectral-element discretization, dispersion sweeps, and a
brute-force slope-sign-change locator used as the acceptance oracle.

Plate model.  Harmonic plane waves u(y) e^(i(kx - wt)) in a plate of
thickness h with density rho and stiffness C (Voigt) satisfy, in plane
strain (all z-derivatives dropped),

    (ik)^2 c_xx u + ik (c_xy + c_yx) u' + (c_yy u')' + rho w^2 u = 0

on (0, h), with traction ik c_yx u + c_yy u' vanishing on free faces.
Galerkin projection on a Gauss-Lobatto-Legendre nodal basis (weak form,
traction built in by parts) gives real matrices

    L2 = mass-like products with c_xx,
    L1 = first-derivative coupling with c_xy (skew-symmetric),
    L0 = -stiffness products with c_yy,
    M  = rho-weighted mass,

so W(k, w) is Hermitian for real k and M is symmetric positive definite.
The 2nd-order blocks are c_ab[j, l] = C[voigt(a, j), voigt(b, l)].
"""

from dataclasses import dataclass

import numpy as np

from .blas import single_thread_blas
from .errors import InvalidMaterial, ParseError
from .pencil import QuadraticPencil
from .refine import gep_omega

_EX21_L2 = [[2.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
_EX21_L1 = [[0.0, 3.0, 0.0], [-3.0, 0.0, 0.0], [0.0, 0.0, 0.0]]
_EX21_L0 = [[-1.75, 1.0, 0.0], [1.0, -1.75, 0.0], [0.0, 0.0, -0.25]]
_EX21_M = [[3.0, 1.0, 0.0], [1.0, 4.0, 0.0], [0.0, 0.0, 3.5]]

# Four-digit reference values for the pencil above: trivial points at
# k = 0, one slope-zero point, one curve crossing.
EX21_TRIVIAL_OMEGA = ("0.2673", "0.4074", "1.0628")
EX21_ZGV = ("1.0642", "0.2393")
EX21_CROSSING = ("0.4236", "0.3503")


def example21():
    """The 3 x 3 reference pencil: L0 symmetric, L1 skew-symmetric,
    L2 and M symmetric positive definite."""
    return QuadraticPencil(
        l0=np.array(_EX21_L0), l1=np.array(_EX21_L1),
        l2=np.array(_EX21_L2), m=np.array(_EX21_M),
    )


# ---------------------------------------------------------------------------
# Gauss-Lobatto-Legendre machinery


def gll_nodes_weights(order):
    """GLL nodes and quadrature weights on [-1, 1] for a given order.

    order + 1 nodes: the endpoints plus the roots of P'_order; weights
    w_i = 2 / (order (order+1) P_order(x_i)^2).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if order == 1:
        x = np.array([-1.0, 1.0])
    else:
        dlegendre = np.polynomial.legendre.Legendre.basis(order).deriv()
        x = np.concatenate([[-1.0], np.sort(dlegendre.roots().real), [1.0]])
    pn = np.polynomial.legendre.legval(x, [0.0] * order + [1.0])
    w = 2.0 / (order * (order + 1) * pn ** 2)
    return x, w


def lagrange_diff_matrix(x):
    """D[q, j] = l_j'(x_q) for the Lagrange basis on nodes x (barycentric)."""
    npts = len(x)
    bw = np.ones(npts)
    for i in range(npts):
        for j in range(npts):
            if i != j:
                bw[i] /= x[i] - x[j]
    d = np.zeros((npts, npts))
    for i in range(npts):
        for j in range(npts):
            if i != j:
                d[i, j] = (bw[j] / bw[i]) / (x[i] - x[j])
        d[i, i] = -np.sum(d[i, :i]) - np.sum(d[i, i + 1:])
    return d


# ---------------------------------------------------------------------------
# Material and discretization descriptions

_VOIGT = {
    ("x", "x"): 0, ("y", "y"): 1, ("z", "z"): 2,
    ("y", "z"): 3, ("z", "y"): 3, ("x", "z"): 4, ("z", "x"): 4,
    ("x", "y"): 5, ("y", "x"): 5,
}


@dataclass
class PlateMaterial:
    """Density (kg/m^3), 6 x 6 Voigt stiffness (Pa), thickness (m)."""

    rho: float
    c: np.ndarray
    h: float

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if self.c.shape != (6, 6):
            raise InvalidMaterial(f"stiffness must be 6 x 6, got {self.c.shape}")
        if np.linalg.norm(self.c - self.c.T) > 1e-8 * np.linalg.norm(self.c):
            raise InvalidMaterial("stiffness matrix must be symmetric")
        if np.linalg.eigvalsh(0.5 * (self.c + self.c.T)).min() <= 0:
            raise InvalidMaterial("stiffness matrix must be positive definite")
        if self.rho <= 0 or self.h <= 0:
            raise InvalidMaterial("rho and h must be positive")

    @classmethod
    def isotropic(cls, rho, ct, cl, h):
        """Isotropic stiffness from shear/longitudinal bulk wave speeds."""
        mu = rho * ct ** 2
        lam = rho * cl ** 2 - 2.0 * mu
        c = np.full((3, 3), lam)
        np.fill_diagonal(c, lam + 2.0 * mu)
        full = np.zeros((6, 6))
        full[:3, :3] = c
        full[3, 3] = full[4, 4] = full[5, 5] = mu
        return cls(rho=rho, c=full, h=h)

    def block(self, a, b, comps):
        """c_ab[j, l] = C[voigt(a, comps[j]), voigt(b, comps[l])]."""
        return np.array([
            [self.c[_VOIGT[a, cj], _VOIGT[b, cl]] for cl in comps]
            for cj in comps
        ])


IN_PLANE = "in_plane"
FULL = "full"
_POLARIZATIONS = {IN_PLANE: ("x", "y"), FULL: ("x", "y", "z")}
_BCS = ("free_free", "clamped_free", "clamped_clamped")


@dataclass
class Discretization:
    order: int = 12
    elements: int = 1
    polarization: str = IN_PLANE
    bc: str = "free_free"

    def __post_init__(self):
        if self.order < 1 or self.elements < 1:
            raise ValueError("order and elements must be >= 1")
        if self.polarization not in _POLARIZATIONS:
            raise ValueError(f"polarization must be one of {sorted(_POLARIZATIONS)}")
        if self.bc not in _BCS:
            raise ValueError(f"bc must be one of {_BCS}")


def assemble_plate(mat, disc):
    """Assemble the plate pencil for a material and discretization.

    Elements of equal thickness h/elements share interface nodes; clamped
    faces are eliminated from the dof set.  GLL quadrature on the GLL nodes
    lumps the mass blocks, the usual spectral-element choice.
    """
    comps = _POLARIZATIONS[disc.polarization]
    nc = len(comps)
    xi, wq = gll_nodes_weights(disc.order)
    dmat = lagrange_diff_matrix(xi)
    jac = (mat.h / disc.elements) / 2.0
    # scalar element blocks: s0 ~ int N_i N_j, s1 ~ int N_i N_j', s2 ~ int N_i' N_j'
    s0 = np.diag(wq) * jac
    s1 = wq[:, None] * dmat
    s2 = dmat.T @ np.diag(wq) @ dmat / jac
    cxx = mat.block("x", "x", comps)
    cxy = mat.block("x", "y", comps)
    cyx = mat.block("y", "x", comps)
    cyy = mat.block("y", "y", comps)
    el_l2 = np.kron(s0, cxx)
    el_l1 = np.kron(s1, cxy) - np.kron(s1.T, cyx)
    el_l0 = -np.kron(s2, cyy)
    el_m = mat.rho * np.kron(s0, np.eye(nc))
    nodes = disc.elements * disc.order + 1
    ndof = nodes * nc
    l0 = np.zeros((ndof, ndof))
    l1 = np.zeros((ndof, ndof))
    l2 = np.zeros((ndof, ndof))
    m = np.zeros((ndof, ndof))
    for e in range(disc.elements):
        i0 = e * disc.order * nc
        i1 = i0 + (disc.order + 1) * nc
        l0[i0:i1, i0:i1] += el_l0
        l1[i0:i1, i0:i1] += el_l1
        l2[i0:i1, i0:i1] += el_l2
        m[i0:i1, i0:i1] += el_m
    keep = np.ones(ndof, dtype=bool)
    if disc.bc in ("clamped_free", "clamped_clamped"):
        keep[:nc] = False
    if disc.bc == "clamped_clamped":
        keep[-nc:] = False
    idx = np.where(keep)[0]
    return QuadraticPencil(
        l0=l0[np.ix_(idx, idx)], l1=l1[np.ix_(idx, idx)],
        l2=l2[np.ix_(idx, idx)], m=m[np.ix_(idx, idx)],
    )


def parse_material(path):
    """Read a flat key-value material file (SI units).

    Keys: rho, h, and either ct, cl (isotropic) or the Voigt entries
    C11 .. C66 (upper triangle suffices; missing entries are zero).
    Lines starting with # are comments.
    """
    values = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace("=", " ").replace(":", " ").split()
            if len(parts) != 2:
                raise ParseError(f"expected 'key value', got {raw.strip()!r}",
                                 path=path, line=ln)
            key, sval = parts
            try:
                values[key.lower()] = float(sval)
            except ValueError:
                raise ParseError(f"bad number {sval!r} for key {key!r}",
                                 path=path, line=ln) from None
    for req in ("rho", "h"):
        if req not in values:
            raise ParseError(f"missing required key {req!r}", path=path)
    rho = values.pop("rho")
    h = values.pop("h")
    if "ct" in values and "cl" in values:
        return PlateMaterial.isotropic(rho=rho, ct=values["ct"], cl=values["cl"], h=h)
    c = np.zeros((6, 6))
    seen = False
    for key, val in values.items():
        if len(key) == 3 and key.startswith("c") and key[1:].isdigit():
            i, j = int(key[1]) - 1, int(key[2]) - 1
            if not (0 <= i < 6 and 0 <= j < 6):
                raise ParseError(f"stiffness index out of range in {key!r}", path=path)
            c[i, j] = val
            c[j, i] = val
            seen = True
        else:
            raise ParseError(f"unknown key {key!r}", path=path)
    if not seen:
        raise ParseError("material needs either (ct, cl) or C11..C66 entries",
                         path=path)
    return PlateMaterial(rho=rho, c=c, h=h)


# ---------------------------------------------------------------------------
# Dispersion sweeps and the finite-difference oracle


@dataclass
class DispersionGrid:
    """Real branches omega_j(k) on an ascending wavenumber grid.

    ``omega`` has shape (len(k_values), branches); row i holds the sorted
    branch values at k_values[i].  Sorted order is what the oracle wants:
    branches stay continuous through crossings (with kinks), and extrema
    of the underlying smooth curves are extrema of the sorted data.
    """

    k_values: np.ndarray
    omega: np.ndarray

    @property
    def branches(self):
        return self.omega.shape[1]


def _branch_values(pencil, k):
    w2 = np.array([w for w, _ in gep_omega(pencil, k)])
    return np.sort(np.sqrt(np.maximum(w2.real, 0.0)))


def dispersion_sweep(pencil, k_values):
    """Sorted real branches omega >= 0 over a wavenumber grid.

    Meant for Hermitian pencils (real omega^2); small negative eigenvalues
    are clipped to zero.
    """
    k_values = np.asarray(k_values, dtype=float)
    if k_values.ndim != 1 or len(k_values) == 0:
        raise ValueError("k_values must be a nonempty 1-D grid")
    if np.any(np.diff(k_values) <= 0) and len(k_values) > 1:
        raise ValueError("k_values must be ascending")
    with single_thread_blas():
        omega = np.array([_branch_values(pencil, k) for k in k_values])
    return DispersionGrid(k_values=k_values, omega=omega)


def _refine_extremum(pencil, branch, k_lo, k_hi, sign, xatol):
    """Safeguarded parabolic minimization of sign * branch value."""
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(
        lambda k: sign * _branch_values(pencil, k)[branch],
        bounds=(k_lo, k_hi), method="bounded",
        options={"xatol": xatol},
    )
    return float(res.x)


def zgv_oracle(pencil, k_values, gap_tol=1e-6):
    """Brute-force interior extrema of the dispersion branches.

    Centered-difference slope sign changes bracket each extremum, which is
    then refined by iterated parabolic interpolation to
    |dk| <= 1e-8 (1 + k).  Extrema whose branch approaches a neighbour
    within gap_tol (1 + omega) at the refined point are discarded: sorted
    branches kink where two curves cross, and those kinks are crossings,
    not slope-zero points.
    """
    grid = dispersion_sweep(pencil, k_values)
    ks = grid.k_values
    out = []
    with single_thread_blas():
        for j in range(grid.branches):
            w = grid.omega[:, j]
            if len(ks) < 4:
                continue
            slope = (w[2:] - w[:-2]) / (ks[2:] - ks[:-2])  # at nodes 1..n-2
            signs = np.sign(slope)
            flips = np.where(signs[:-1] * signs[1:] < 0)[0]
            for f in flips:
                i = f + 1                  # node index of the second slope
                k_lo = ks[max(i - 2, 0)]
                k_hi = ks[min(i + 2, len(ks) - 1)]
                direction = 1.0 if signs[f] > 0 else -1.0   # +: maximum
                k_star = _refine_extremum(
                    pencil, j, k_lo, k_hi, -direction,
                    xatol=0.5e-8 * (1.0 + 0.5 * (k_lo + k_hi)),
                )
                values = _branch_values(pencil, k_star)
                omega_star = values[j]
                gaps = [abs(values[jj] - omega_star) for jj in (j - 1, j + 1)
                        if 0 <= jj < len(values)]
                if gaps and min(gaps) <= gap_tol * (1.0 + omega_star):
                    continue                # kink at a curve crossing
                out.append((k_star, float(omega_star)))
    out.sort()
    merged = []
    for k_star, w_star in out:
        if merged and abs(k_star - merged[-1][0]) <= 1e-6 * (1.0 + abs(k_star)) \
                and abs(w_star - merged[-1][1]) <= 1e-6 * (1.0 + abs(w_star)):
            continue
        merged.append((k_star, w_star))
    return merged
