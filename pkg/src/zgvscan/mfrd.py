"""Structured shift-invert machinery for the relative-distance eigenproblem.

The two-curve detector couples three eigenvalue equations through the
parameters (lambda, mu, eta) = (ik, omega^2, (ik)^2) and a relative gap
delta > 0 between the two wavenumbers it looks for.  Transforming it with
operator determinants yields a generalized eigenproblem

    Delta1 z = lambda Delta0 z,      z in C^(2 n^2),

whose matrices have the block form

    Delta0 = [[G1, G2], [G2, 0]],    Delta1 = [[-G0, 0], [0, G2]],

with G0 = L0 (x) M - M (x) L0, G1 = L1 (x) M - (1+delta) M (x) L1 and
G2 = L2 (x) M - (1+delta)^2 M (x) L2.  Nothing of that size is ever formed
here: the shift-invert solve (Delta1 - sigma Delta0) z = Delta0 y collapses,
after one block elimination, to a single n x n Sylvester equation

    Z1 L(0)^T M^-T - M^-1 L(delta) Z1 = M^-1 W M^-T,

where L(t) = L0 + (1+t) sigma L1 + (1+t)^2 sigma^2 L2, plus the back-
substitution z2 = y1 + sigma z1.  With the two Schur factorizations cached,
every apply costs O(n^3) and touches only n x n matrices.

For small n the Delta matrices can also be assembled explicitly (twice, by
independent routes) as a brute-force oracle for the structured code paths.
"""

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import dense
from .errors import DegenerateQuotient, EigenvalueCollision, OracleTooLarge
from .pencil import QuadraticPencil

# 2x2 coefficient matrices tying eta to lambda^2:
# det(eta*C2 + lambda*C1 + C0) = eta - lambda^2.
C2 = np.array([[1.0, 0.0], [0.0, 0.0]])
C1 = np.array([[0.0, -1.0], [-1.0, 0.0]])
C0 = np.array([[0.0, 0.0], [0.0, 1.0]])

ORACLE_CAP = 12


@dataclass
class ShiftInvertCache:
    """Factorizations enabling repeated O(n^3) shift-invert applies.

    Immutable after construction; safe to share across concurrent applies.
    """

    pencil: QuadraticPencil
    sigma: complex
    delta: float
    schur_right: dense.SchurFactorization  # of L(0)^T M^-T
    schur_left: dense.SchurFactorization   # of M^-1 L(delta)
    m_factor: tuple                        # LU of M for M^-1 / M^-T applies

    @property
    def n(self):
        return self.pencil.n


def build_cache(pencil, sigma, delta):
    """Prepare Schur/LU factorizations for apply_shift_invert at (sigma, delta).

    Raises EigenvalueCollision when the reduced Sylvester operator is
    singular at this shift; the caller should perturb sigma and retry.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    sigma = complex(sigma)
    m_factor = sla.lu_factor(pencil.m, check_finite=False)
    l_plain = pencil.lam_poly(sigma)          # L(0)
    l_wide = pencil.lam_poly(sigma, stretch=1.0 + delta)  # L(delta)
    # M^-1 L(0), transposed, gives L(0)^T M^-T without forming M^-T.
    right = sla.lu_solve(m_factor, l_plain, check_finite=False).T
    left = sla.lu_solve(m_factor, l_wide, check_finite=False)
    schur_right = dense.schur(right)
    schur_left = dense.schur(left)
    gaps = np.abs(
        schur_left.eigenvalues[:, None] - schur_right.eigenvalues[None, :]
    )
    tol = 1e-12 * (np.linalg.norm(left) + np.linalg.norm(right))
    if gaps.min() < tol:
        raise EigenvalueCollision(
            f"spectra of the reduced pair collide at sigma={sigma:.6g} "
            f"(min gap {gaps.min():.3e})"
        )
    return ShiftInvertCache(
        pencil=pencil,
        sigma=sigma,
        delta=float(delta),
        schur_right=schur_right,
        schur_left=schur_left,
        m_factor=m_factor,
    )


def apply_shift_invert(cache, y):
    """Solve (Delta1 - sigma Delta0) z = Delta0 y without forming Deltas.

    y and z are length 2 n^2, partitioned as stacked vectorizations of the
    n x n blocks Y1, Y2 / Z1, Z2.
    """
    p = cache.pencil
    n = p.n
    sigma = cache.sigma
    d1 = 1.0 + cache.delta
    d2 = d1 * d1
    y = np.asarray(y, dtype=complex)
    y1 = y[: n * n]
    y2 = y[n * n:]
    ym1 = dense.unvec(y1, n)
    ym2 = dense.unvec(y2, n)
    # Right-hand side of the eliminated first block row,
    # w = -(G1 + sigma G2) y1 - G2 y2, written with n x n products.
    w = (
        -p.m @ ym1 @ (p.l1 + sigma * p.l2).T
        + (d1 * p.l1 + sigma * d2 * p.l2) @ ym1 @ p.m.T
        - p.m @ ym2 @ p.l2.T
        + d2 * p.l2 @ ym2 @ p.m.T
    )
    wt = sla.lu_solve(cache.m_factor, w, check_finite=False)
    wt = sla.lu_solve(cache.m_factor, wt.T, check_finite=False).T  # M^-1 W M^-T
    # Z1 B - A Z1 = Wt with A = M^-1 L(delta) = Ql Tl Ql^H and
    # B = L(0)^T M^-T = Qr Tr Qr^H reduces to the triangular Sylvester
    # (-Tl) Y + Y Tr = Ql^H Wt Qr.
    ql, tl = cache.schur_left.q, cache.schur_left.r
    qr, tr = cache.schur_right.q, cache.schur_right.r
    dmat = ql.conj().T @ wt @ qr
    yz = dense.solve_triangular_sylvester(-tl, tr, dmat)
    z1m = ql @ yz @ qr.conj().T
    z1 = dense.vec(z1m)
    z2 = y1 + sigma * z1
    return np.concatenate([z1, z2])


def rayleigh_mu(pencil, delta, z):
    """mu = (z^H Delta_M z) / (z^H Delta0 z) evaluated with n x n products.

    Raises DegenerateQuotient when the denominator underflows, which signals
    a multiple lambda (for instance the trivial k = 0 cluster).
    """
    n = pencil.n
    z = np.asarray(z, dtype=complex)
    if z.shape != (2 * n * n,):
        raise ValueError(f"z must have length {2 * n * n}")
    nz = np.linalg.norm(z)
    if nz == 0:
        raise ValueError("z must be nonzero")
    d1 = 1.0 + delta
    d2 = d1 * d1
    l0, l1, l2, m = pencil.l0, pencil.l1, pencil.l2, pencil.m
    z1 = z[: n * n]
    z2 = z[n * n:]
    zm1 = dense.unvec(z1, n)
    zm2 = dense.unvec(z2, n)
    t1 = -l0 @ zm1 @ l1.T + d1 * l1 @ zm1 @ l0.T + d2 * l2 @ zm2 @ l0.T - l0 @ zm2 @ l2.T
    t2 = d2 * l2 @ zm1 @ l0.T - l0 @ zm1 @ l2.T - d1 * l1 @ zm2 @ l2.T + d2 * l2 @ zm2 @ l1.T
    t3 = m @ zm1 @ l1.T - d1 * l1 @ zm1 @ m.T + m @ zm2 @ l2.T - d2 * l2 @ zm2 @ m.T
    t4 = m @ zm1 @ l2.T - d2 * l2 @ zm1 @ m.T
    num = np.vdot(z1, dense.vec(t1)) + np.vdot(z2, dense.vec(t2))
    den = np.vdot(z1, dense.vec(t3)) + np.vdot(z2, dense.vec(t4))
    floor = 1e-10 * nz * nz * (
        np.linalg.norm(m) + np.linalg.norm(l1) + np.linalg.norm(l2)
    )
    if abs(den) < floor:
        raise DegenerateQuotient(
            f"|denominator| = {abs(den):.3e} below {floor:.3e}; "
            "lambda is likely a multiple eigenvalue"
        )
    return num / den


@dataclass
class StructuredDeltaOracle:
    """Explicit 2 n^2 operator-determinant matrices, for tests only."""

    n: int
    delta: float
    delta0: np.ndarray
    delta1: np.ndarray
    delta_m: np.ndarray
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    g5: np.ndarray


def _operator_determinant(rows):
    """Sum over S3 of sgn(perm) * kron(row0[p0], row1[p1], row2[p2])."""
    total = None
    for perm in itertools.permutations(range(3)):
        inversions = sum(
            1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j]
        )
        sign = -1.0 if inversions % 2 else 1.0
        term = sign * np.kron(
            np.kron(rows[0][perm[0]], rows[1][perm[1]]), rows[2][perm[2]]
        )
        total = term if total is None else total + term
    return total


def build_explicit_deltas(pencil, delta, cap=ORACLE_CAP):
    """Assemble Delta0, Delta1, Delta_M both from the 3x3 operator
    determinants and from the block/G formulas, and check they agree.

    Only sensible for small n (matrices are 2 n^2 square); guarded by ``cap``.
    """
    n = pencil.n
    if n > cap:
        raise OracleTooLarge(f"n = {n} above the oracle cap {cap}")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    l0, l1, l2, m = pencil.l0, pencil.l1, pencil.l2, pencil.m
    d1 = 1.0 + delta
    d2 = d1 * d1
    z2 = np.zeros((2, 2))
    delta0 = _operator_determinant(
        [[C2, C1, z2], [l2, l1, m], [d2 * l2, d1 * l1, m]]
    )
    delta1 = -_operator_determinant(
        [[C2, C0, z2], [l2, l0, m], [d2 * l2, l0, m]]
    )
    delta_m = -_operator_determinant(
        [[C2, C1, C0], [l2, l1, l0], [d2 * l2, d1 * l1, l0]]
    )
    g0 = np.kron(l0, m) - np.kron(m, l0)
    g1 = np.kron(l1, m) - d1 * np.kron(m, l1)
    g2 = np.kron(l2, m) - d2 * np.kron(m, l2)
    g3 = -np.kron(l1, l0) + d1 * np.kron(l0, l1)
    g4 = d2 * np.kron(l0, l2) - np.kron(l2, l0)
    g5 = -d1 * np.kron(l2, l1) + d2 * np.kron(l1, l2)
    zero = np.zeros_like(g0)
    blocks0 = np.block([[g1, g2], [g2, zero]])
    blocks1 = np.block([[-g0, zero], [zero, g2]])
    blocks_m = np.block([[g3, g4], [g4, g5]])
    scale = max(np.abs(delta0).max(), np.abs(delta1).max(), np.abs(delta_m).max(), 1.0)
    for a, b, name in (
        (delta0, blocks0, "Delta0"),
        (delta1, blocks1, "Delta1"),
        (delta_m, blocks_m, "Delta_M"),
    ):
        err = np.abs(a - b).max()
        if err > 1e-12 * scale:
            raise AssertionError(f"{name} assemblies disagree by {err:.3e}")
    return StructuredDeltaOracle(
        n=n, delta=float(delta), delta0=delta0, delta1=delta1, delta_m=delta_m,
        g0=g0, g1=g1, g2=g2, g3=g3, g4=g4, g5=g5,
    )
