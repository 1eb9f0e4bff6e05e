"""Gauss-Newton refinement and classification of candidate points.

A point (k, omega) with right/left eigenvectors u, z solves the
overdetermined zero-residual system

    F(u, y, lam, mu) = [ W u ; W^T y ; y^T (2 lam L2 + L1) u ;
                         (u^H u - 1)/2 ; (y^H y - 1)/2 ] = 0,

with W = lam^2 L2 + lam L1 + L0 + mu M, lam = ik, mu = omega^2 and
y = conj(z) (the conjugation keeps F complex differentiable in its first
three rows).  Each iteration solves the (2n+3) x (2n+2) linear least
squares problem J_F ds = -F.  The update uses a minimum-norm solve: at
curve crossings the solution set is non-isolated and J_F is legitimately
rank deficient there, which a plain triangular solve does not survive.

Classification afterwards distinguishes a true slope-zero point from a
crossing of two curves by checking that omega stays a simple eigenvalue
of the fixed-k problem.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .blas import single_thread_blas
from .errors import NoConvergence, StagnatedResidual

ZGV = "zgv"
TRIVIAL_ZGV = "trivial_zgv"
CROSSING = "crossing"
REJECTED = "rejected"


def evaluate_W(pencil, k, omega):
    """(ik)^2 L2 + ik L1 + L0 + omega^2 M; k and omega may be complex."""
    return pencil.lam_poly(1j * k, mu=omega ** 2)


def initial_vectors(pencil, lambda0, mu0):
    """Right/left starting vectors from the smallest singular pair of W.

    Returns (u0, y0) with y0 the conjugated left singular vector, both
    unit norm.
    """
    w = pencil.lam_poly(lambda0, mu=mu0)
    u, s, vh = np.linalg.svd(w)
    return vh[-1].conj(), u[:, -1].conj()


def deflated_initial_vectors(pencil, lambda0, mu0, delta):
    """Starting vectors drawn from the span of the few smallest singular
    pairs of W, balancing the group-velocity scalar.

    Near a double eigenvalue the kernel of W is effectively
    two-dimensional and the single smallest pair can point away from the
    solution manifold; this picks u from the small-singular span minimizing
    |y^T (2 lam L2 + L1) u| and y orthogonal to the remaining defect.
    Candidate offsets scale with delta, so singular values up to
    O(delta ||W||) count as small.
    """
    w = pencil.lam_poly(lambda0, mu=mu0)
    u, s, vh = np.linalg.svd(w)
    small = s <= max(10.0 * s[-1], 10.0 * delta * s[0])
    nsmall = int(min(max(np.sum(small), 1), 3))
    if nsmall == 1:
        return vh[-1].conj(), u[:, -1].conj()
    vs = vh[-nsmall:].conj().T
    us = u[:, -nsmall:]
    kmat = us.conj().T @ (2.0 * lambda0 * pencil.l2 + pencil.l1) @ vs
    ku, ks, kvh = np.linalg.svd(kmat)
    a = kvh[-1].conj()
    ka = kmat @ a
    if np.linalg.norm(ka) < 1e-14 * max(ks[0], 1e-300):
        b = ku[:, -1]
    else:
        q, _ = np.linalg.qr((ka / np.linalg.norm(ka)).reshape(-1, 1), mode="complete")
        b = q[:, 1]
    u0 = vs @ a
    z0 = us @ b
    return u0 / np.linalg.norm(u0), (z0 / np.linalg.norm(z0)).conj()


@dataclass
class GaussNewtonState:
    u: np.ndarray
    y: np.ndarray                 # conjugated left eigenvector, y = conj(z)
    lam: complex
    mu: complex
    residual_norm: float          # row-equilibrated (dimensionless) norm
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)


def residual(pencil, u, y, lam, mu):
    """The (2n+3)-vector F(u, y, lam, mu)."""
    w = pencil.lam_poly(lam, mu=mu)
    dw = 2.0 * lam * pencil.l2 + pencil.l1
    return np.concatenate([
        w @ u,
        w.T @ y,
        [y @ (dw @ u)],
        [(np.vdot(u, u) - 1.0) / 2.0],
        [(np.vdot(y, y) - 1.0) / 2.0],
    ])


def _row_weights(pencil, lam, mu):
    """Per-row equilibration for F and its Jacobian.

    The residual mixes units: eigen-rows scale with ||W||, the
    group-velocity row with ||2 lam L2 + L1||, the normalization rows are
    O(1).  On SI-scaled pencils these spread over ten orders of magnitude,
    which wrecks both the least-squares conditioning and any meaning of
    "small ||F||".  Positive row weights leave the zero-residual solution
    set untouched, so equilibrating is safe.
    """
    n = pencil.n
    s_w = max(np.linalg.norm(pencil.lam_poly(lam, mu=mu)), 1e-300)
    s_g = max(np.linalg.norm(2.0 * lam * pencil.l2 + pencil.l1), 1e-300)
    weights = np.empty(2 * n + 3)
    weights[: 2 * n] = 1.0 / s_w
    weights[2 * n] = 1.0 / s_g
    weights[2 * n + 1:] = 1.0
    return weights


def jacobian(pencil, u, y, lam, mu):
    """The (2n+3) x (2n+2) Jacobian of F at (u, y, lam, mu).

    The last two rows use u^H and y^H, which pins the free phases of the
    eigenvectors along with their norms.
    """
    n = pencil.n
    w = pencil.lam_poly(lam, mu=mu)
    dw = 2.0 * lam * pencil.l2 + pencil.l1
    jac = np.zeros((2 * n + 3, 2 * n + 2), dtype=complex)
    jac[:n, :n] = w
    jac[:n, 2 * n] = dw @ u
    jac[:n, 2 * n + 1] = pencil.m @ u
    jac[n:2 * n, n:2 * n] = w.T
    jac[n:2 * n, 2 * n] = dw.T @ y
    jac[n:2 * n, 2 * n + 1] = pencil.m.T @ y
    jac[2 * n, :n] = y @ dw
    jac[2 * n, n:2 * n] = u @ dw.T
    jac[2 * n, 2 * n] = 2.0 * (y @ (pencil.l2 @ u))
    jac[2 * n + 1, :n] = u.conj()
    jac[2 * n + 2, n:2 * n] = y.conj()
    return jac


def gauss_newton(pencil, u0, y0, lambda0, mu0, tol=None, maxit=30):
    """Refine (u, y, lam, mu) to a zero of F.

    Pure Gauss-Newton with one safeguard: if a full step increases the
    residual it is halved, at most five times per iteration.  Convergence
    is measured on the row-equilibrated residual, so ``tol`` (default
    1e-10) is dimensionless and independent of the pencil's unit system.
    The linear solve equilibrates columns as well: Delta-mu steps live on
    a completely different scale from eigenvector steps.  Raises
    NoConvergence / StagnatedResidual with the best state attached as
    ``state``.
    """
    with single_thread_blas():
        return _gauss_newton(pencil, u0, y0, lambda0, mu0, tol, maxit)


def _gauss_newton(pencil, u0, y0, lambda0, mu0, tol, maxit):
    if tol is None:
        tol = 1e-10
    u = np.asarray(u0, dtype=complex)
    y = np.asarray(y0, dtype=complex)
    lam = complex(lambda0)
    mu = complex(mu0)
    n = pencil.n

    def weighted_residual(u, y, lam, mu):
        fw = _row_weights(pencil, lam, mu) * residual(pencil, u, y, lam, mu)
        return fw, float(np.linalg.norm(fw))

    fw, r = weighted_residual(u, y, lam, mu)
    history = [r]
    stall = 0
    for it in range(maxit):
        if r <= tol:
            return GaussNewtonState(u=u, y=y, lam=lam, mu=mu, residual_norm=r,
                                    iterations=it, converged=True, history=history)
        jac = jacobian(pencil, u, y, lam, mu)
        jw = _row_weights(pencil, lam, mu)[:, None] * jac
        col = np.linalg.norm(jw, axis=0)
        col[col == 0.0] = 1.0
        ds, *_ = np.linalg.lstsq(jw / col, -fw, rcond=None)
        ds /= col
        step = 1.0
        for _ in range(6):
            un = u + step * ds[:n]
            yn = y + step * ds[n:2 * n]
            ln = lam + step * ds[2 * n]
            mn = mu + step * ds[2 * n + 1]
            fwn, rn = weighted_residual(un, yn, ln, mn)
            if rn < r or step <= 1.0 / 32.0:
                break
            step *= 0.5
        u, y, lam, mu, fw = un, yn, ln, mn, fwn
        history.append(rn)
        stall = stall + 1 if rn > 0.9 * r else 0
        r = rn
        if stall >= 5:
            state = GaussNewtonState(u=u, y=y, lam=lam, mu=mu, residual_norm=r,
                                     iterations=it + 1, converged=False,
                                     history=history)
            exc = StagnatedResidual(
                f"residual stalled at {r:.3e} (target {tol:.3e})")
            exc.state = state
            raise exc
    if r <= tol:
        return GaussNewtonState(u=u, y=y, lam=lam, mu=mu, residual_norm=r,
                                iterations=maxit, converged=True, history=history)
    state = GaussNewtonState(u=u, y=y, lam=lam, mu=mu, residual_norm=r,
                             iterations=maxit, converged=False, history=history)
    exc = NoConvergence(f"residual {r:.3e} above {tol:.3e} after {maxit} iterations")
    exc.state = state
    raise exc


def gep_omega(pencil, k):
    """All n eigenpairs (omega^2, u) of the fixed-k generalized problem
    (-k^2 L2 + ik L1 + L0) u = -omega^2 M u, sorted by Re(omega^2)."""
    a = pencil.lam_poly(1j * k)
    w2, v = sla.eig(a, -pencil.m)
    order = np.argsort(w2.real)
    return [(w2[i], v[:, i] / np.linalg.norm(v[:, i])) for i in order]


@dataclass
class ZgvPoint:
    k: float
    omega: float
    u: np.ndarray
    z: np.ndarray                 # left eigenvector
    residual: float
    classification: str
    omega_gap: float

    def as_row(self):
        return (self.k, self.omega, self.classification, self.residual, self.omega_gap)


def classify(pencil, state, k_bound=0.0, tol_real=1e-6, tol_imag=1e-6,
             zgv_tol=1e-6, gap_tol=1e-6, k_zero=1e-4):
    """Turn a converged refinement state into a classified point.

    zgv requires (a) lam imaginary and mu real up to the filters, (b) the
    group-velocity scalar z^H (2 lam L2 + L1) u below its scale-relative
    tolerance and (c) omega simple in the fixed-k problem; (a)+(b) with a
    failed gap is a crossing; |k| below the near-zero threshold is the
    trivial family; anything else is rejected.
    """
    lam, mu = state.lam, state.mu
    k = float(lam.imag)
    omega_c = np.sqrt(complex(mu))          # principal root, Re >= 0
    omega = float(omega_c.real)
    z = state.y.conj()
    real_ok = (
        abs(lam.real) <= tol_real * (1.0 + abs(lam))
        and abs(mu.imag) <= tol_imag * (1.0 + abs(mu))
        and abs(omega_c.imag) <= tol_imag * (1.0 + abs(omega_c))
    )
    point = lambda cls, gap: ZgvPoint(
        k=k, omega=omega, u=state.u, z=z, residual=state.residual_norm,
        classification=cls, omega_gap=gap,
    )
    if not real_ok:
        return point(REJECTED, float("nan"))
    if abs(k) <= k_zero * (1.0 + k_bound):
        return point(TRIVIAL_ZGV, _omega_gap(pencil, k, omega))
    scalar = abs(z.conj() @ ((2.0 * lam * pencil.l2 + pencil.l1) @ state.u))
    scalar_scale = np.linalg.norm(pencil.l1) + 2.0 * abs(lam) * np.linalg.norm(pencil.l2)
    if scalar > zgv_tol * scalar_scale:
        return point(REJECTED, float("nan"))
    gap = _omega_gap(pencil, k, omega)
    if gap > gap_tol * (1.0 + omega):
        return point(ZGV, gap)
    return point(CROSSING, gap)


def _omega_gap(pencil, k, omega):
    """Distance from omega to the nearest other eigenvalue of the fixed-k
    problem (the simplicity margin)."""
    omegas = np.array([np.sqrt(complex(w2)) for w2, _ in gep_omega(pencil, k)])
    dist = np.sort(np.abs(omegas - omega))
    if len(dist) < 2:
        return float("inf")
    return float(dist[1])
