"""Restarted shift-invert Arnoldi for Delta1 z = lambda Delta0 z.

The solver only ever touches the operator through
:func:`zgvscan.mfrd.apply_shift_invert`, i.e. through
y -> (Delta1 - sigma Delta0)^-1 Delta0 y, whose eigenvalues are
nu = 1/(lambda - sigma) with unchanged eigenvectors.  Eigenvalues closest
to the shift therefore dominate, and lambda = sigma + 1/nu maps back.

Restarting follows the Krylov-Schur pattern: the decomposition
Op V_j = V_j B_j + v_res g^T is contracted onto the Schur vectors of B_j
belonging to the largest |nu| and re-expanded.  B_j is a dense matrix of
subspace size, so no Hessenberg bookkeeping is needed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .blas import single_thread_blas
from .errors import NoConvergence
from .mfrd import apply_shift_invert


@dataclass
class ArnoldiOptions:
    m: int = 8                 # eigenvalues requested
    max_subspace: int = 0      # 0 -> 4m + 4
    max_restarts: int = 40
    tol: float = 1e-8          # relative Ritz residual
    seed: int = 20230 		   # start-vector seed (reproducible runs)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.max_subspace == 0:
            self.max_subspace = 4 * self.m + 4
        if self.max_subspace < 2 * self.m + 2:
            raise ValueError("max_subspace must be >= 2m + 2")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass
class RitzPair:
    lam: complex                  # eigenvalue of (Delta1, Delta0)
    z: np.ndarray                 # unit eigenvector, length 2 n^2
    residual_estimate: float      # |g . s| for the shift-inverted operator
    converged: bool
    nu: complex = 0.0             # Ritz value of the shift-inverted operator


@dataclass
class _State:
    v: np.ndarray                 # N x (kmax + 1) basis storage
    b: np.ndarray                 # kmax x kmax projected operator
    g: np.ndarray                 # residual coupling row, length kmax
    j: int                        # active subspace size
    invariant: bool = False


def _expand(op, st, kmax, trace=None):
    """Grow the decomposition Op V_j = V_j B_j + v_res g^T up to kmax."""
    while st.j < kmax:
        j = st.j
        w = op(st.v[:, j])
        basis = st.v[:, : j + 1]
        # V^H w computed as conj(V^T conj(w)): conjugating the two vectors
        # instead of the basis avoids an N x j copy per step
        h = np.conj(basis.T @ np.conj(w))
        w = w - basis @ h
        h2 = np.conj(basis.T @ np.conj(w))   # one full reorthogonalization
        w = w - basis @ h2
        h += h2
        beta = np.linalg.norm(w)
        st.b[:j, j] = h[:j]
        st.b[j, :j] = st.g[:j]
        st.b[j, j] = h[j]
        st.g[: j + 1] = 0.0
        st.j = j + 1
        if beta <= 1e-12 * max(np.linalg.norm(h), 1e-300):
            st.invariant = True          # exact invariant subspace found
            return
        st.g[j] = beta
        st.v[:, j + 1] = w / beta
    if trace is not None:
        trace(st)


def _ritz(st):
    """Eigenpairs of the projected matrix, sorted by |nu| descending."""
    j = st.j
    nus, s = np.linalg.eig(st.b[:j, :j])
    order = np.argsort(-np.abs(nus))
    nus = nus[order]
    s = s[:, order]
    resid = np.abs(st.g[:j] @ s)
    return nus, s, resid


def eigs_closest(cache, opts, trace=None):
    """Up to opts.m eigenpairs of (Delta1, Delta0) closest to cache.sigma.

    Returns RitzPairs sorted by |lambda - sigma| ascending.  Unconverged
    pairs are flagged rather than silently returned; if the restart budget
    runs out, NoConvergence is raised carrying the flagged pairs.  An early
    exact invariant subspace smaller than m returns the pairs that exist.

    ``trace`` (tests only) is called with the internal state at every
    restart boundary.
    """
    with single_thread_blas():
        return _eigs_closest(cache, opts, trace)


def _eigs_closest(cache, opts, trace):
    n2 = 2 * cache.n * cache.n
    m = min(opts.m, n2)
    kmax = min(opts.max_subspace, n2)
    keep = max(m + 1, min(2 * m, kmax - 1))
    rng = np.random.default_rng(opts.seed)
    v0 = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
    st = _State(
        v=np.empty((n2, kmax + 1), dtype=complex),
        b=np.zeros((kmax, kmax), dtype=complex),
        g=np.zeros(kmax, dtype=complex),
        j=0,
    )
    st.v[:, 0] = v0 / np.linalg.norm(v0)
    op = lambda x: apply_shift_invert(cache, x)

    for _ in range(opts.max_restarts + 1):
        _expand(op, st, kmax, trace=trace)
        nus, s, resid = _ritz(st)
        nwant = min(m, st.j)
        ok = resid[:nwant] <= opts.tol * np.abs(nus[:nwant])
        if np.all(ok) or st.invariant:
            return _extract(cache, st, nus, s, resid, nwant, opts)
        # thick restart on the Schur vectors of the largest-|nu| block
        j = st.j
        cutoff = np.abs(nus[min(keep, j) - 1])
        t, q, sdim = sla.schur(
            st.b[:j, :j], output="complex",
            sort=lambda x: abs(x) >= cutoff * (1.0 - 1e-12),
        )
        p = int(min(max(sdim, m), j - 1))
        st.v[:, :p] = st.v[:, :j] @ q[:, :p]
        st.v[:, p] = st.v[:, j]
        st.b[:, :] = 0.0
        st.b[:p, :p] = t[:p, :p]
        gnew = q[:, :p].T @ st.g[:j]
        st.g[:] = 0.0
        st.g[:p] = gnew
        st.j = p

    nus, s, resid = _ritz(st)
    nwant = min(m, st.j)
    pairs = _extract(cache, st, nus, s, resid, nwant, opts, force=True)
    raise NoConvergence(
        f"{sum(not p.converged for p in pairs)} of {nwant} Ritz pairs "
        f"unconverged after {opts.max_restarts} restarts",
        pairs=pairs,
    )


def _extract(cache, st, nus, s, resid, nwant, opts, force=False):
    pairs = []
    for i in range(nwant):
        nu = nus[i]
        if abs(nu) < 1e-300:
            continue
        x = st.v[:, : st.j] @ s[:, i]
        x /= np.linalg.norm(x)
        lam = cache.sigma + 1.0 / nu
        conv = bool(resid[i] <= opts.tol * abs(nu)) or st.invariant
        pairs.append(RitzPair(
            lam=lam, z=x, residual_estimate=float(resid[i]),
            converged=conv, nu=nu,
        ))
    return pairs
