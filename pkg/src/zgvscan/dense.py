"""Dense complex linear-algebra kernels.

Everything here works with complex double precision; real inputs are
promoted on entry.  These are thin, contract-checked layers over LAPACK:
the shift-invert machinery built on top calls them with many right-hand
sides against a fixed pair of Schur factorizations, so the triangular
Sylvester solve is exposed separately from the one-shot driver.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import NoConvergence, RankDeficient, SingularSylvester

_TRSYL = None


def _trsyl():
    global _TRSYL
    if _TRSYL is None:
        (_TRSYL,) = sla.get_lapack_funcs(("trsyl",), (np.zeros((1, 1), complex),))
    return _TRSYL


def _as_complex(a):
    a = np.asarray(a)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return np.ascontiguousarray(a, dtype=complex)


def kron(a, b):
    """Kronecker product A (x) B, block (i,j) equal to a_ij * B."""
    return np.kron(_as_complex(a), _as_complex(b))


def vec(x):
    """Column-stacking vectorization, the convention under which
    vec(A X B) = (B^T (x) A) vec(X)."""
    return np.asarray(x).flatten(order="F")


def unvec(x, m, n=None):
    """Inverse of :func:`vec` for an m-by-n matrix."""
    n = m if n is None else n
    return np.asarray(x).reshape((m, n), order="F")


@dataclass
class SchurFactorization:
    """A = Q R Q^H with Q unitary and R upper triangular."""

    q: np.ndarray
    r: np.ndarray

    @property
    def eigenvalues(self):
        return np.diag(self.r)


def schur(a):
    """Complex Schur decomposition of a square matrix.

    Raises NoConvergence if the underlying QR iteration gives up.
    """
    a = _as_complex(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("schur requires a square matrix")
    try:
        r, q = sla.schur(a, output="complex")
    except sla.LinAlgError as exc:  # zgees failed to converge
        raise NoConvergence(f"Schur QR iteration did not converge: {exc}") from exc
    return SchurFactorization(q=q, r=r)


def _check_sylvester_spectra(r, s, norm_scale):
    # AX + XB = C is solvable iff no eigenvalue of A collides with -spec(B),
    # i.e. all r_ii + s_jj stay away from zero.
    gaps = np.abs(np.diag(r)[:, None] + np.diag(s)[None, :])
    tol = 1e-12 * norm_scale
    if gaps.min() < tol:
        raise SingularSylvester(
            f"eigenvalue collision: min |r_ii + s_jj| = {gaps.min():.3e} < {tol:.3e}"
        )


def solve_triangular_sylvester(r, s, d):
    """Solve R Y + Y S = D for upper-triangular R (m x m) and S (n x n).

    This is the column-recurrence core of Bartels-Stewart: the i-th column
    solves (R + s_ii I) y_i = d_i - sum_{k<i} s_ki y_k, left to right.
    Delegated to LAPACK ztrsyl, which implements exactly that sweep.
    """
    r = _as_complex(r)
    s = _as_complex(s)
    d = _as_complex(d)
    _check_sylvester_spectra(r, s, np.linalg.norm(r) + np.linalg.norm(s))
    y, scale, info = _trsyl()(r, s, d, isgn=1)
    if info < 0:
        raise ValueError(f"trsyl: illegal argument {-info}")
    if info == 1:
        raise SingularSylvester("trsyl solved a perturbed system (near collision)")
    return y / scale


def solve_sylvester(a, b, c, fa=None, fb=None):
    """Solve A X + X B = C by Bartels-Stewart.

    Schur factorizations of A and B may be passed in (``fa``, ``fb``) when
    many right-hand sides share the same matrix pair; otherwise they are
    computed here.  Cost O(m^3 + n^3) plus O(m n (m + n)) per solve.
    """
    c = _as_complex(c)
    fa = schur(a) if fa is None else fa
    fb = schur(b) if fb is None else fb
    d = fa.q.conj().T @ c @ fb.q
    y = solve_triangular_sylvester(fa.r, fb.r, d)
    return fa.q @ y @ fb.q.conj().T


def eig_dense(a):
    """All eigenpairs of a square matrix as (eigenvalue, unit eigenvector)."""
    a = _as_complex(a)
    try:
        w, v = sla.eig(a)
    except sla.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue iteration did not converge: {exc}") from exc
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    return [(w[i], v[:, i]) for i in range(len(w))]


@dataclass
class SingularTriplet:
    sigma: float
    u_left: np.ndarray
    v_right: np.ndarray


def smallest_singular_triplets(a, count=1):
    """The ``count`` smallest singular triplets, ascending in sigma.

    Computed from the full decomposition; the matrices in this package stay
    small enough that an iterative scheme would buy nothing.
    """
    a = _as_complex(a)
    if count < 1 or count > min(a.shape):
        raise ValueError("count must satisfy 1 <= count <= min(rows, cols)")
    u, s, vh = np.linalg.svd(a)
    out = []
    for j in range(count):
        i = len(s) - 1 - j
        out.append(SingularTriplet(sigma=float(s[i]), u_left=u[:, i], v_right=vh[i].conj()))
    return out


def lstsq(a, b, rank_tol=1e-12):
    """Least-squares solve of an overdetermined system via Householder QR.

    Raises RankDeficient when a diagonal entry of the triangular factor
    falls below ``rank_tol`` times the largest one.
    """
    a = _as_complex(a)
    b = _as_complex(b).ravel()
    p, q = a.shape
    if p < q:
        raise ValueError("lstsq requires p >= q")
    qf, rf = sla.qr(a, mode="economic")
    diag = np.abs(np.diag(rf))
    if diag.min() < rank_tol * diag.max():
        raise RankDeficient(
            f"triangular pivot ratio {diag.min() / diag.max():.3e} below {rank_tol:.1e}"
        )
    return sla.solve_triangular(rf, qf.conj().T @ b)
