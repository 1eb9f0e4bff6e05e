"""The quadratic matrix pencil W(k, omega) shared by all solver stages."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, SingularMass


@dataclass
class QuadraticPencil:
    """Four real n x n matrices defining
    W(k, omega) = (ik)^2 L2 + ik L1 + L0 + omega^2 M.

    M must be nonsingular (checked on construction: smallest singular value
    above 1e-12 * ||M||).
    """

    l0: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    m: np.ndarray
    _m_smin: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        mats = []
        for name in ("l0", "l1", "l2", "m"):
            a = np.asarray(getattr(self, name))
            if np.iscomplexobj(a):
                if np.max(np.abs(a.imag)) > 0:
                    raise ValueError(f"{name} must be real")
                a = a.real
            a = np.ascontiguousarray(a, dtype=float)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            mats.append(a)
            setattr(self, name, a)
        n = mats[0].shape[0]
        if any(a.shape[0] != n for a in mats):
            raise DimensionMismatch(
                "pencil matrices disagree in size: "
                + ", ".join(str(a.shape[0]) for a in mats)
            )
        sv = np.linalg.svd(self.m, compute_uv=False)
        self._m_smin = float(sv[-1])
        if sv[-1] <= 1e-12 * sv[0]:
            raise SingularMass(
                f"M is numerically singular (sigma_min/sigma_max = {sv[-1] / sv[0]:.3e})"
            )

    @property
    def n(self):
        return self.l0.shape[0]

    def scale(self):
        """Frobenius-norm scale of the pencil, used for relative tolerances."""
        return max(
            np.linalg.norm(self.l0),
            np.linalg.norm(self.l1),
            np.linalg.norm(self.l2),
            np.linalg.norm(self.m),
        )

    def lam_poly(self, lam, mu=0.0, stretch=1.0):
        """L0 + (s*lam) L1 + (s*lam)^2 L2 + mu M with s = ``stretch``.

        stretch=1 gives the plain QEP matrix in lam = ik; the relative-
        distance machinery uses stretch = 1 + delta.
        """
        s = stretch * lam
        return self.l0 + s * self.l1 + s * s * self.l2 + mu * self.m
