import numpy as np
import pytest

from zgvscan import (
    DegenerateQuotient,
    EigenvalueCollision,
    OracleTooLarge,
    QuadraticPencil,
    apply_shift_invert,
    build_cache,
    build_explicit_deltas,
    example21,
    rayleigh_mu,
)
from zgvscan.dense import vec

from conftest import random_complex, random_pencil, rng_for


def dense_shift_invert(oracle, sigma, y):
    return np.linalg.solve(oracle.delta1 - sigma * oracle.delta0, oracle.delta0 @ y)


class TestExplicitDeltas:
    def test_delta0_singular_at_zero_delta(self):
        oracle = build_explicit_deltas(example21(), 0.0)
        sv = np.linalg.svd(oracle.delta0, compute_uv=False)
        assert sv[-1] <= 1e-10 * np.linalg.norm(oracle.delta0)

    def test_delta0_nonsingular_for_positive_delta(self):
        oracle = build_explicit_deltas(example21(), 1e-2)
        assert np.linalg.cond(oracle.delta0) < 1e8

    def test_scalar_pencil_hand_expansion(self):
        # n = 1: every Kronecker factor is a scalar, so the 2x2 Deltas can
        # be expanded by hand from the 3x3 determinant layout.
        l0, l1, l2, m = -1.3, 0.7, 2.1, 1.9
        delta = 0.05
        d1, d2 = 1 + delta, (1 + delta) ** 2
        pencil = QuadraticPencil(l0=[[l0]], l1=[[l1]], l2=[[l2]], m=[[m]])
        oracle = build_explicit_deltas(pencil, delta)
        g0 = l0 * m - m * l0            # = 0
        g1 = l1 * m - d1 * m * l1
        g2 = l2 * m - d2 * m * l2
        g3 = -l1 * l0 + d1 * l0 * l1
        g4 = d2 * l0 * l2 - l2 * l0
        g5 = -d1 * l2 * l1 + d2 * l1 * l2
        assert np.allclose(oracle.delta0, [[g1, g2], [g2, 0.0]])
        assert np.allclose(oracle.delta1, [[-g0, 0.0], [0.0, g2]])
        assert np.allclose(oracle.delta_m, [[g3, g4], [g4, g5]])

    def test_oracle_cap(self):
        rng = rng_for("oracle-cap")
        with pytest.raises(OracleTooLarge):
            build_explicit_deltas(random_pencil(rng, 13), 1e-2)

    def test_coupling_determinant_identity(self):
        # det(eta C2 + lam C1 + C0) = eta - lam^2 ties eta to lam^2.
        from zgvscan.mfrd import C0, C1, C2
        rng = rng_for("coupling-det")
        for _ in range(100):
            lam = complex(*rng.standard_normal(2))
            eta = complex(*rng.standard_normal(2))
            det = np.linalg.det(eta * C2 + lam * C1 + C0)
            assert abs(det - (eta - lam ** 2)) <= 1e-12 * (1 + abs(eta) + abs(lam) ** 2)


class TestBuildCache:
    def test_example21_cache_is_finite(self):
        cache = build_cache(example21(), 1.0j, 1e-2)
        assert np.all(np.isfinite(cache.schur_left.r))
        assert np.all(np.isfinite(cache.schur_right.r))

    def test_decoupled_collision_detection(self):
        # With M = I and L1 = L2 = 0 the reduced pair is (L0^T, L0) at any
        # shift, so the spectra always collide.
        l0 = np.diag([1.0, 2.0, -3.0])
        pencil = QuadraticPencil(l0=l0, l1=np.zeros((3, 3)),
                                 l2=np.zeros((3, 3)), m=np.eye(3))
        with pytest.raises(EigenvalueCollision):
            build_cache(pencil, 0.3j, 1e-2)

    def test_nearby_shifts_move_spectra_slightly(self):
        rng = rng_for("cache-shift-perturbation")
        pencil = random_pencil(rng, 4)
        c1 = build_cache(pencil, 0.7j, 1e-2)
        c2 = build_cache(pencil, 0.7j + 1e-6j, 1e-2)
        d1 = np.sort_complex(c1.schur_left.eigenvalues)
        d2 = np.sort_complex(c2.schur_left.eigenvalues)
        assert np.max(np.abs(d1 - d2)) < 1e-4
        assert np.max(np.abs(d1 - d2)) > 0

    def test_rejects_nonpositive_delta(self):
        with pytest.raises(ValueError):
            build_cache(example21(), 1.0j, 0.0)


class TestApplyShiftInvert:
    def test_zero_maps_to_zero(self):
        cache = build_cache(example21(), 0.8j, 1e-2)
        z = apply_shift_invert(cache, np.zeros(18, dtype=complex))
        assert np.linalg.norm(z) == 0.0

    def test_example21_matches_dense_oracle(self):
        rng = rng_for("apply-ex21")
        pencil = example21()
        oracle = build_explicit_deltas(pencil, 1e-2)
        cache = build_cache(pencil, 0.8j, 1e-2)
        y = random_complex(rng, 18)
        z = apply_shift_invert(cache, y)
        z_dense = dense_shift_invert(oracle, 0.8j, y)
        assert np.linalg.norm(z - z_dense) <= 1e-10 * np.linalg.norm(z_dense)

    def test_structured_residual(self):
        rng = rng_for("apply-resid")
        pencil = example21()
        oracle = build_explicit_deltas(pencil, 1e-2)
        cache = build_cache(pencil, 0.8j, 1e-2)
        y = random_complex(rng, 18)
        z = apply_shift_invert(cache, y)
        lhs = (oracle.delta1 - 0.8j * oracle.delta0) @ z
        rhs = oracle.delta0 @ y
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(rhs)

    def test_random_pencils_many_shifts_and_deltas(self):
        rng = rng_for("apply-sweep")
        for trial in range(12):
            n = int(rng.integers(2, 7))
            pencil = random_pencil(rng, n)
            delta = float(rng.choice([1e-1, 1e-2, 1e-3]))
            oracle = build_explicit_deltas(pencil, delta)
            sigma = complex(*rng.standard_normal(2))
            cache = build_cache(pencil, sigma, delta)
            for _ in range(4):
                y = random_complex(rng, 2 * n * n)
                z = apply_shift_invert(cache, y)
                z_dense = dense_shift_invert(oracle, sigma, y)
                assert np.linalg.norm(z - z_dense) <= 1e-9 * np.linalg.norm(z_dense)

    def test_linearity(self):
        rng = rng_for("apply-linearity")
        pencil = random_pencil(rng, 3)
        cache = build_cache(pencil, 0.4 + 0.2j, 1e-2)
        y1 = random_complex(rng, 18)
        y2 = random_complex(rng, 18)
        a, b = 1.3 - 0.7j, -0.2 + 2.1j
        lhs = apply_shift_invert(cache, a * y1 + b * y2)
        rhs = a * apply_shift_invert(cache, y1) + b * apply_shift_invert(cache, y2)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)

    def test_no_large_allocation(self):
        import tracemalloc

        rng = rng_for("apply-alloc")
        pencil = random_pencil(rng, 40)
        cache = build_cache(pencil, 0.5j, 1e-2)
        y = random_complex(rng, 2 * 40 * 40)
        apply_shift_invert(cache, y)  # warm up
        tracemalloc.start()
        apply_shift_invert(cache, y)
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        # a 2n^2 x 2n^2 dense matrix would be 4 n^4 * 16 bytes ~ 160 MB
        assert peak < 100 * 40 * 40 * 16


class TestRayleighMu:
    def test_eigenvector_of_oracle_pencil(self):
        pencil = example21()
        oracle = build_explicit_deltas(pencil, 1e-2)
        lam, zv = np.linalg.eig(np.linalg.solve(oracle.delta0, oracle.delta1))
        idx = int(np.argmin(np.abs(lam - 1.06j)))
        z = zv[:, idx]
        mu = rayleigh_mu(pencil, 1e-2, z)
        mu_oracle = (z.conj() @ oracle.delta_m @ z) / (z.conj() @ oracle.delta0 @ z)
        assert abs(mu - mu_oracle) <= 1e-10 * abs(mu_oracle)

    def test_random_matches_oracle_quotient(self):
        rng = rng_for("rayleigh-rand")
        pencil = random_pencil(rng, 2)
        oracle = build_explicit_deltas(pencil, 1e-2)
        z = random_complex(rng, 8)
        mu = rayleigh_mu(pencil, 1e-2, z)
        mu_oracle = (z.conj() @ oracle.delta_m @ z) / (z.conj() @ oracle.delta0 @ z)
        assert abs(mu - mu_oracle) <= 1e-12 * abs(mu_oracle)

    def test_scaling_invariance(self):
        rng = rng_for("rayleigh-scale")
        pencil = random_pencil(rng, 3)
        z = random_complex(rng, 18)
        mu1 = rayleigh_mu(pencil, 1e-2, z)
        mu2 = rayleigh_mu(pencil, 1e-2, 7j * z)
        assert abs(mu1 - mu2) <= 1e-13 * abs(mu1)

    def test_degenerate_quotient_raises(self):
        # With Z1 = 0 both t4 (built from Z1 only) and the z1-weighted term
        # vanish, so the denominator is exactly zero.
        pencil = example21()
        z = np.zeros(18, dtype=complex)
        z[9:] = vec(np.eye(3)).astype(complex)
        with pytest.raises(DegenerateQuotient):
            rayleigh_mu(pencil, 1e-2, z)
