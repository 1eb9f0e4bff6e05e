"""Interval scan for slope-zero points: sweep shift targets across
[k_a, k_b], harvest relative-distance candidates from the shift-invert
eigensolver, refine each with Gauss-Newton, classify and deduplicate.

The target update follows the scanning rule
    k0 <- max(k0 + dk, 0.95 * max{k* found so far}),
so a freshly found point pulls the next target just below it and the sweep
skips ground already covered.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla

from .arnoldi import ArnoldiOptions, eigs_closest
from .blas import single_thread_blas
from .errors import (
    DegenerateQuotient,
    EigenvalueCollision,
    NoConvergence,
    StagnatedResidual,
    ZgvError,
)
from .mfrd import build_cache, rayleigh_mu
from .refine import (
    CROSSING,
    TRIVIAL_ZGV,
    ZGV,
    ZgvPoint,
    classify,
    deflated_initial_vectors,
    gauss_newton,
    initial_vectors,
)


@dataclass
class ScanConfig:
    k_a: float
    k_b: float
    dk: float
    m: int = 8                      # eigenvalues per target
    delta: float = 1e-2             # relative-distance regularization
    arnoldi: ArnoldiOptions = None
    pre_filter: float = 1e-2        # realness gate before refinement
    newton_tol: float = None        # None -> 1e-10 (equilibrated residual)
    newton_maxit: int = 30
    dedup_tol: float = 1e-6

    def __post_init__(self):
        if not self.k_a < self.k_b:
            raise ValueError("need k_a < k_b")
        if self.dk <= 0 or self.delta <= 0 or self.m < 1:
            raise ValueError("dk, delta must be positive and m >= 1")
        if self.arnoldi is None:
            self.arnoldi = ArnoldiOptions(m=self.m)
        elif self.arnoldi.m != self.m:
            self.arnoldi = replace(self.arnoldi, m=self.m)


@dataclass
class Mep3Candidate:
    lam: complex
    mu: complex
    eta: complex                    # = lam^2 through the coupling matrices
    z: np.ndarray = field(repr=False)
    source_target: float = 0.0
    status: str = "new"             # diagnostics: refined / prefiltered / ...


@dataclass
class ScanResult:
    points: list                    # deduplicated ZgvPoints sorted by k
    candidates: list                # full Mep3Candidate log
    targets: list                   # shift targets in sweep order
    counters: dict

    def classified(self, classification):
        return [p for p in self.points if p.classification == classification]


def trivial_zgv(pencil, tol_imag=1e-6):
    """Points at k = 0, from the eigenvalues of (L0 + omega^2 M) u = 0.

    Keeps eigenvalues with omega^2 real (up to the filter) and omega >= 0,
    including rigid-body zeros.
    """
    w2, vl, vr = sla.eig(pencil.l0, -pencil.m, left=True)
    scale = pencil.scale()
    points = []
    kept = []
    for i in range(len(w2)):
        if abs(w2[i].imag) > tol_imag * (1.0 + abs(w2[i])):
            continue
        if w2[i].real < -tol_imag * scale:
            continue
        kept.append((float(np.sqrt(max(w2[i].real, 0.0))), i))
    kept.sort()
    for omega, i in kept:
        u = vr[:, i] / np.linalg.norm(vr[:, i])
        z = vl[:, i] / np.linalg.norm(vl[:, i])
        res = float(np.linalg.norm((pencil.l0 + omega ** 2 * pencil.m) @ u))
        others = [o for o, j in kept if j != i]
        gap = min((abs(o - omega) for o in others), default=float("inf"))
        points.append(ZgvPoint(
            k=0.0, omega=omega, u=u, z=z, residual=res,
            classification=TRIVIAL_ZGV, omega_gap=float(gap),
        ))
    return points


def _dedup(points, k_bound, tol):
    """Merge same-class points within tol in both k and omega, keeping the
    representative with the smaller residual."""
    out = []
    for p in sorted(points, key=lambda p: (p.classification, p.k, p.omega)):
        merged = False
        for i, q in enumerate(out):
            if q.classification != p.classification:
                continue
            if abs(p.k - q.k) <= tol * (1.0 + k_bound) and \
                    abs(p.omega - q.omega) <= tol * (1.0 + q.omega):
                if p.residual < q.residual:
                    out[i] = p
                merged = True
                break
        if not merged:
            out.append(p)
    out.sort(key=lambda p: (p.k, p.omega))
    return out


def _refine_candidate(pencil, cand, config, counters):
    """Gauss-Newton from a candidate; retry from the deflated span when the
    first run fails or lands far from the candidate's prediction."""
    lam0 = 1j * cand.lam.imag
    mu0 = cand.mu.real
    k_pred = cand.lam.imag * (1.0 + config.delta / 2.0)
    wander_tol = 10.0 * config.delta * (1.0 + abs(k_pred))
    states = []

    def attempt(u0, y0):
        try:
            return gauss_newton(pencil, u0, y0, lam0, mu0,
                                tol=config.newton_tol, maxit=config.newton_maxit)
        except (NoConvergence, StagnatedResidual):
            counters["refine_failures"] += 1
            return None

    first = attempt(*initial_vectors(pencil, lam0, mu0))
    if first is not None:
        states.append(first)
    wandered = first is None or abs(first.lam.imag - k_pred) > wander_tol
    if wandered:
        second = attempt(*deflated_initial_vectors(pencil, lam0, mu0, config.delta))
        if second is not None:
            states.append(second)
    return states


def _scan_interval(pencil, config):
    """One sequential sweep; returns (raw points, candidates, targets, counters)."""
    counters = {
        "arnoldi_failures": 0, "degenerate_mu": 0, "prefiltered": 0,
        "refine_failures": 0, "out_of_range": 0, "collisions_nudged": 0,
    }
    points = []
    candidates = []
    targets = []
    # wavenumbers feeding the target-update rule: every converged point
    # that passed the group-velocity condition (crossings included; the
    # simplicity verification is a separate classification concern)
    found_ks = []
    k0 = config.k_a
    while k0 < config.k_b:
        targets.append(k0)
        sigma = 1j * k0
        try:
            cache = build_cache(pencil, sigma, config.delta)
        except EigenvalueCollision:
            counters["collisions_nudged"] += 1
            sigma = sigma + 1j * 1e-6 * (1.0 + k0)
            cache = build_cache(pencil, sigma, config.delta)
        try:
            pairs = eigs_closest(cache, config.arnoldi)
        except NoConvergence as exc:
            counters["arnoldi_failures"] += 1
            pairs = [p for p in exc.pairs if p.converged]
        except ZgvError:
            counters["arnoldi_failures"] += 1
            pairs = []
        for pair in pairs:
            if not pair.converged:
                continue
            try:
                mu = rayleigh_mu(pencil, config.delta, pair.z)
            except DegenerateQuotient:
                counters["degenerate_mu"] += 1
                continue
            cand = Mep3Candidate(lam=pair.lam, mu=mu, eta=pair.lam ** 2,
                                 z=pair.z, source_target=k0)
            candidates.append(cand)
            if abs(pair.lam.real) > config.pre_filter * (1.0 + abs(pair.lam)) or \
                    abs(mu.imag) > config.pre_filter * (1.0 + abs(mu)):
                cand.status = "prefiltered"
                counters["prefiltered"] += 1
                continue
            cand.status = "refined"
            for state in _refine_candidate(pencil, cand, config, counters):
                point = classify(pencil, state, k_bound=config.k_b)
                in_range = (config.k_a - 1e-9 * (1.0 + config.k_b) <= point.k
                            <= config.k_b + 1e-9 * (1.0 + config.k_b))
                if point.classification == TRIVIAL_ZGV:
                    in_range = config.k_a <= 0.0
                if not in_range:
                    counters["out_of_range"] += 1
                    continue
                points.append(point)
                if point.classification in (ZGV, CROSSING):
                    found_ks.append(point.k)
        step = k0 + config.dk
        if found_ks:
            k0 = max(step, 0.95 * max(found_ks))
        else:
            k0 = step
    return points, candidates, targets, counters


def scan(pencil, config, threads=1):
    """Run the scanning algorithm over [k_a, k_b].

    Per-target eigensolver failures are logged in the counters and the
    sweep continues.  With threads > 1 the interval is split into disjoint
    sub-intervals scanned concurrently and merged (the target-update rule
    is history-dependent, so each sub-interval is still sequential).
    When the interval contains k = 0 the trivial family is appended.
    """
    with single_thread_blas():
        return _scan(pencil, config, threads)


def _scan(pencil, config, threads):
    if threads <= 1 or (config.k_b - config.k_a) <= 2 * config.dk:
        points, candidates, targets, counters = _scan_interval(pencil, config)
    else:
        edges = np.linspace(config.k_a, config.k_b, threads + 1)
        subs = [replace(config, k_a=float(a), k_b=float(b))
                for a, b in zip(edges[:-1], edges[1:])]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: _scan_interval(pencil, c), subs))
        points, candidates, targets = [], [], []
        counters = {}
        for pts, cands, tgs, cts in results:
            points += pts
            candidates += cands
            targets += tgs
            for key, val in cts.items():
                counters[key] = counters.get(key, 0) + val
    if config.k_a <= 0.0 <= config.k_b:
        points += trivial_zgv(pencil)
    points = _dedup(points, config.k_b, config.dedup_tol)
    return ScanResult(points=points, candidates=candidates,
                      targets=targets, counters=counters)
