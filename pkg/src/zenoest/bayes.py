"""Grid Bayesian filter over candidate parameter values and hybrid scheduling.

The filter multiplies the prior weight of every candidate by the probability
that candidate assigns to each observed outcome, given the previous one.
Likelihoods are accumulated in the log domain and renormalized at every
step, so long records never underflow.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (DimensionError, ImpossibleRecordError, InfeasiblePlanError,
                     InvalidParameterError)
from .fisher import analytic_pgg, optimal_tau
from .measurement import eigenbasis, kernel_matrix
from .quantum import apply_propagator, propagator, pure_state, two_level_model


@dataclass
class PosteriorGrid:
    candidates: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.candidates = np.asarray(self.candidates, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.candidates.shape != self.weights.shape or self.candidates.ndim != 1:
            raise DimensionError("candidates and weights must be 1-d arrays of equal length")
        if len(self.candidates) > 1 and np.any(np.diff(self.candidates) <= 0):
            raise InvalidParameterError("candidates must be strictly increasing")
        if np.any(self.weights < 0) or not np.isfinite(self.weights).all():
            raise InvalidParameterError("weights must be finite and non-negative")
        total = self.weights.sum()
        if total <= 0:
            raise InvalidParameterError("weights sum to zero")
        self.weights = self.weights / total

    @classmethod
    def uniform(cls, lo, hi, points=501):
        c = np.linspace(lo, hi, points)
        return cls(c, np.full(points, 1.0 / points))


def candidate_kernels(model_family, candidates, tau, basis=None):
    """Stack of outcome kernels, shape (n_candidates, K, K)."""
    basis = eigenbasis() if basis is None else basis
    return np.array([kernel_matrix(propagator(model_family(c), tau), basis) for c in candidates])


def _normalize_log(logw):
    top = logw.max()
    if not np.isfinite(top):
        raise ImpossibleRecordError("every candidate assigns zero probability to the record")
    w = np.exp(logw - top)
    return w / w.sum()


def bayes_update(posterior, kernels, prev, outcome):
    """One filter step: w_i <- w_i * K_i[outcome, prev], renormalized.

    ``prev`` and ``outcome`` are label indices into the kernels.
    """
    kernels = np.asarray(kernels)
    if kernels.shape[0] != len(posterior.candidates):
        raise DimensionError("one kernel per candidate is required")
    lik = kernels[:, outcome, prev]
    with np.errstate(divide="ignore"):
        logw = np.log(posterior.weights) + np.log(lik)
    return PosteriorGrid(posterior.candidates, _normalize_log(logw))


def run_filter(record, grid, model_family, schedule=None, basis=None, kernel_cache=None):
    """Posterior after every measurement of ``record``.

    Returns an array of shape (N + 1, n_candidates); row 0 is the prior.
    Kernels are computed once per (candidate, tau) pair; pass a dict as
    ``kernel_cache`` to share them between runs on the same grid and family.
    """
    basis = eigenbasis(record.labels) if basis is None else basis
    schedule = record.schedule if schedule is None else [(float(t), int(c)) for t, c in schedule]
    if sum(c for _, c in schedule) != len(record):
        raise InvalidParameterError("schedule counts do not match the record length")
    rec_taus = record.taus()
    taus = np.concatenate([np.full(c, t) for t, c in schedule]) if schedule else np.zeros(0)
    if not np.allclose(rec_taus, taus, rtol=1e-12, atol=0):
        raise InvalidParameterError("schedule intervals do not match the record")

    idx = record.indices()
    n = len(record)
    with np.errstate(divide="ignore"):
        logw = np.log(grid.weights)
        loglik = np.empty((n, len(grid.candidates)))
        cache = {} if kernel_cache is None else kernel_cache
        for j in range(n):
            t = taus[j]
            if t not in cache:
                cache[t] = np.log(candidate_kernels(model_family, grid.candidates, t, basis))
            loglik[j] = cache[t][:, idx[j + 1], idx[j]]

    out = np.empty((n + 1, len(grid.candidates)))
    out[0] = grid.weights
    for j in range(n):
        logw = logw + loglik[j]
        try:
            w = _normalize_log(logw)
        except ImpossibleRecordError:
            raise ImpossibleRecordError(
                f"measurement {j + 1} has zero likelihood under every candidate") from None
        out[j + 1] = w
        with np.errstate(divide="ignore"):
            logw = np.log(w)
    return out


@dataclass
class PosteriorStats:
    map_estimate: float
    mean: float
    variance: float
    peaks: list


def posterior_stats(posterior, peak_fraction=0.1):
    """MAP (ties to the smallest candidate), mean, variance and peak list.

    Peaks are local maxima (strictly above the left neighbour, at least the
    right one) whose weight exceeds ``peak_fraction`` of the global maximum.
    """
    c, w = posterior.candidates, posterior.weights
    imax = int(np.argmax(w))
    mean = float(np.dot(c, w))
    var = float(np.dot((c - mean) ** 2, w))
    threshold = peak_fraction * w[imax]
    peaks = []
    for i in range(len(w)):
        left = w[i - 1] if i > 0 else -np.inf
        right = w[i + 1] if i + 1 < len(w) else -np.inf
        if w[i] > left and w[i] >= right and w[i] > threshold:
            peaks.append(float(c[i]))
    return PosteriorStats(float(c[imax]), mean, max(var, 0.0), peaks)


def ambiguous_candidates(omega0, gamma, tau, omega_max):
    """Rabi frequencies indistinguishable from omega0 at interval tau in the
    omega >> gamma limit: sqrt(W^2 + g^2) tau = 2 n pi +- sqrt(omega0^2 + g^2) tau."""
    if tau <= 0:
        raise InvalidParameterError("tau must be positive")
    chi0 = math.hypot(omega0, gamma)
    chi_max = math.hypot(omega_max, gamma)
    found = []
    n = 1
    while 2 * n * math.pi / tau - chi0 <= chi_max:
        for sign in (-1.0, 1.0):
            chi = 2 * n * math.pi / tau + sign * chi0
            rad = chi * chi - gamma * gamma
            if chi <= 0 or rad <= 0:
                continue
            w = math.sqrt(rad)
            if 0 < w <= omega_max and not math.isclose(w, omega0, rel_tol=1e-12):
                found.append(w)
        n += 1
    return sorted(found)


def state_distance(rho_a, rho_b):
    """Trace distance ||rho_a - rho_b||_1 (sum of absolute eigenvalues)."""
    rho_a = np.asarray(rho_a, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    if rho_a.shape != rho_b.shape:
        raise DimensionError(f"shapes differ: {rho_a.shape} vs {rho_b.shape}")
    diff = rho_a - rho_b
    diff = 0.5 * (diff + diff.conj().T)
    return float(np.abs(np.linalg.eigvalsh(diff)).sum())


@dataclass
class HybridPlan:
    q: int
    tau_s: float
    tau_opt: float
    N: int
    epsilon: float
    L: float
    eta: float
    L_trace: float = float("nan")
    omega_opposite: float = float("nan")
    capped: bool = False

    def schedule(self):
        return [(self.tau_s, self.q), (self.tau_opt, self.N - self.q)]

    @property
    def total_time(self):
        return self.q * self.tau_s + (self.N - self.q) * self.tau_opt

    def to_dict(self):
        return asdict(self)


def coarse_interval(omega0, omega_max, gamma, eta):
    """Longest coarse interval that still excludes every alias below omega_max."""
    return (2 * math.pi - eta) / (math.hypot(omega_max, gamma) + math.hypot(omega0, gamma))


def opposite_distance(omega0, gamma, tau_s):
    """Distance L to the Rabi frequency whose outcome probabilities at tau_s
    are opposite to omega0's.

    Returns (L, L_trace, omega_opp): L is twice the gap in P(g|g), L_trace
    the exact trace distance of the two evolved states.
    """
    chi_opp = math.pi / tau_s - math.hypot(omega0, gamma)
    rad = chi_opp * chi_opp - gamma * gamma
    if chi_opp <= 0 or rad <= 0:
        raise InfeasiblePlanError("no Rabi frequency with opposite outcome probabilities at tau_s")
    w_opp = math.sqrt(rad)
    L = 2 * abs(analytic_pgg(w_opp, 0.0, gamma, tau_s) - analytic_pgg(omega0, 0.0, gamma, tau_s))
    g0 = pure_state(0)
    rho_opp = apply_propagator(propagator(two_level_model(w_opp, 0, gamma), tau_s), g0)
    rho_0 = apply_propagator(propagator(two_level_model(omega0, 0, gamma), tau_s), g0)
    return L, state_distance(rho_opp, rho_0), w_opp


def _split(n, L):
    """(epsilon, q) for n measurements: epsilon at its lower bound, q = ceil(n^(1 - epsilon))."""
    eps = 0.5 + math.log(L) / math.log(n)
    q = math.ceil(n ** (1.0 - eps) - 1e-9)
    return eps, q


def plan_hybrid(T, gamma, omega0_guess, omega_max, eta=0.1, tau_range=None, grid_points=2000,
                max_n=100000):
    """Coarse-then-optimal measurement schedule for a total probing time T.

    q measurements at the alias-excluding interval tau_s are followed by N - q
    at the Fisher-optimal interval.  N is the largest count whose schedule
    fits in T, with q = ceil(N^(1 - epsilon)) and epsilon = 1/2 + ln L / ln N.
    When the information rate grows without bound in tau (no dephasing), a
    single long final interval tau_opt = T - q tau_s is used.
    """
    if T <= 0:
        raise InvalidParameterError("T must be positive")
    if not omega_max > omega0_guess:
        raise InvalidParameterError("omega_max must exceed omega0_guess")
    if not 0 < eta < math.pi:
        raise InvalidParameterError("eta must lie in (0, pi)")
    tau_s = coarse_interval(omega0_guess, omega_max, gamma, eta)
    L, L_trace, w_opp = opposite_distance(omega0_guess, gamma, tau_s)
    if not 0 < L < 1 + 1e-12:
        raise InfeasiblePlanError(f"distance L = {L!r} is not in (0, 1)")

    tau_range = (0.0, T) if tau_range is None else tau_range
    tau_opt, _ = optimal_tau(omega0_guess, 0.0, gamma, tau_range, grid_points)
    unbounded = tau_opt >= tau_range[1] * (1 - 1e-6)

    best = None
    if not unbounded:
        # time used grows with N, so the first overrun ends the search
        for n in range(2, max_n + 1):
            eps, q = _split(n, L)
            if q >= n:
                continue
            if q * tau_s + (n - q) * tau_opt > T:
                break
            best = HybridPlan(q, tau_s, tau_opt, n, eps, L, eta, L_trace, w_opp)
    if best is None:
        # one long final interval: smallest q with q >= ceil((q + 1)^(1 - epsilon))
        q = next((q for q in range(1, max_n) if _split(q + 1, L)[1] <= q), None)
        if q is None:
            raise InfeasiblePlanError("no consistent coarse measurement count")
        eps, _ = _split(q + 1, L)
        final = T - q * tau_s
        if final <= 0:
            raise InfeasiblePlanError(f"T = {T!r} cannot hold {q} coarse measurements")
        best = HybridPlan(q, tau_s, final, q + 1, eps, L, eta, L_trace, w_opp, capped=True)
    return best
