"""Projective measurements, outcome kernels and seeded trajectory simulation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (AmbiguityError, DimensionError, InvalidParameterError,
                     ProjectionError)
from .quantum import apply_propagator, check_density, propagator, pure_state

PROJECTION_FLOOR = 1e-14
STATIONARY_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementBasis:
    labels: tuple
    projectors: tuple

    def __post_init__(self):
        labels = tuple(str(l) for l in self.labels)
        projs = tuple(np.asarray(p, dtype=complex) for p in self.projectors)
        if len(labels) != len(projs) or not projs:
            raise InvalidParameterError("need one projector per label")
        if len(set(labels)) != len(labels):
            raise InvalidParameterError(f"duplicate labels in {labels}")
        d = projs[0].shape[0]
        for i, p in enumerate(projs):
            if p.shape != (d, d):
                raise DimensionError("projectors must share one square shape")
            if np.abs(p @ p - p).max() > 1e-12:
                raise InvalidParameterError(f"projector {labels[i]!r} is not idempotent")
            for q in projs[:i]:
                if np.abs(p @ q).max() > 1e-12:
                    raise InvalidParameterError("projectors are not mutually orthogonal")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "projectors", projs)

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    def index(self, label):
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise InvalidParameterError(f"unknown outcome label {label!r}") from None

    def is_complete(self, atol=1e-12):
        total = sum(self.projectors)
        return np.abs(total - np.eye(self.dim)).max() <= atol

    def state(self, label):
        """Normalized post-measurement state for a rank-1 projector."""
        p = self.projectors[self.index(label)]
        return p / np.trace(p).real


def eigenbasis(labels=("g", "e")):
    """Computational-basis projectors |k><k|, one per label."""
    d = len(labels)
    return MeasurementBasis(tuple(labels), tuple(pure_state(k, d) for k in range(d)))


def outcome_probabilities(rho, basis):
    """p_k = Tr(P_k rho), clipped to [0, 1]."""
    if not basis.is_complete():
        raise InvalidParameterError("measurement basis is incomplete")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (basis.dim, basis.dim):
        raise DimensionError(f"state shape {rho.shape} does not match basis dim {basis.dim}")
    p = np.array([np.trace(P @ rho).real for P in basis.projectors])
    p = np.clip(p, 0.0, 1.0)
    if abs(p.sum() - 1.0) > 1e-10:
        raise InvalidParameterError(f"outcome probabilities sum to {p.sum()!r}")
    return p


def project(rho, label, basis):
    """Conditional state after observing ``label``."""
    rho = np.asarray(rho, dtype=complex)
    P = basis.projectors[basis.index(label)]
    prob = np.trace(P @ rho).real
    if prob <= PROJECTION_FLOOR:
        raise ProjectionError(f"outcome {label!r} has probability {prob:.3g}")
    out = P @ rho @ P / prob
    return 0.5 * (out + out.conj().T)


@dataclass(frozen=True)
class TransitionKernel:
    """matrix[m, l] = P(next = labels[m] | previous = labels[l]) after time tau."""

    matrix: np.ndarray
    tau: float
    labels: tuple

    def prob(self, outcome, prev):
        return self.matrix[self.labels.index(outcome), self.labels.index(prev)]


def kernel_matrix(prop, basis):
    """Column-stochastic outcome matrix for a precomputed propagator."""
    k = len(basis.labels)
    K = np.empty((k, k))
    for l, label in enumerate(basis.labels):
        K[:, l] = outcome_probabilities(apply_propagator(prop, basis.state(label)), basis)
    return K / K.sum(axis=0, keepdims=True)


def transition_kernel(model, basis, tau):
    if basis.dim != model.dim:
        raise DimensionError("basis and model dimensions differ")
    return TransitionKernel(kernel_matrix(propagator(model, tau), basis), float(tau), basis.labels)


def stationary_distribution(kernel):
    """Stationary vector pi of the outcome chain, K @ pi = pi.

    Raises AmbiguityError when the eigenvalue-1 eigenspace is more than one
    dimensional (e.g. tau = 0 or a chain split into closed classes).
    """
    K = np.asarray(getattr(kernel, "matrix", kernel), dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionError("kernel must be square")
    if np.any(K < -1e-12) or np.abs(K.sum(axis=0) - 1.0).max() > 1e-10:
        raise InvalidParameterError("kernel is not column-stochastic")
    n = K.shape[0]
    _, s, vh = np.linalg.svd(K - np.eye(n))
    nullity = int(np.sum(s < STATIONARY_TOL))
    if nullity != 1:
        raise AmbiguityError(
            f"stationary distribution is not unique: eigenvalue-1 eigenspace has dimension {nullity}",
            nullity)
    pi = vh[-1].conj().real
    pi = pi / pi.sum()
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


@dataclass
class MeasurementRecord:
    """Outcome labels of N measurements.

    ``pair_counts[m, l]`` counts steps that went from labels[l] to labels[m],
    the same orientation as TransitionKernel.matrix.  The first step starts
    from ``initial_label``, so the counts sum to N.
    """

    labels: tuple
    initial_label: str
    outcomes: list
    schedule: list
    seed: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.outcomes = [str(o) for o in self.outcomes]
        self.schedule = [(float(t), int(c)) for t, c in self.schedule]
        if sum(c for _, c in self.schedule) != len(self.outcomes):
            raise InvalidParameterError("schedule counts do not match the number of outcomes")
        unknown = set(self.outcomes) - set(self.labels)
        if unknown or self.initial_label not in self.labels:
            raise InvalidParameterError(f"record contains unknown labels {sorted(unknown)}")

    def __len__(self):
        return len(self.outcomes)

    @property
    def tau(self):
        taus = {t for t, c in self.schedule if c}
        if len(taus) > 1:
            raise InvalidParameterError("record spans several measurement intervals")
        return taus.pop() if taus else (self.schedule[0][0] if self.schedule else 0.0)

    def taus(self):
        """Interval preceding each measurement."""
        return np.concatenate([np.full(c, t) for t, c in self.schedule]) if self.schedule else np.zeros(0)

    def times(self):
        return np.cumsum(self.taus())

    def indices(self):
        """Label indices with the initial label prepended (length N + 1)."""
        lookup = {l: i for i, l in enumerate(self.labels)}
        return np.array([lookup[self.initial_label]] + [lookup[o] for o in self.outcomes], dtype=int)

    @property
    def pair_counts(self):
        idx = self.indices()
        k = len(self.labels)
        counts = np.zeros((k, k), dtype=np.int64)
        np.add.at(counts, (idx[1:], idx[:-1]), 1)
        return counts


def make_rng(seed):
    """Counter-based Philox stream; the seed is stored with every artifact."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass
class Trajectory:
    record: MeasurementRecord
    times: np.ndarray
    populations: np.ndarray  # population of the last basis label (|e> for two levels)


def simulate_schedule(model, basis, schedule, seed, initial_label=None, samples_per_interval=20):
    """Alternate free evolution and sampled projective measurements.

    ``schedule`` is a list of (tau, count) segments executed in order.  After
    every projection the state is a basis state, so each segment only needs
    the evolved basis states, which are computed once and reused.
    """
    if basis.dim != model.dim:
        raise DimensionError("basis and model dimensions differ")
    schedule = [(float(t), int(c)) for t, c in schedule]
    if any(c < 0 for _, c in schedule) or any(t < 0 for t, _ in schedule):
        raise InvalidParameterError("schedule entries must be non-negative")
    n_total = sum(c for _, c in schedule)
    if n_total < 1:
        raise InvalidParameterError("need at least one measurement")
    if samples_per_interval < 0:
        raise InvalidParameterError("samples_per_interval must be >= 0")
    initial_label = basis.labels[0] if initial_label is None else str(initial_label)
    current = basis.index(initial_label)
    k = len(basis.labels)
    rng = make_rng(seed)
    draws = rng.random(n_total)

    out_idx = np.empty(n_total, dtype=int)
    prev_idx = np.empty(n_total, dtype=int)
    seg_tau = np.empty(n_total)
    pos = 0
    pop_times, pop_values = [], []
    t_start = 0.0
    for tau, count in schedule:
        if count == 0:
            continue
        cum = np.cumsum(kernel_matrix(propagator(model, tau), basis), axis=0)
        cum[-1] = 1.0
        for j in range(pos, pos + count):
            prev_idx[j] = current
            current = int(np.searchsorted(cum[:, current], draws[j], side="right"))
            current = min(current, k - 1)
            out_idx[j] = current
        if samples_per_interval:
            frac = np.arange(samples_per_interval) / samples_per_interval
            table = np.empty((k, samples_per_interval))
            for l in range(k):
                start = basis.state(basis.labels[l])
                for s, f in enumerate(frac):
                    rho = apply_propagator(propagator(model, f * tau), start) if f else start
                    table[l, s] = rho[-1, -1].real
            starts = t_start + tau * np.arange(count)
            pop_times.append((starts[:, None] + tau * frac[None, :]).ravel())
            pop_values.append(table[prev_idx[pos:pos + count]].ravel())
        seg_tau[pos:pos + count] = tau
        t_start += tau * count
        pos += count

    record = MeasurementRecord(
        labels=basis.labels, initial_label=initial_label,
        outcomes=[basis.labels[i] for i in out_idx], schedule=schedule, seed=seed,
        params=dict(getattr(model, "params", {})))
    if pop_times:
        times = np.concatenate(pop_times + [[t_start]])
        final = basis.state(basis.labels[int(out_idx[-1])])[-1, -1].real
        pops = np.concatenate(pop_values + [[final]])
    else:
        times, pops = np.zeros(0), np.zeros(0)
    return Trajectory(record, times, pops)


def simulate_trajectory(model, basis, tau, n, seed, samples_per_interval=20, initial_label=None):
    """Record of ``n`` measurements at a fixed interval ``tau``.

    Returns a Trajectory whose ``populations`` hold the last-label population
    at ``samples_per_interval`` points per interval (pre-measurement values
    inside each interval, final post-measurement value appended).
    """
    if n < 1:
        raise InvalidParameterError("need at least one measurement")
    return simulate_schedule(model, basis, [(tau, n)], seed, initial_label=initial_label,
                             samples_per_interval=samples_per_interval)


def flip_fraction(record):
    """Fraction of measurements whose outcome differs from the previous one."""
    idx = record.indices()
    return float(np.mean(idx[1:] != idx[:-1])) if len(idx) > 1 else 0.0
