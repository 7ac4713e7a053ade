"""Fisher information of repeated projective measurement records.

Several independent routes are provided:

* ``fisher_general``: numerical, any model family, from the outcome kernel
  and its stationary distribution.
* ``fisher_binary``: two-outcome symmetric records, F/N = p'^2 / (p (1 - p)).
* ``analytic_fisher``: closed forms for the driven two-level atom with either
  detuning or dephasing (not both).
* ``short_tau_fisher``: small-interval expansion through the survival
  coefficients a and b of ``zeno_coefficients``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DivergentInformationError, InvalidParameterError,
                     OutOfRegimeError, UnsupportedClosedFormError)
from .measurement import eigenbasis, stationary_distribution, transition_kernel
from .quantum import (apply_liouvillian, build_liouvillian, check_density,
                      purity, propagate, pure_state, two_level_model)

KERNEL_FLOOR = 1e-12
DERIV_FLOOR = 1e-9
CRITICAL_PGG_TOL = 1e-8
CRITICAL_FISHER_TOL = 1e-6
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# general multinomial route

def derivative(fn, x0, h):
    """Central difference with one Richardson step (error O(h^4))."""
    d1 = (fn(x0 + h) - fn(x0 - h)) / (2.0 * h)
    h2 = 0.5 * h
    d2 = (fn(x0 + h2) - fn(x0 - h2)) / (2.0 * h2)
    return (4.0 * d2 - d1) / 3.0


def derivative_step(theta0, omega_scale=1.0):
    return 1e-6 * max(abs(theta0), omega_scale)


def fisher_from_kernel(K, dK, pi):
    """sum_lm dK[m,l]^2 / K[m,l] * pi[l], with the 0/0 guard."""
    K = np.asarray(K, dtype=float)
    dK = np.asarray(dK, dtype=float)
    total = 0.0
    for l in range(K.shape[1]):
        for m in range(K.shape[0]):
            k, dk = K[m, l], dK[m, l]
            if k < KERNEL_FLOOR:
                if abs(dk) < DERIV_FLOOR:
                    continue
                raise DivergentInformationError(
                    f"P({m}|{l}) = {k:.3g} vanishes while its derivative is {dk:.3g}", (m, l))
            total += dk * dk / k * pi[l]
    return max(total, 0.0)


def fisher_general(model_family, theta0, basis=None, tau=1.0, h=None, omega_scale=1.0):
    """Fisher information per measurement for a parameterized model family.

    ``model_family`` maps a parameter value to a LindbladModel.  The parameter
    derivative of the kernel uses a central difference with step
    ``h = 1e-6 * max(|theta0|, omega_scale)`` and one Richardson refinement.
    Outcome weights come from the stationary distribution of the outcome chain.
    """
    if tau <= 0:
        raise InvalidParameterError("tau must be positive")
    basis = eigenbasis() if basis is None else basis
    h = derivative_step(theta0, omega_scale) if h is None else h
    kernel = transition_kernel(model_family(theta0), basis, tau)
    dK = derivative(lambda th: transition_kernel(model_family(th), basis, tau).matrix, theta0, h)
    pi = stationary_distribution(kernel)
    return fisher_from_kernel(kernel.matrix, dK, pi)


def fisher_binary(p, dp):
    """Binomial Fisher information per measurement, dp^2 / (p (1 - p))."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"probability out of range: {p!r}")
    if p in (0.0, 1.0):
        if dp == 0:
            return 0.0
        raise DivergentInformationError(f"p = {p} with non-zero derivative {dp!r}")
    return dp * dp / (p * (1.0 - p))


def rabi_family(delta=0.0, gamma=0.0, gamma_spont=0.0):
    """Two-level model family parameterized by the Rabi frequency."""
    return lambda omega: two_level_model(omega, delta, gamma, gamma_spont)


# ---------------------------------------------------------------------------
# closed forms for the two-level atom

def _check_exclusive(delta, gamma):
    if delta != 0 and gamma != 0:
        raise UnsupportedClosedFormError(
            "no closed form with both detuning and dephasing; use propagate")
    if gamma < 0:
        raise InvalidParameterError("gamma must be non-negative")


def _damped_terms(omega, gamma, tau):
    """cos(w tau) and sin(w tau)/w with w = sqrt(omega^2 - gamma^2), continued
    to cosh/sinh when gamma > omega."""
    u = (omega - gamma) * (omega + gamma)
    if u > 0:
        w = math.sqrt(u)
        return math.cos(w * tau), math.sin(w * tau) / w
    if u < 0:
        k = math.sqrt(-u)
        return math.cosh(k * tau), math.sinh(k * tau) / k
    return 1.0, tau


def analytic_pgg(omega, delta, gamma, tau):
    """Probability to find |g> again a time tau after a projection onto |g>."""
    _check_exclusive(delta, gamma)
    if omega < 0 or tau < 0:
        raise InvalidParameterError("omega and tau must be non-negative")
    if gamma == 0:
        chi2 = omega * omega + delta * delta
        if chi2 == 0:
            return 1.0
        chi = math.sqrt(chi2)
        # 1 - P = omega^2 sin^2(chi tau / 2) / chi^2, written to avoid cancellation
        s = math.sin(0.5 * chi * tau)
        return 1.0 - omega * omega * s * s / chi2
    decay = math.exp(-gamma * tau)
    if omega > 0 and abs(omega - gamma) / omega < CRITICAL_PGG_TOL:
        return 0.5 + 0.5 * decay * (omega * tau + 1.0)
    c, s_over_w = _damped_terms(omega, gamma, tau)
    return 0.5 + 0.5 * decay * (gamma * s_over_w + c)


def _series_terms(u, tau, nterms=60):
    """C(u) = cos(sqrt(u) tau), S(u) = sin(sqrt(u) tau)/sqrt(u) and their
    u-derivatives as power series in u (both are entire in u)."""
    x = -tau * tau
    q = x / 2.0          # k-th term of C is q_k u^k, stored as q_k u^(k-1)
    r = tau * x / 6.0
    C, S, dC, dS = 1.0, tau, 0.0, 0.0
    for k in range(1, nterms):
        C += u * q
        S += u * r
        dC += k * q
        dS += k * r
        q *= x * u / ((2 * k + 1) * (2 * k + 2))
        r *= x * u / ((2 * k + 2) * (2 * k + 3))
    return C, S, dC, dS


def _critical_fisher(omega, gamma, tau):
    """F/N near omega = gamma from the entire-function form of P(g|g)."""
    u = (omega - gamma) * (omega + gamma)
    C, S, dC, dS = _series_terms(u, tau)
    decay = math.exp(-gamma * tau)
    p = 0.5 + 0.5 * decay * (gamma * S + C)
    dp = 0.5 * decay * (gamma * dS + dC) * 2.0 * omega
    return fisher_binary(p, dp)


def analytic_fisher(omega, delta, gamma, tau):
    """Closed-form Fisher information per measurement for the Rabi frequency."""
    _check_exclusive(delta, gamma)
    if omega < 0 or tau < 0:
        raise InvalidParameterError("omega and tau must be non-negative")
    if tau == 0:
        return 0.0
    if gamma == 0:
        if delta == 0:
            return tau * tau
        chi2 = omega * omega + delta * delta
        chi = math.sqrt(chi2)
        half = 0.5 * chi * tau
        num = omega * omega * chi * tau * math.cos(half) + 2.0 * delta * delta * math.sin(half)
        den = chi2 * chi2 * (delta * delta + omega * omega * math.cos(half) ** 2)
        return num * num / den
    if omega == 0:
        return 0.0
    if abs(omega - gamma) / omega < CRITICAL_FISHER_TOL:
        return _critical_fisher(omega, gamma, tau)
    w = complex((omega - gamma) * (omega + gamma)) ** 0.5
    wt = w * tau
    g = gamma
    num = -2.0 * omega ** 2 * (g * w * tau * np.cos(wt) - (g + w * w * tau) * np.sin(wt)) ** 2
    den = w ** 4 * (omega ** 2 - 2.0 * w * w * math.exp(2.0 * g * tau)
                    + (w * w - g * g) * np.cos(2.0 * wt) + 2.0 * g * w * np.sin(2.0 * wt))
    return max(float((num / den).real), 0.0)


def strong_drive_fisher_rate(omega, gamma, tau):
    """Fisher information per unit time in the omega >> gamma approximation."""
    if omega <= gamma:
        raise InvalidParameterError("strong-drive form needs omega > gamma")
    if tau <= 0:
        raise InvalidParameterError("tau must be positive")
    w = math.sqrt((omega - gamma) * (omega + gamma))
    e = math.exp(-2.0 * gamma * tau)
    s2 = math.sin(w * tau) ** 2
    return tau * e * s2 / (1.0 - e * (1.0 - s2))


def survival_probability(omega, delta, gamma, tau, gamma_spont=0.0):
    """P(g|g) from the closed form when one exists, else by propagation."""
    if gamma_spont == 0 and (delta == 0 or gamma == 0):
        return analytic_pgg(omega, delta, gamma, tau)
    model = two_level_model(omega, delta, gamma, gamma_spont)
    return propagate(model, pure_state(0), tau)[0, 0].real


def fisher_per_measurement(omega, delta, gamma, tau, gamma_spont=0.0):
    """Best available F/N: closed form if it exists, numeric otherwise."""
    if gamma_spont == 0 and (delta == 0 or gamma == 0):
        return analytic_fisher(omega, delta, gamma, tau)
    return fisher_general(rabi_family(delta, gamma, gamma_spont), omega, tau=tau)


# ---------------------------------------------------------------------------
# short-interval expansion

@dataclass(frozen=True)
class ZenoCoefficients:
    """Survival probability P0(tau) ~ 1 + a tau + b tau^2 for a pure initial state."""

    a: float
    b: float

    def zeno_rate(self, tau):
        """Inverse Zeno time, -tau * b."""
        return -tau * self.b


def zeno_coefficients(model, rho0):
    rho0 = check_density(rho0)
    if purity(rho0) < 1.0 - 1e-10:
        raise InvalidParameterError("zeno coefficients need a pure initial state")
    L = build_liouvillian(model)
    first = apply_liouvillian(model, rho0, L)
    second = apply_liouvillian(model, first, L)
    a = float(np.trace(rho0 @ first).real)
    b = 0.5 * float(np.trace(rho0 @ second).real)
    if model.is_closed:
        H = model.hamiltonian
        var = np.trace(rho0 @ H @ H).real - np.trace(rho0 @ H).real ** 2
        if abs(-b - var) > 1e-10 * max(1.0, abs(var)):
            raise ArithmeticError(f"closed-system check failed: -b = {-b!r}, Var(H) = {var!r}")
    return ZenoCoefficients(a, b)


def short_tau_fisher(coeffs, dcoeffs, tau):
    """Small-tau Fisher information per measurement.

    ``dcoeffs`` is the pair (da/dtheta, db/dtheta).  The denominator is taken
    in absolute value; for decaying survival a tau + (a^2 + b) tau^2 is negative.
    """
    a, b = coeffs.a, coeffs.b
    da, db = dcoeffs
    if tau <= 0:
        raise InvalidParameterError("tau must be positive")
    if abs(a) * tau + abs(b) * tau * tau >= 0.1:
        raise OutOfRegimeError(f"tau = {tau!r} is too long for the short-interval expansion")
    num = da * da * tau ** 2 + 2.0 * da * db * tau ** 3 + db * db * tau ** 4
    if num == 0:
        return 0.0
    return num / abs(a * tau + (a * a + b) * tau * tau)


# ---------------------------------------------------------------------------
# optimal interval

def golden_section_max(fn, lo, hi, rtol=1e-6):
    """Maximize a unimodal function on [lo, hi]; returns (x, fn(x))."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > rtol * max(abs(a), abs(b), 1e-300):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def _tau_grid(tau_range, grid_points):
    lo, hi = map(float, tau_range)
    if not (0 <= lo < hi) or grid_points < 2:
        raise InvalidParameterError(f"bad tau range {tau_range!r}")
    if lo == 0:
        return hi * np.arange(1, grid_points + 1) / grid_points
    return np.linspace(lo, hi, grid_points)


def maximize_rate(rate, tau_range, grid_points=2000, rtol=1e-6):
    """Global grid maximum of ``rate`` refined by golden section.

    Ties go to the smaller tau.  Returns (tau*, rate(tau*), grid, values).
    """
    grid = _tau_grid(tau_range, grid_points)
    values = np.array([rate(t) for t in grid])
    if not np.any(values > 0):
        raise InvalidParameterError("Fisher information vanishes on the whole tau grid")
    i = int(np.argmax(values))
    lo = grid[i - 1] if i > 0 else grid[0]
    hi = grid[i + 1] if i + 1 < len(grid) else grid[-1]
    best_t, best_v = grid[i], values[i]
    if hi > lo:
        t, v = golden_section_max(rate, lo, hi, rtol)
        if v > best_v:
            best_t, best_v = t, v
    return float(best_t), float(best_v), grid, values


def fisher_rate(omega, delta, gamma, gamma_spont=0.0):
    return lambda tau: fisher_per_measurement(omega, delta, gamma, tau, gamma_spont) / tau


def optimal_tau(omega, delta, gamma, tau_range, grid_points=2000, gamma_spont=0.0):
    """Interval maximizing the Fisher information per unit time."""
    if grid_points < 100:
        raise InvalidParameterError("grid_points must be at least 100")
    t, v, _, _ = maximize_rate(fisher_rate(omega, delta, gamma, gamma_spont), tau_range, grid_points)
    return t, v


def local_maxima(values):
    """Indices of strict-left / weak-right interior local maxima."""
    v = np.asarray(values)
    return [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] >= v[i + 1]]


@dataclass
class FisherScan:
    tau_grid: np.ndarray
    per_measurement: np.ndarray
    per_time: np.ndarray
    optimal_tau: float
    optimal_value: float


def fisher_scan(omega, delta, gamma, tau_grid, gamma_spont=0.0):
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid <= 0):
        raise InvalidParameterError("tau grid must be positive")
    per_n = np.array([fisher_per_measurement(omega, delta, gamma, t, gamma_spont) for t in tau_grid])
    per_t = per_n / tau_grid
    rate = fisher_rate(omega, delta, gamma, gamma_spont)
    i = int(np.argmax(per_t))
    best_t, best_v = tau_grid[i], per_t[i]
    if len(tau_grid) > 2:
        lo, hi = tau_grid[max(i - 1, 0)], tau_grid[min(i + 1, len(tau_grid) - 1)]
        t, v = golden_section_max(rate, lo, hi)
        if v > best_v:
            best_t, best_v = t, v
    return FisherScan(tau_grid, per_n, per_t, float(best_t), float(best_v))


def sensitivity_profile(omega1, omega2, delta, gamma, t_grid):
    """Squared difference quotient between two Rabi frequencies and the
    squared derivative of P(g|g) at omega1, on ``t_grid``."""
    t_grid = np.asarray(t_grid, dtype=float)
    if omega1 == omega2:
        raise InvalidParameterError("difference quotient needs omega1 != omega2")
    h = derivative_step(omega1)
    diff = np.empty_like(t_grid)
    dif = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        p1 = survival_probability(omega1, delta, gamma, t)
        p2 = survival_probability(omega2, delta, gamma, t)
        diff[i] = ((p2 - p1) / (omega2 - omega1)) ** 2
        dif[i] = derivative(lambda w: survival_probability(w, delta, gamma, t), omega1, h) ** 2
    return diff, dif
