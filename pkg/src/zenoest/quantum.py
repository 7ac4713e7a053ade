"""Lindblad models, superoperators and exact propagation of density matrices.

Conventions used throughout the package:

* hbar = 1, all rates and frequencies are angular and measured in units of a
  reference Rabi frequency.
* Two-level basis order is fixed: index 0 is |g>, index 1 is |e>.
* Vectorization stacks columns, so ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, InvalidParameterError, PropagationError
from .linalg import expm

HERMITIAN_TOL = 1e-12
TRACE_DRIFT_TOL = 1e-9

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
# lowers |e> (index 1) to |g> (index 0)
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def _as_square(mat, name="matrix"):
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} has non-finite entries")
    return arr


def vec(rho):
    """Column-stack a matrix into a vector."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim):
    return np.asarray(v).reshape((dim, dim), order="F")


def pure_state(index, dim=2):
    """Density matrix |index><index| in the computational basis."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def check_density(rho, atol=HERMITIAN_TOL):
    """Validate a density matrix and return it as a complex array.

    Hermiticity and unit trace are checked to ``atol`` (scaled by the matrix
    norm), positivity to -1e-10.
    """
    rho = _as_square(rho, "density matrix")
    scale = max(1.0, np.abs(rho).max())
    if np.abs(rho - rho.conj().T).max() > atol * scale:
        raise InvalidParameterError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol * scale:
        raise InvalidParameterError(f"density matrix has trace {np.trace(rho).real!r}")
    if np.linalg.eigvalsh(rho).min() < -1e-10:
        raise InvalidParameterError("density matrix has negative eigenvalues")
    return rho


def purity(rho):
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus collapse operators (each already scaled by sqrt(rate))."""

    hamiltonian: np.ndarray
    collapse_ops: tuple = ()
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        H = _as_square(self.hamiltonian, "hamiltonian")
        if np.abs(H - H.conj().T).max() > HERMITIAN_TOL * max(1.0, np.abs(H).max()):
            raise InvalidParameterError("hamiltonian is not Hermitian")
        ops = tuple(_as_square(c, "collapse operator") for c in self.collapse_ops)
        for c in ops:
            if c.shape != H.shape:
                raise DimensionError(
                    f"collapse operator shape {c.shape} does not match hamiltonian {H.shape}")
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "collapse_ops", ops)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    @property
    def is_closed(self):
        return len(self.collapse_ops) == 0


def two_level_model(omega, delta=0.0, gamma=0.0, gamma_spont=0.0):
    """Driven two-level atom in the frame rotating with the drive.

    H = -delta |e><e| + (omega/2)(|e><g| + |g><e|), with dephasing
    sqrt(gamma) sigma_z and spontaneous decay sqrt(gamma_spont) sigma_-.
    """
    for name, value in (("omega", omega), ("gamma", gamma), ("gamma_spont", gamma_spont)):
        if not np.isfinite(value) or value < 0:
            raise InvalidParameterError(f"{name} must be a finite non-negative number, got {value!r}")
    if not np.isfinite(delta):
        raise InvalidParameterError(f"delta must be finite, got {delta!r}")

    H = np.array([[0.0, omega / 2.0], [omega / 2.0, -delta]], dtype=complex)
    ops = []
    if gamma > 0:
        ops.append(np.sqrt(gamma) * SIGMA_Z)
    if gamma_spont > 0:
        ops.append(np.sqrt(gamma_spont) * SIGMA_MINUS)
    params = dict(omega=float(omega), delta=float(delta), gamma=float(gamma),
                  gamma_spont=float(gamma_spont))
    return LindbladModel(H, tuple(ops), params)


def build_liouvillian(model):
    """Superoperator of the Lindblad generator acting on column-stacked rho."""
    H = model.hamiltonian
    d = H.shape[0]
    ident = np.eye(d, dtype=complex)
    L = -1j * (np.kron(ident, H) - np.kron(H.T, ident))
    for c in model.collapse_ops:
        if c.shape != H.shape:
            raise DimensionError("collapse operator and hamiltonian dimensions differ")
        cdc = c.conj().T @ c
        L += np.kron(c.conj(), c)
        L -= 0.5 * (np.kron(ident, cdc) + np.kron(cdc.T, ident))
    return L


def apply_liouvillian(model, rho, liouvillian=None):
    """Time derivative L[rho] as a matrix."""
    L = build_liouvillian(model) if liouvillian is None else liouvillian
    rho = np.asarray(rho, dtype=complex)
    return unvec(L @ vec(rho), rho.shape[0])


def propagator(model, t):
    """exp(L t) as a dim^2 x dim^2 matrix."""
    if not np.isfinite(t) or t < 0:
        raise InvalidParameterError(f"propagation time must be finite and >= 0, got {t!r}")
    L = build_liouvillian(model)
    if t == 0:
        return np.eye(L.shape[0], dtype=complex)
    return expm(L * t)


def _finish(rho_vec, dim):
    rho = unvec(rho_vec, dim)
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) >= TRACE_DRIFT_TOL:
        raise PropagationError(f"trace drifted to {tr!r} during propagation")
    return rho / tr


def apply_propagator(prop, rho):
    """Apply a precomputed exp(L t) to rho, Hermitize and renormalize the trace."""
    rho = np.asarray(rho, dtype=complex)
    return _finish(prop @ vec(rho), rho.shape[0])


def propagate(model, rho, t):
    """Evolve rho for a duration t under the model's master equation."""
    rho = check_density(rho, atol=1e-9)
    if rho.shape != model.hamiltonian.shape:
        raise DimensionError(f"state shape {rho.shape} does not match model dim {model.dim}")
    if t == 0:
        return rho.copy()
    return apply_propagator(propagator(model, t), rho)
