"""Dense matrix exponential by scaling and squaring with Pade approximants.

Follows Higham (2005): pick the lowest Pade degree m in {3, 5, 7, 9, 13}
whose 1-norm threshold covers the matrix; otherwise scale by 2**-s so the
degree-13 approximant applies, then square s times.  The thresholds bound
the backward error by the unit roundoff, well inside a 1e-13 target.
"""

import numpy as np

from .errors import PropagationError

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}

_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_uv(A, m):
    b = _PADE_COEFFS[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    if m < 13:
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        u = sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
        v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
        return A @ u, v
    A4 = A2 @ A2
    A6 = A4 @ A2
    u = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    v = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return u, v


def expm(A):
    """Return exp(A) for a square (complex or real) matrix."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise PropagationError("matrix exponential of a non-finite matrix")
    A = A.astype(np.result_type(A.dtype, np.float64))
    if A.shape[0] == 0:
        return A.copy()

    norm = np.linalg.norm(A, 1)
    s = 0
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            break
    else:
        m = 13
        if norm > _THETA[13]:
            s = max(0, int(np.ceil(np.log2(norm / _THETA[13]))))
            A = A / (2.0 ** s)

    u, v = _pade_uv(A, m)
    try:
        E = np.linalg.solve(v - u, v + u)
    except np.linalg.LinAlgError as exc:
        raise PropagationError(f"Pade denominator singular: {exc}") from exc
    for _ in range(s):
        E = E @ E
    if not np.all(np.isfinite(E)):
        raise PropagationError("matrix exponential overflowed")
    return E
