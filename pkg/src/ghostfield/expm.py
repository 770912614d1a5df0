"""Dense matrix exponential by Pade scaling and squaring.

The algorithm is the classic one of Higham (2005): pick the lowest Pade
degree whose backward-error bound ``theta_m`` covers ``||A||_1``; otherwise
scale ``A`` by ``2**-s`` so it fits the degree-13 bound, evaluate the
approximant and square ``s`` times.
"""
from __future__ import annotations

import numpy as np

from .errors import MatrixOverflowError

_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}

# Backward-error bounds for double precision.
_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}


def _pade_uv(A, m, ident):
    b = _PADE_COEFFS[m]
    A2 = A @ A
    if m == 13:
        A4 = A2 @ A2
        A6 = A4 @ A2
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
        return U, V
    powers = [ident, A2]
    while len(powers) < (m + 1) // 2:
        powers.append(powers[-1] @ A2)
    U = A @ sum(b[2 * j + 1] * P for j, P in enumerate(powers))
    V = sum(b[2 * j] * P for j, P in enumerate(powers))
    return U, V


def matrix_exp(op, scale=1.0):
    """Return ``exp(scale * op)`` for a dense square matrix.

    Parameters
    ----------
    op : (n, n) array_like
        Real or complex matrix with finite entries.
    scale : complex
        Scalar multiplier applied before exponentiation, e.g. ``-1j * t``.

    Raises
    ------
    ValueError
        For non-square or non-finite input.
    MatrixOverflowError
        If the result overflows.
    """
    A = np.asarray(op)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix_exp needs a square matrix, got shape {A.shape}")
    dtype = np.result_type(A.dtype, np.asarray(scale).dtype, np.float64)
    A = (scale * A).astype(dtype, copy=False)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix_exp input has non-finite entries")
    n = A.shape[0]
    ident = np.eye(n, dtype=dtype)
    if n == 0:
        return ident

    norm1 = np.linalg.norm(A, 1)
    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            break
    else:
        m = 13
        if norm1 > _THETA[13]:
            s = int(np.ceil(np.log2(norm1 / _THETA[13])))
            A = A / (2.0**s)

    U, V = _pade_uv(A, m, ident)
    with np.errstate(over="ignore", invalid="ignore"):
        E = np.linalg.solve(V - U, V + U)
        for _ in range(s):
            E = E @ E
    if not np.all(np.isfinite(E)):
        raise MatrixOverflowError(f"matrix exponential overflowed (||A||_1 = {norm1:.3g})")
    return E
