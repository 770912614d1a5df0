"""Truncated single-mode Fock space with the parity (M) metric.

The scalar mode is represented on ``|0>, ..., |n_max>`` with the ordinary
annihilation matrix ``a``.  Its indefinite-metric partner is the M-adjoint
``a^T = M a^dagger M = -a^dagger`` where ``M = (-1)^{a^dagger a}``, so that
``[a, a^T] = -1`` away from the truncation edge.

Sign conventions
----------------
``EIGENVALUE_SIGN`` and ``DISPLACEMENT_SIGN`` fix the two choices the
adjoint-action identities depend on:

* M-coherent states satisfy ``a |lam> = EIGENVALUE_SIGN * lam |lam>``;
* ``D(eta) = exp(DISPLACEMENT_SIGN * (eta a^T - a eta^*))``.

With ``+1`` and ``-1`` respectively, ``D(eta) = exp(eta a^dagger + eta^* a)``
and

* ``D^T a D = a + eta``,
* ``D^T a^T D = a^T + eta^*``,
* ``D^T a^T a D = a^T a + eta^* a + eta a^T + |eta|^2``,
* ``D(eta) |0> = |eta>``.

The test suite checks every one of these against the matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, TruncationError
from .expm import matrix_exp

EIGENVALUE_SIGN = +1
DISPLACEMENT_SIGN = -1

#: Operator identities are only trusted this many levels below the edge.
INTERIOR_MARGIN = 4


def _frozen(arr):
    arr.setflags(write=False)
    return arr


def parity_diagonal(dim: int) -> np.ndarray:
    return (-1.0) ** np.arange(dim)


def adequate_amplitude(amplitude, n_max: int) -> bool:
    """Admission rule ``|amplitude|^2 <= n_max / 4``."""
    return abs(amplitude) ** 2 <= n_max / 4.0


class FockSpace:
    """Truncated single-mode space; immutable and safe to share.

    Attributes
    ----------
    n_max : int
        Highest retained number state.
    a, a_dag, a_T : ndarray
        Annihilation, standard adjoint and M-adjoint (``-a_dag``).
    m_diag : ndarray
        Diagonal of the metric ``M``, entries ``(-1)**n``.
    """

    def __init__(self, n_max: int):
        n_max = int(n_max)
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max}")
        self.n_max = n_max
        dim = n_max + 1
        a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
        self.a = _frozen(a)
        self.a_dag = _frozen(a.conj().T.copy())
        self.m_diag = _frozen(parity_diagonal(dim))
        self.a_T = _frozen(m_adjoint(a))

    def __repr__(self):
        return f"FockSpace(n_max={self.n_max})"

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @cached_property
    def m_matrix(self) -> np.ndarray:
        return _frozen(np.diag(self.m_diag))

    @cached_property
    def identity(self) -> np.ndarray:
        return _frozen(np.eye(self.dim, dtype=complex))

    @cached_property
    def number(self) -> np.ndarray:
        """``a^T a``; equals ``-a^dagger a`` as a matrix."""
        return _frozen(self.a_T @ self.a)

    def basis(self, n: int) -> "MState":
        if not 0 <= n <= self.n_max:
            raise DomainError(f"number state |{n}> outside truncation n_max={self.n_max}")
        c = np.zeros(self.dim, dtype=complex)
        c[n] = 1.0
        return MState(c, signature=1 if n % 2 == 0 else -1)

    def vacuum(self) -> "MState":
        return self.basis(0)

    def interior(self, op, margin: int = INTERIOR_MARGIN):
        """Block of ``op`` on ``|0>..|n_max - margin>``."""
        keep = max(self.dim - margin, 1)
        op = np.asarray(op)
        return op[:keep, :keep] if op.ndim == 2 else op[:keep]


@dataclass(frozen=True)
class MState:
    """Fock-basis amplitudes plus the sign of their M-norm."""

    coefficients: np.ndarray
    signature: int = 1

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1:
            raise DomainError("MState coefficients must be a vector")
        if not np.all(np.isfinite(c)):
            raise DomainError("MState coefficients must be finite")
        if self.signature not in (1, -1):
            raise DomainError("signature must be +1 or -1")
        object.__setattr__(self, "coefficients", _frozen(c.copy()))

    @property
    def dim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def standard_norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    @property
    def m_norm(self) -> float:
        """``<<psi|psi>>``, real and possibly negative."""
        return m_inner(self, self).real

    def is_m_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.m_norm - self.signature) <= tol


def _vector(state):
    return state.coefficients if isinstance(state, MState) else np.asarray(state, dtype=complex)


def m_inner(lhs, rhs, metric=None) -> complex:
    """``<<lhs|rhs>> = <lhs| M |rhs>``.

    ``metric`` is the diagonal of ``M``; single-mode parity by default.  Pass
    the Kronecker product of parities for tensor-product spaces.
    """
    u, v = _vector(lhs), _vector(rhs)
    if u.shape != v.shape:
        raise DomainError(f"dimension mismatch: {u.shape} vs {v.shape}")
    m = parity_diagonal(u.shape[0]) if metric is None else np.asarray(metric)
    return complex(np.vdot(u, m * v))


def m_adjoint(op, metric=None) -> np.ndarray:
    """``M op^dagger M``."""
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise DomainError(f"m_adjoint needs a square matrix, got shape {op.shape}")
    m = parity_diagonal(op.shape[0]) if metric is None else np.asarray(metric)
    if m.shape[0] != op.shape[0]:
        raise DomainError(f"metric of size {m.shape[0]} does not match operator {op.shape}")
    return m[:, None] * op.conj().T * m[None, :]


def commutator_check(rep: FockSpace, margin: int = 1) -> float:
    """Max entrywise deviation of ``[a, a^T] + 1`` on the top-trimmed block.

    ``margin=1`` drops only the edge state ``|n_max>``; ``margin=0`` keeps the
    full matrix, where the corner deviates by ``n_max + 1``.
    """
    comm = rep.a @ rep.a_T - rep.a_T @ rep.a + rep.identity
    keep = rep.dim - margin
    return float(np.max(np.abs(comm[:keep, :keep])))


def coherent_coefficients(lam: complex, dim: int) -> np.ndarray:
    """``lam^n / sqrt(n!)`` for ``n < dim`` by stable recurrence."""
    c = np.empty(dim, dtype=complex)
    c[0] = 1.0
    for n in range(1, dim):
        c[n] = c[n - 1] * lam / np.sqrt(n)
    return c


def m_coherent(lam: complex, rep: FockSpace, tol: float = 1e-10) -> MState:
    """M-normalized eigenstate of ``a`` with eigenvalue ``EIGENVALUE_SIGN * lam``.

    The M-norm of ``sum lam^n/sqrt(n!) |n>`` is ``exp(-|lam|^2)``, so the
    standard norm of the M-normalized state is ``exp(|lam|^2)``.

    Raises
    ------
    TruncationError
        If ``||(a - lam) psi|| / ||psi||`` exceeds ``tol``.
    """
    lam = complex(lam) * EIGENVALUE_SIGN
    c = coherent_coefficients(lam, rep.dim)
    mnorm = np.sum(rep.m_diag * np.abs(c) ** 2)
    if not mnorm > 0:
        raise TruncationError(f"truncated M-norm of |{lam}> is not positive", residual=np.inf)
    c = c / np.sqrt(mnorm)
    residual = coherent_residual(c, lam, rep)
    if residual > tol:
        raise TruncationError(
            f"n_max={rep.n_max} too small for amplitude {lam:.4g}: eigen-residual {residual:.3g} > {tol:.1g}",
            residual=residual,
        )
    return MState(c, signature=1)


def coherent_residual(coefficients, lam: complex, rep: FockSpace) -> float:
    c = _vector(coefficients)
    return float(np.linalg.norm(rep.a @ c - lam * c) / np.linalg.norm(c))


def displacement_generator(eta: complex, rep: FockSpace) -> np.ndarray:
    eta = complex(eta)
    return DISPLACEMENT_SIGN * (eta * rep.a_T - np.conj(eta) * rep.a)


def displacement(eta: complex, rep: FockSpace, check: bool = True) -> np.ndarray:
    """M-unitary displacement ``D(eta)`` with ``D^T a D = a + eta``.

    Raises
    ------
    TruncationError
        If ``check`` and ``|eta|^2 > n_max / 4``.
    """
    if check and not adequate_amplitude(eta, rep.n_max):
        raise TruncationError(
            f"|eta|^2 = {abs(eta) ** 2:.4g} exceeds n_max/4 = {rep.n_max / 4:.4g}",
            residual=abs(eta) ** 2 - rep.n_max / 4.0,
        )
    return matrix_exp(displacement_generator(eta, rep))


def resolved_levels(make_op, rep: FockSpace, leak_tol: float = 1e-10,
                    margin: int = INTERIOR_MARGIN) -> int:
    """Count the low levels ``|0>..|k-1>`` that ``rep`` resolves for an operator.

    ``make_op(space)`` must build the operator on any :class:`FockSpace`.  It
    is rebuilt on a space of roughly twice the size; level ``j`` counts as
    resolved when the column ``op|j>`` keeps all but ``leak_tol`` of its norm
    below ``n_max``.  Operators with a Hermitian exponent, like ``D(eta)``,
    spread number states over many levels, so the resolved block can be far
    smaller than ``n_max - margin``.  Never exceeds ``dim - margin``.
    """
    big = FockSpace(2 * rep.n_max + 8)
    op = np.asarray(make_op(big))
    k = 0
    for j in range(max(rep.dim - margin, 1)):
        col = op[:, j]
        leak = np.linalg.norm(col[rep.dim:]) / np.linalg.norm(col)
        if leak > leak_tol:
            break
        k = j + 1
    return k


def interior_block(op, k: int) -> np.ndarray:
    return np.asarray(op)[:k, :k]
