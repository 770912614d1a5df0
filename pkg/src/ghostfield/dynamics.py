"""Single scalar mode coupled to static sharp sources.

For one mode of frequency ``w`` and source amplitude ``eta`` the Hamiltonian
on the truncated space is::

    h = hbar w (-a^T a + a eta^* + eta a^T)        (a^T = -a^dagger)

It is M-self-adjoint, and ``D(eta)`` from :mod:`ghostfield.fock` brings it to
``hbar w (-a^T a + |eta|^2)``.  The physical (constrained) state is the
M-coherent state ``|eta>``, which therefore only picks up the phase
``w |eta|^2 t``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, TruncationError
from .expm import matrix_exp
from .fock import (
    FockSpace,
    MState,
    adequate_amplitude,
    coherent_residual,
    displacement,
    m_adjoint,
    m_coherent,
    m_inner,
    resolved_levels,
)
from .units import NATURAL, UnitSystem, mode_frequency

#: Maximum tolerated deviation of the evolution-overlap modulus from 1.
MODULUS_TOL = 1e-6


@dataclass(frozen=True)
class ModeHamiltonian:
    k_magnitude: float
    eta: complex
    rep: FockSpace
    h_matrix: np.ndarray
    units: UnitSystem = NATURAL

    @property
    def omega(self) -> float:
        return mode_frequency(self.k_magnitude, self.units)


@dataclass(frozen=True)
class ConstrainedState:
    """Sharp charge branch ``charge_label`` times the matching M-coherent field state."""

    charge_label: tuple
    photon_state: MState
    eigenvalue: complex


class ModePhase(NamedTuple):
    phase: float
    modulus: float


class HeisenbergOperators(NamedTuple):
    annihilation: np.ndarray
    number: np.ndarray


def hamiltonian_matrix(omega: float, eta: complex, rep: FockSpace, hbar: float = 1.0) -> np.ndarray:
    eta = complex(eta)
    return hbar * omega * (-rep.number + np.conj(eta) * rep.a + eta * rep.a_T)


def build_mode_hamiltonian(k_magnitude: float, eta: complex, rep: FockSpace,
                           units: UnitSystem = NATURAL) -> ModeHamiltonian:
    """Scalar-mode Hamiltonian ``hbar w (H_f + H_I)`` for source amplitude ``eta``.

    Raises
    ------
    TruncationError
        If ``|eta|^2 > n_max / 4``.
    """
    omega = mode_frequency(k_magnitude, units)
    if not adequate_amplitude(eta, rep.n_max):
        raise TruncationError(
            f"|eta|^2 = {abs(eta) ** 2:.4g} exceeds n_max/4 = {rep.n_max / 4:.4g}",
            residual=abs(eta) ** 2 - rep.n_max / 4.0,
        )
    h = hamiltonian_matrix(omega, eta, rep, units.hbar)
    h.setflags(write=False)
    return ModeHamiltonian(float(k_magnitude), complex(eta), rep, h, units)


def diagonal_hamiltonian_matrix(mode: ModeHamiltonian) -> np.ndarray:
    """Expected diagonal form ``hbar w (-a^T a + |eta|^2)``."""
    rep = mode.rep
    return mode.units.hbar * mode.omega * (-rep.number + abs(mode.eta) ** 2 * rep.identity)


def diagonalized_hamiltonian(mode: ModeHamiltonian) -> np.ndarray:
    """``D^T h D`` computed from the matrices, for comparison with the diagonal form."""
    D = displacement(mode.eta, mode.rep)
    return m_adjoint(D) @ mode.h_matrix @ D


def constrained_state(eta: complex, rep: FockSpace, label=(0, 0), tol: float = 1e-8) -> ConstrainedState:
    """Field state obeying ``(a - eta)|psi> = 0`` for the charge branch ``label``."""
    state = m_coherent(eta, rep, tol=min(tol, 1e-10))
    residual = coherent_residual(state, complex(eta), rep)
    if residual > tol:
        raise TruncationError(f"supplementary-condition residual {residual:.3g} > {tol:.1g}", residual)
    return ConstrainedState(tuple(label), state, complex(eta))


def evolution_operator(mode: ModeHamiltonian, time: float) -> np.ndarray:
    return matrix_exp(mode.h_matrix, -1j * time / mode.units.hbar)


def closed_form_mode_phase(k_magnitude: float, eta: complex, time: float,
                           units: UnitSystem = NATURAL) -> float:
    """Phase ``w |eta|^2 t`` of one constrained mode (the diagonal-form ground energy times t/hbar)."""
    if time < 0:
        raise DomainError("time must be >= 0")
    omega = mode_frequency(k_magnitude, units)
    return float(omega * abs(eta) ** 2 * time)


def brute_force_mode_phase(mode: ModeHamiltonian, state: ConstrainedState, time: float) -> ModePhase:
    """Phase of ``<<psi| exp(-i h t) |psi>>`` by direct matrix exponentiation.

    Returns the phase in ``[0, 2 pi)`` and the overlap modulus.

    Raises
    ------
    TruncationError
        If the modulus differs from 1 by more than ``MODULUS_TOL``; the
        constrained state is then not a stationary ray of the truncated ``h``.
    """
    if time < 0:
        raise DomainError("time must be >= 0")
    psi = state.photon_state
    U = evolution_operator(mode, time)
    overlap = m_inner(psi, U @ psi.coefficients) / psi.m_norm
    modulus = abs(overlap)
    if abs(modulus - 1.0) > MODULUS_TOL:
        raise TruncationError(f"evolution overlap modulus {modulus:.9f} is not 1", residual=abs(modulus - 1.0))
    return ModePhase(float(np.mod(-np.angle(overlap), 2.0 * np.pi)), float(modulus))


def heisenberg_mode_operators(mode: ModeHamiltonian, time: float) -> HeisenbergOperators:
    """``a(t) = U^T a U`` and ``(a^T a)(t) = U^T a^T a U`` with ``U = exp(-i h t)``."""
    U = evolution_operator(mode, time)
    UT = m_adjoint(U)
    rep = mode.rep
    return HeisenbergOperators(UT @ rep.a @ U, UT @ rep.number @ U)


def closed_form_annihilation(mode: ModeHamiltonian, time: float) -> np.ndarray:
    """``eta + exp(-i w t) (a - eta)``, the solution of ``da/dt = i[h, a]``.

    The fluctuation ``a(t) - eta = exp(-i w t)(a - eta)`` is the evolved
    constraint operator; it annihilates every constrained state at all times.
    """
    rep = mode.rep
    eta = mode.eta
    return eta * rep.identity + np.exp(-1j * mode.omega * time) * (rep.a - eta * rep.identity)


def constraint_operator(mode: ModeHamiltonian, time: float) -> np.ndarray:
    """Heisenberg-evolved ``a - eta`` computed from ``U``."""
    U = evolution_operator(mode, time)
    rep = mode.rep
    return m_adjoint(U) @ (rep.a - mode.eta * rep.identity) @ U


def heisenberg_expectation(op, U, state: MState) -> complex:
    """``<<psi| U^T op U |psi>> / <<psi|psi>>`` applied right to left.

    Multiplying ``U^T op U`` out first is numerically hopeless: the truncated
    ``h`` has spurious complex eigenvalues near the edge, so ``||U||`` can
    reach 1e25 even though the physical block is fine.
    """
    psi = state.coefficients
    return m_inner(psi, m_adjoint(U) @ (op @ (U @ psi))) / state.m_norm


def ghost_null_expectations(mode: ModeHamiltonian, state: ConstrainedState, time: float):
    """Moduli of the quadrature and number expectations of the evolved constraint operator.

    With ``S(t) = U^T (a - eta) U`` this returns ``(|<<S + S^T>>|, |<<S^T S>>|)``
    in ``state``.  ``S^T S`` is evolved as the single operator
    ``U^T (a - eta)^T (a - eta) U`` (``U U^T = 1``).  Both numbers vanish for
    states obeying the supplementary condition.
    """
    rep = mode.rep
    U = evolution_operator(mode, time)
    X = rep.a - mode.eta * rep.identity
    psi = state.photon_state
    s = heisenberg_expectation(X, U, psi)
    # <<S^T>> = conj(<<S>>) for an M-adjoint pair.
    quad = s + np.conj(s)
    number = heisenberg_expectation(m_adjoint(X) @ X, U, psi)
    return abs(quad), abs(number)


def alpha_operator(coefficient: complex, rep: FockSpace) -> np.ndarray:
    """Per-mode charge-phase operator ``beta a^T + beta^* a`` (M-self-adjoint).

    For a charge at ``r`` coupled with ``g(k)`` the coefficient is
    ``beta = g exp(-i k.r) / hbar``.
    """
    beta = complex(coefficient)
    return beta * rep.a_T + np.conj(beta) * rep.a


def resolved_evolution_levels(k_magnitude: float, eta: complex, rep: FockSpace, time: float,
                              leak_tol: float = 1e-12, units: UnitSystem = NATURAL) -> int:
    """Number of low levels on which Heisenberg matrices built on ``rep`` can be trusted.

    Uses :func:`ghostfield.fock.resolved_levels` on ``U = exp(-i h t)``: entry
    ``(i, j)`` of ``U^T X U`` needs columns ``i`` and ``j`` of ``U`` resolved.
    """
    def make(space):
        mode = ModeHamiltonian(float(k_magnitude), complex(eta), space,
                               hamiltonian_matrix(mode_frequency(k_magnitude, units), eta, space, units.hbar), units)
        return evolution_operator(mode, time)

    return resolved_levels(make, rep, leak_tol=leak_tol)
