"""Branch phases, the Heisenberg-picture cross term, tomography and entanglement.

Charge ``A`` sits in a superposition of ``r_i`` and ``r_m`` while ``B`` is at
``r_j``.  Each sharp branch drags the field into its own M-coherent state,
and for each mode the branch state is a stationary ray of the branch
Hamiltonian.  The cross term of ``C_A(t) = U^T (b_i^T b_m + b_m^T b_i) U`` is
therefore

    2 <<psi_H| U^T b_i^T b_m U |psi_H>> = <<lam_ij| U_ij^T U_mj |lam_mj>>
                                        = exp(i (phi_ij - phi_mj)) <<lam_ij|lam_mj>>,

a product over modes.  It is evaluated mode by mode in the truncated Fock
space.  On each radial shell the three plane-wave profiles
``exp(-i k.r_l)`` span at most three directions; diagonalising their Gram
matrix ``4 pi sinc(k |r_l - r_l'|)`` gives real effective-mode amplitudes
that reproduce every inner product of the shell exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .dynamics import build_mode_hamiltonian, evolution_operator
from .errors import DomainError
from .expm import matrix_exp
from .fock import FockSpace, coherent_coefficients, m_adjoint, m_coherent, m_inner, parity_diagonal
from .quadrature import (
    QuadratureSpec,
    Tail,
    coulomb_phase,
    radial_density,
    radial_rule,
    sine_integral_tail,
)
from .units import Configuration, coupling_g, mode_frequency

#: Gram eigen-directions below this fraction of the largest are dropped.
GRAM_RANK_TOL = 1e-13
#: Density-matrix eigenvalues below this are treated as zero in the concurrence.
SPECTRUM_FLOOR = 1e-13


@dataclass(frozen=True)
class BranchPhaseMatrix:
    """``phases[a, b]``: Coulomb phase between branch ``a`` of A and branch ``b`` of B."""

    phases: np.ndarray
    est_errors: np.ndarray

    def __post_init__(self):
        p = np.array(self.phases, dtype=float, ndmin=2)
        e = np.array(self.est_errors, dtype=float, ndmin=2)
        if not np.all(np.isfinite(p)):
            raise DomainError("branch phases must be finite")
        p.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "phases", p)
        object.__setattr__(self, "est_errors", e)

    @property
    def shape(self):
        return self.phases.shape

    @property
    def delta(self) -> float:
        """``phi_00 + phi_11 - phi_01 - phi_10`` (needs a 2x2 matrix)."""
        if self.shape != (2, 2):
            raise DomainError(f"delta needs a 2x2 phase matrix, got {self.shape}")
        p = self.phases
        return float(p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0])

    def shifted(self, constant: float) -> "BranchPhaseMatrix":
        return BranchPhaseMatrix(self.phases + constant, self.est_errors)


@dataclass(frozen=True)
class ChargeObservableResult:
    """Normalised cross term of ``C_A(t)``.

    ``value`` is the cross term divided by its modulus at ``t = 0``, so
    ``value(0) = 1``.  ``extracted_phase`` is accumulated mode by mode and is
    not wrapped; ``arg(value)`` equals it modulo ``2 pi``.  ``field_overlap``
    is the raw ``|<<lam_ij|lam_mj>>|`` up to ``k_max``; in the indefinite
    metric it exceeds 1 and grows with the cutoff.
    """

    value: complex
    extracted_phase: float
    visibility: float
    field_overlap: float = 1.0
    tail_phase: float = 0.0
    n_modes: int = 0
    k_max: float = float("nan")


class EntanglementResult(NamedTuple):
    negativity: float
    concurrence: float


# ---------------------------------------------------------------------------
# Schroedinger picture


def branch_phase_matrix(config: Configuration, spec: Optional[QuadratureSpec] = None) -> BranchPhaseMatrix:
    spec = spec or QuadratureSpec()
    na, nb = len(config.positions_a), len(config.positions_b)
    phases = np.zeros((na, nb))
    errors = np.zeros((na, nb))
    for a, ra in enumerate(config.positions_a):
        for b, rb in enumerate(config.positions_b):
            res = coulomb_phase(config, ra, rb, spec)
            phases[a, b] = res.phase
            errors[a, b] = res.est_error
    return BranchPhaseMatrix(phases, errors)


def _require_superposed_a(config: Configuration):
    if len(config.positions_a) != 2 or len(config.positions_b) != 1:
        raise DomainError("need A superposed over two positions and B sharp")


def relative_phase(config: Configuration, spec: Optional[QuadratureSpec] = None) -> float:
    """``phi(r_i, r_j) - phi(r_m, r_j)``; the self-energy constants cancel."""
    _require_superposed_a(config)
    p = branch_phase_matrix(config, spec).phases
    return float(p[0, 0] - p[1, 0])


# ---------------------------------------------------------------------------
# Heisenberg picture


def shell_amplitudes(k: float, weight: float, points, config: Configuration):
    """Effective-mode amplitudes of one radial shell.

    ``points`` are ``(r_i, r_j, r_m)``.  Returns ``(eta_ij, eta_mj)``, real
    arrays over the retained Gram directions, with
    ``sum eta_ij * eta_mj = weight * integral dOmega conj(eta_ij(k)) eta_mj(k)``.
    """
    pts = np.asarray(points, dtype=float)
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    gram = 4.0 * np.pi * np.sinc(k * dist / np.pi)
    lam, vec = np.linalg.eigh(gram)
    keep = lam > GRAM_RANK_TOL * lam.max()
    factors = vec[:, keep] * np.sqrt(lam[keep])
    u = config.units
    scale = math.sqrt(weight) * coupling_g(k, config) / (u.hbar * mode_frequency(k, u))
    c_ij = np.array([1.0, 1.0, 0.0])
    c_mj = np.array([0.0, 1.0, 1.0])
    return scale * (factors.T @ c_ij), scale * (factors.T @ c_mj)


def mode_cross_factor(k: float, eta_ij: float, eta_mj: float, rep: FockSpace, time: float, units=None):
    """``(<<lam_ij| U_ij^T U_mj |lam_mj>>, <<lam_ij|lam_mj>>)`` for one mode.

    Evaluated right to left on vectors, see
    :func:`ghostfield.dynamics.heisenberg_expectation`.
    """
    kw = {} if units is None else {"units": units}
    mode_ij = build_mode_hamiltonian(k, eta_ij, rep, **kw)
    mode_mj = build_mode_hamiltonian(k, eta_mj, rep, **kw)
    psi_ij = m_coherent(eta_ij, rep)
    psi_mj = m_coherent(eta_mj, rep)
    U_ij = evolution_operator(mode_ij, time)
    U_mj = evolution_operator(mode_mj, time)
    evolved = m_adjoint(U_ij) @ (U_mj @ psi_mj.coefficients)
    return m_inner(psi_ij, evolved), m_inner(psi_ij, psi_mj)


def heisenberg_CA_expectation(config: Configuration, mode_grid: Optional[QuadratureSpec] = None,
                              n_max: int = 24, time: Optional[float] = None) -> ChargeObservableResult:
    """Cross term of ``C_A(t)`` in the superposed Heisenberg state.

    The product over modes is accumulated as a sum of logarithms in radial
    node order.  With the analytic tail, the remainder of the phase beyond
    ``k_max`` is added in closed form; the overlap modulus is not extended.

    Raises
    ------
    TruncationError
        If an effective mode amplitude is too large for ``n_max``.
    """
    _require_superposed_a(config)
    spec = mode_grid or QuadratureSpec()
    if time is not None:
        config = config.with_(time=time)
    t = config.time
    r_i, r_m = config.positions_a
    (r_j,) = config.positions_b
    R_ij = float(np.linalg.norm(r_i - r_j))
    R_mj = float(np.linalg.norm(r_m - r_j))
    R_im = float(np.linalg.norm(r_i - r_m))
    k_max = spec.resolved_k_max([R_ij, R_mj])
    if config.charge == 0.0:
        return ChargeObservableResult(1.0 + 0j, 0.0, 1.0, 1.0, 0.0, 0, k_max)

    rep = FockSpace(n_max)
    nodes, weights = radial_rule(spec, [R_ij, R_mj, max(R_im, R_ij, R_mj)], k_max)
    phase_terms, log_mod_t, log_mod_0 = [], [], []
    n_modes = 0
    for k, w in zip(nodes, weights):
        eta_ij, eta_mj = shell_amplitudes(k, w * k * k, (r_i, r_j, r_m), config)
        for e_ij, e_mj in zip(eta_ij, eta_mj):
            cross, overlap = mode_cross_factor(k, e_ij, e_mj, rep, t, config.units)
            phase_terms.append(np.angle(cross))
            log_mod_t.append(math.log(abs(cross)))
            log_mod_0.append(math.log(abs(overlap)))
            n_modes += 1

    tail = 0.0
    if spec.tail is Tail.SINE_INTEGRAL and t > 0:
        c = float(radial_density(k_max, config))
        tail = c / R_ij * sine_integral_tail(k_max, R_ij) - c / R_mj * sine_integral_tail(k_max, R_mj)
    phase = math.fsum(phase_terms) + tail
    visibility = math.exp(math.fsum(log_mod_t) - math.fsum(log_mod_0))
    value = visibility * complex(math.cos(phase), math.sin(phase))
    return ChargeObservableResult(value, float(phase), float(visibility),
                                  float(math.exp(math.fsum(log_mod_0))), float(tail), n_modes, float(k_max))


def tensor_cross_term(k: float, etas_ij, etas_mj, n_max: int, time: float, units=None) -> complex:
    """Brute-force cross term for a few modes of equal ``k`` on the full tensor product.

    Builds ``sum_p h_p`` on ``(n_max + 1) ** n_modes`` levels and evaluates
    ``<<lam_ij| U_ij^T U_mj |lam_mj>>`` with the product metric.  Meant as
    an oracle for the per-mode factorisation; keep ``n_modes <= 3``.
    """
    etas_ij = np.atleast_1d(np.asarray(etas_ij, dtype=complex))
    etas_mj = np.atleast_1d(np.asarray(etas_mj, dtype=complex))
    if etas_ij.shape != etas_mj.shape or etas_ij.size > 3:
        raise DomainError("need matching amplitude lists of at most three modes")
    rep = FockSpace(n_max)
    n = etas_ij.size
    eye = rep.identity

    def embed(op, p):
        out = np.ones((1, 1), dtype=complex)
        for q in range(n):
            out = np.kron(out, op if q == p else eye)
        return out

    def branch(etas):
        h = sum(embed(build_mode_hamiltonian(k, e, rep, **({} if units is None else {"units": units})).h_matrix, p)
                for p, e in enumerate(etas))
        state = np.ones(1, dtype=complex)
        for e in etas:
            c = coherent_coefficients(complex(e), rep.dim)
            c = c / math.sqrt(np.sum(rep.m_diag * np.abs(c) ** 2))
            state = np.kron(state, c)
        return h, state

    metric = np.ones(1)
    for _ in range(n):
        metric = np.kron(metric, parity_diagonal(rep.dim))
    hbar = 1.0 if units is None else units.hbar
    h_ij, psi_ij = branch(etas_ij)
    h_mj, psi_mj = branch(etas_mj)
    U_ij = matrix_exp(h_ij, -1j * time / hbar)
    U_mj = matrix_exp(h_mj, -1j * time / hbar)
    return m_inner(psi_ij, m_adjoint(U_ij, metric) @ (U_mj @ psi_mj), metric)


# ---------------------------------------------------------------------------
# tomography


def tomography_estimate(delta: float, n_samples: Optional[int] = 10_000, seed: int = 0) -> float:
    """Recover ``delta`` from sampled ``sigma_x`` and ``sigma_y`` on the which-path qubit.

    The branch qubit ``(|i> + exp(i delta)|m>)/sqrt(2)`` has
    ``<sigma_x> = cos(delta)`` and ``<sigma_y> = sin(delta)``.  Each is
    estimated from ``n_samples`` Born-rule outcomes; ``None`` uses the exact
    expectations.  The estimate lies in ``(-pi, pi]``.
    """
    sx, sy = math.cos(delta), math.sin(delta)
    if n_samples is not None:
        n_samples = int(n_samples)
        if n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        rng = np.random.default_rng(seed)
        up = rng.binomial(n_samples, [(1.0 + sx) / 2.0, (1.0 + sy) / 2.0])
        sx, sy = 2.0 * up / n_samples - 1.0
    return float(math.atan2(sy, sx))


def tomography_without_closing(config: Configuration, spec: Optional[QuadratureSpec] = None,
                               noise_seed: int = 0, n_samples: Optional[int] = 10_000) -> float:
    """Relative phase estimated from local measurements on the two paths of A."""
    return tomography_estimate(relative_phase(config, spec), n_samples, noise_seed)


# ---------------------------------------------------------------------------
# entanglement


def branch_state(phases) -> np.ndarray:
    """``(1/2) sum_ab exp(-i phi_ab) |ab>`` in the order 00, 01, 10, 11."""
    p = np.asarray(phases, dtype=float)
    if p.shape != (2, 2):
        raise DomainError(f"need a 2x2 phase matrix, got {p.shape}")
    return 0.5 * np.exp(-1j * p).ravel()


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose of the second qubit of a 4x4 density matrix."""
    return np.asarray(rho).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(rho: np.ndarray) -> float:
    ev = np.linalg.eigvalsh(partial_transpose(rho))
    return float(-np.sum(ev[ev < 0]))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    rho_tilde = yy @ rho.conj() @ yy
    w, v = np.linalg.eigh(rho)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    ev = np.linalg.eigvalsh(sqrt_rho @ rho_tilde @ sqrt_rho)
    ev = np.where(ev > SPECTRUM_FLOOR, ev, 0.0)
    lam = np.sort(np.sqrt(ev))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def witness_from_phases(phases) -> EntanglementResult:
    psi = branch_state(phases)
    rho = np.outer(psi, psi.conj())
    return EntanglementResult(negativity(rho), concurrence(rho))


def entanglement_witness(config: Configuration, spec: Optional[QuadratureSpec] = None) -> EntanglementResult:
    """Negativity and concurrence of two superposed charges after the field phases are absorbed."""
    if len(config.positions_a) != 2 or len(config.positions_b) != 2:
        raise DomainError("both particles must be superposed over two positions")
    return witness_from_phases(branch_phase_matrix(config, spec).phases)
