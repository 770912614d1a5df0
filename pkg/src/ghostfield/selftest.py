"""Quick oracle-equivalence checks run by ``ghostfield selftest``."""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg
import scipy.special

from .dynamics import brute_force_mode_phase, build_mode_hamiltonian, closed_form_mode_phase, constrained_state
from .expm import matrix_exp
from .fock import FockSpace, displacement, interior_block, m_adjoint, resolved_levels
from .interference import branch_state, mode_cross_factor, tensor_cross_term, witness_from_phases
from .quadrature import QuadratureSpec, analytic_phase, coulomb_phase, sine_integral
from .units import Configuration


def _check(name, err, tol):
    return name, bool(err <= tol), f"max error {err:.2e} (tol {tol:.0e})"


def run_selftest():
    """List of ``(name, passed, detail)``."""
    out = []

    xs = [0.01, 0.5, 2.0, 4.0, 7.5, 30.0, 1e3]
    out.append(_check("sine integral vs scipy", max(abs(sine_integral(x) - scipy.special.sici(x)[0]) for x in xs), 1e-13))

    rng = np.random.default_rng(7)
    A = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    ref = scipy.linalg.expm(A)
    out.append(_check("matrix exponential vs scipy", np.max(np.abs(matrix_exp(A) - ref)) / np.max(np.abs(ref)), 1e-12))

    errs = []
    for R in (0.5, 2.0):
        cfg = Configuration("em", 1.0, [(0, 0, 0)], [(R, 0, 0)], 1.0)
        res = coulomb_phase(cfg, cfg.positions_a[0], cfg.positions_b[0], QuadratureSpec())
        errs.append(abs(res.phase / analytic_phase(cfg, R) - 1.0))
    out.append(_check("coulomb phase vs closed form", max(errs), 1e-6))

    rep = FockSpace(48)
    errs = []
    for eta in (0.3, 1.0):
        mode = build_mode_hamiltonian(1.0, eta, rep)
        got = brute_force_mode_phase(mode, constrained_state(eta, rep), 1.0).phase
        want = closed_form_mode_phase(1.0, eta, 1.0)
        errs.append(abs(math.remainder(got - want, 2 * math.pi)))
    out.append(_check("mode phase brute force vs closed form", max(errs), 1e-8))

    rep = FockSpace(32)
    eta = 0.6 + 0.2j
    D = displacement(eta, rep)
    k = resolved_levels(lambda s: displacement(eta, s, check=False), rep)
    shifted = interior_block(m_adjoint(D) @ rep.a @ D, k)
    err = np.max(np.abs(shifted - interior_block(rep.a + eta * rep.identity, k)))
    out.append(_check(f"displacement shift on {k} resolved levels", err, 1e-9))

    e1, e2 = [0.3, 0.2, -0.1], [0.1, 0.25, 0.15]
    brute = tensor_cross_term(1.3, e1, e2, 8, 0.9)
    fact = np.prod([mode_cross_factor(1.3, a, b, FockSpace(24), 0.9)[0] for a, b in zip(e1, e2)])
    out.append(_check("three-mode tensor product vs factorisation", abs(brute - fact) / abs(brute), 1e-9))

    errs = []
    for delta in (0.1, 0.5, 1.0, 2.0, math.pi):
        phases = np.array([[delta, 0.0], [0.0, 0.0]])
        psi = branch_state(phases)
        oracle = 2.0 * abs(psi[0] * psi[3] - psi[1] * psi[2])
        errs.append(abs(witness_from_phases(phases).concurrence - oracle))
    out.append(_check("concurrence vs pure-state oracle", max(errs), 1e-8))
    return out
