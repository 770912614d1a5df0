"""Momentum-space integration of the mode phases.

The phase collected by a pair of sharp sources a distance ``R`` apart is

    phi = t * integral d^3k  w(k) |lam(k)|^2,
    |lam|^2 = 2 (g / hbar w)^2 (1 + cos(k . R)).

The solid-angle average of ``cos(k . R)`` is ``sinc(kR)``, which leaves a
radial integral with density ``c(k) = 4 pi k^2 t w 2 (g / hbar w)^2``.  For
both couplings ``c`` does not depend on ``k``, so

* the position-independent part ``integral_0^kmax c dk`` grows linearly with
  the cutoff (self-energy, reported as ``subtracted_constant``), and
* the position-dependent part is ``(c / R) Si(kmax R)``, whose remainder
  beyond the cutoff is the closed-form ``(c / R)(pi/2 - Si(kmax R))``.

The oscillatory radial integral uses Gauss-Legendre (or tanh-sinh) panels of
width ``pi / R`` so each panel spans one half-period.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError
from .units import Configuration, coupling_g, mode_frequency

#: Distances below this are treated as coincident sources.
MIN_SEPARATION = 1e-9

_SERIES_CUTOFF = 4.0


class Scheme(str, enum.Enum):
    GAUSS = "composite-gauss"
    TANH_SINH = "tanh-sinh"


class Tail(str, enum.Enum):
    NONE = "none"
    SINE_INTEGRAL = "analytic-sine-integral"


@dataclass(frozen=True)
class QuadratureSpec:
    """Radial grid settings.

    ``k_max=None`` means ``kmax_factor / R_min`` for the shortest distance
    involved.  ``n_nodes`` is the total node budget; every panel gets at
    least ``min_order`` nodes.
    """

    k_min: float = 0.0
    k_max: Optional[float] = None
    n_nodes: int = 256
    scheme: Scheme = Scheme.GAUSS
    tail: Tail = Tail.SINE_INTEGRAL
    kmax_factor: float = 200.0
    min_order: int = 8

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "tail", Tail(self.tail))
        if not self.k_min >= 0:
            raise DomainError(f"k_min must be >= 0, got {self.k_min}")
        if self.k_max is not None and not self.k_max > self.k_min:
            raise DomainError(f"k_max ({self.k_max}) must exceed k_min ({self.k_min})")
        if int(self.n_nodes) < 8:
            raise DomainError(f"n_nodes must be >= 8, got {self.n_nodes}")
        if not self.kmax_factor > 0:
            raise DomainError("kmax_factor must be positive")
        if self.min_order < 2:
            raise DomainError("min_order must be >= 2")

    def resolved_k_max(self, lengths: Sequence[float]) -> float:
        if self.k_max is not None:
            return float(self.k_max)
        return self.kmax_factor / min(lengths)

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return replace(self, n_nodes=self.n_nodes * factor, min_order=self.min_order * factor)

    def as_dict(self) -> dict:
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "n_nodes": int(self.n_nodes),
            "scheme": self.scheme.value,
            "tail": self.tail.value,
            "kmax_factor": self.kmax_factor,
            "min_order": self.min_order,
        }


@dataclass(frozen=True)
class PhaseResult:
    phase: float
    subtracted_constant: float
    est_error: float
    spec_used: QuadratureSpec
    k_max: float = float("nan")
    tail_phase: float = 0.0


# ---------------------------------------------------------------------------
# special functions


def angular_reduce(R: float, k) -> np.ndarray:
    """Solid-angle average of ``cos(k . R)``, i.e. ``sin(kR) / (kR)``."""
    if not R > 0:
        raise DomainError(f"R must be > 0, got {R}")
    x = np.asarray(k, dtype=float) * R
    if np.any(x < 0):
        raise DomainError("k must be >= 0")
    small = np.abs(x) < 1e-4
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(small, 1.0 - x * x / 6.0 + x**4 / 120.0, np.sin(x) / np.where(small, 1.0, x))
    return out if out.ndim else float(out)


def _si_series(x: float) -> float:
    # Si(x) = sum (-1)^n x^(2n+1) / ((2n+1)(2n+1)!)
    term = x
    total = x
    x2 = x * x
    n = 0
    while True:
        n += 1
        term *= -x2 / ((2 * n) * (2 * n + 1))
        contrib = term / (2 * n + 1)
        total += contrib
        if abs(contrib) < 1e-17 * abs(total):
            return total


def _si_continued_fraction(x: float) -> float:
    # Modified Lentz evaluation of E1(ix); Si(x) = pi/2 + Im[exp(-ix) * cf].
    tiny = 1e-300
    b = complex(1.0, x)
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(2, 10_000):
        a = -float((i - 1) ** 2)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta.real - 1.0) + abs(delta.imag) < 1e-16:
            break
    else:  # pragma: no cover - the fraction converges in O(x) steps for x > 4
        raise ConvergenceError("sine-integral continued fraction did not converge", {"x": x})
    h *= complex(math.cos(x), -math.sin(x))
    return math.pi / 2.0 + h.imag


def sine_integral(x: float) -> float:
    """``Si(x) = integral_0^x sin(s)/s ds``; power series below 4, continued fraction above."""
    x = float(x)
    if math.isinf(x):
        return math.copysign(math.pi / 2.0, x)
    if x < 0:
        return -sine_integral(-x)
    if x == 0:
        return 0.0
    if x <= _SERIES_CUTOFF:
        return _si_series(x)
    return _si_continued_fraction(x)


def sine_integral_tail(k_max: float, R: float) -> float:
    """``integral_{k_max R}^inf sin(x)/x dx = pi/2 - Si(k_max R)``."""
    x = float(k_max) * float(R)
    if not x >= 0:
        raise DomainError(f"k_max * R must be >= 0, got {x}")
    if math.isinf(x):
        return 0.0
    return math.pi / 2.0 - sine_integral(x)


# ---------------------------------------------------------------------------
# radial rules


@lru_cache(maxsize=64)
def _gauss_reference(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=64)
def _tanh_sinh_reference(order: int):
    half = max(order // 2, 1)
    h = 3.0 / half
    t = h * np.arange(-half, half + 1)
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_edges(k_min: float, k_max: float, width: float) -> np.ndarray:
    first = math.floor(k_min / width) + 1
    last = math.ceil(k_max / width) - 1
    inner = width * np.arange(first, last + 1, dtype=float)
    inner = inner[(inner > k_min) & (inner < k_max)]
    return np.concatenate(([k_min], inner, [k_max]))


def radial_rule(spec: QuadratureSpec, lengths: Sequence[float], k_max: Optional[float] = None):
    """Nodes and weights on ``[k_min, k_max]`` aligned to half-periods of the longest length.

    Returns ``(nodes, weights)`` in ascending node order.
    """
    lengths = [float(L) for L in lengths]
    if not lengths or min(lengths) < MIN_SEPARATION:
        raise DomainError(f"distances must be >= {MIN_SEPARATION}, got {lengths}")
    k_max = spec.resolved_k_max(lengths) if k_max is None else float(k_max)
    if not k_max > spec.k_min:
        raise DomainError(f"k_max ({k_max}) must exceed k_min ({spec.k_min})")
    edges = panel_edges(spec.k_min, k_max, math.pi / max(lengths))
    n_panels = len(edges) - 1
    order = max(spec.min_order, math.ceil(int(spec.n_nodes) / n_panels))
    ref_x, ref_w = (_gauss_reference(order) if spec.scheme is Scheme.GAUSS
                    else _tanh_sinh_reference(order))
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * ref_x[None, :]
    weights = half * ref_w[None, :]
    return nodes.ravel(), weights.ravel()


def fsum_real(values) -> float:
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


# ---------------------------------------------------------------------------
# phases


def radial_density(k, config: Configuration):
    """``c(k)``: radial density of the self-energy part of the phase (k-independent)."""
    u = config.units
    k = np.asarray(k, dtype=float)
    w = mode_frequency(k, u)
    g = coupling_g(k, config)
    return 4.0 * np.pi * k**2 * config.time * w * 2.0 * (g / (u.hbar * w)) ** 2


def _position_integral(R, config, spec, k_max):
    nodes, weights = radial_rule(spec, [R], k_max)
    dens = radial_density(nodes, config)
    constant = fsum_real(weights * dens)
    cross = fsum_real(weights * dens * angular_reduce(R, nodes))
    return cross, constant


def coulomb_phase(config: Configuration, pos_a, pos_b, spec: Optional[QuadratureSpec] = None,
                  rtol: Optional[float] = None) -> PhaseResult:
    """Position-dependent phase of two sharp sources by radial quadrature.

    Converges to ``kappa t / R``.  The cutoff-dependent self-energy
    ``integral c dk`` is returned as ``subtracted_constant``.

    Raises
    ------
    DomainError
        If the sources are closer than ``MIN_SEPARATION``.
    ConvergenceError
        If ``rtol`` is given and ``est_error > rtol * |phase|``.
    """
    spec = spec or QuadratureSpec()
    R = float(np.linalg.norm(np.asarray(pos_a, float) - np.asarray(pos_b, float)))
    if R < MIN_SEPARATION:
        raise DomainError(f"source separation {R:.3g} below {MIN_SEPARATION}")
    if config.charge == 0.0 or config.time == 0.0:
        return PhaseResult(0.0, 0.0, 0.0, spec, spec.resolved_k_max([R]), 0.0)
    k_max = spec.resolved_k_max([R])
    cross, constant = _position_integral(R, config, spec, k_max)
    cross_fine, _ = _position_integral(R, config, spec.refined(), k_max)
    tail_value = float(radial_density(k_max, config)) / R * sine_integral_tail(k_max, R)
    if spec.tail is Tail.SINE_INTEGRAL:
        tail = tail_value
        est = abs(cross_fine - cross)
    else:
        tail = 0.0
        est = abs(cross_fine - cross) + abs(tail_value)
    phase = cross_fine + tail
    if rtol is not None and est > rtol * abs(phase):
        raise ConvergenceError(
            f"quadrature error estimate {est:.3g} exceeds rtol*|phase| = {rtol * abs(phase):.3g}",
            {"R": R, "k_max": k_max, "phase": phase, "est_error": est, "spec": spec.as_dict()},
        )
    return PhaseResult(float(phase), float(constant), float(est), spec, float(k_max), float(tail))


def analytic_phase(config: Configuration, R: float) -> float:
    """Closed-form ``kappa t / (hbar R)``."""
    if not R > 0:
        raise DomainError(f"R must be > 0, got {R}")
    return config.kappa * config.time / (config.units.hbar * R)
