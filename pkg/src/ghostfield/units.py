"""Physical scenario, natural units and per-mode couplings.

Everything inside the package runs in natural units with
``hbar = c = epsilon0 = G = 1``.  The effective coupling ``kappa`` absorbs the
charge (or mass) so that the static interaction energy of two sources a
distance ``R`` apart is ``kappa / R``:

* electromagnetic: ``kappa = q**2 / (4 pi epsilon0)``
* gravitational:   ``kappa = G m**2``

:func:`phase_to_si` is the single place where SI constants appear.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError


class Coupling(str, enum.Enum):
    EM = "em"
    GRAVITY = "gravity"

    @classmethod
    def parse(cls, value) -> "Coupling":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown coupling kind {value!r} (expected 'em' or 'gravity')") from None


@dataclass(frozen=True)
class UnitSystem:
    """Fixed natural-unit constants.  Kept as a type so the values are explicit."""

    hbar: float = 1.0
    c: float = 1.0
    epsilon0: float = 1.0
    G: float = 1.0


NATURAL = UnitSystem()


def _as_vector3(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} has non-finite entries")
    return arr


def _as_branches(values, name: str) -> tuple:
    vecs = tuple(_as_vector3(v, f"{name}[{i}]") for i, v in enumerate(values))
    if not 1 <= len(vecs) <= 2:
        raise ConfigError(f"{name} must hold 1 or 2 branch positions, got {len(vecs)}")
    return vecs


@dataclass(frozen=True)
class Configuration:
    """Two static sources, each sharp or superposed over two branch positions.

    Parameters
    ----------
    coupling : Coupling or str
        ``"em"`` (charge ``q``) or ``"gravity"`` (mass ``m``).
    charge : float
        ``q`` or ``m`` in natural units, non-negative.
    positions_a, positions_b : sequence of 3-vectors
        Branch positions of particle A and particle B (1 or 2 each).
    time : float
        Interaction time, non-negative.
    """

    coupling: Coupling
    charge: float
    positions_a: tuple
    positions_b: tuple
    time: float = 1.0
    units: UnitSystem = field(default=NATURAL, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coupling", Coupling.parse(self.coupling))
        charge = float(self.charge)
        if not np.isfinite(charge) or charge < 0:
            raise ConfigError(f"charge must be finite and >= 0, got {self.charge!r}")
        time = float(self.time)
        if not np.isfinite(time) or time < 0:
            raise ConfigError(f"time must be finite and >= 0, got {self.time!r}")
        object.__setattr__(self, "charge", charge)
        object.__setattr__(self, "time", time)
        pos_a = _as_branches(self.positions_a, "positions_a")
        pos_b = _as_branches(self.positions_b, "positions_b")
        for i, ra in enumerate(pos_a):
            for j, rb in enumerate(pos_b):
                if np.linalg.norm(ra - rb) == 0.0:
                    raise ConfigError(
                        f"positions_a[{i}] coincides with positions_b[{j}] at {ra.tolist()}"
                    )
        object.__setattr__(self, "positions_a", pos_a)
        object.__setattr__(self, "positions_b", pos_b)

    @property
    def kappa(self) -> float:
        return effective_coupling(self)

    def with_(self, **changes) -> "Configuration":
        """Copy with some fields replaced (re-validated)."""
        values = dict(
            coupling=self.coupling,
            charge=self.charge,
            positions_a=self.positions_a,
            positions_b=self.positions_b,
            time=self.time,
            units=self.units,
        )
        values.update(changes)
        return Configuration(**values)


def effective_coupling(config: Configuration) -> float:
    u = config.units
    if config.coupling is Coupling.EM:
        return config.charge**2 / (4.0 * np.pi * u.epsilon0)
    return u.G * config.charge**2


def matched_charge(config: Configuration, target: Coupling | str) -> float:
    """Charge value giving the same ``kappa`` under the other coupling kind."""
    target = Coupling.parse(target)
    kappa = effective_coupling(config)
    u = config.units
    if target is Coupling.EM:
        return float(np.sqrt(4.0 * np.pi * u.epsilon0 * kappa))
    return float(np.sqrt(kappa / u.G))


def mode_frequency(k, units: UnitSystem = NATURAL):
    """Angular frequency ``c k`` of a mode with wavenumber ``k > 0``."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(~(k_arr > 0)):
        raise DomainError(f"mode wavenumber must be > 0, got {k!r}")
    return units.c * k_arr if k_arr.ndim else float(units.c * k_arr)


def coupling_g(k, config: Configuration):
    """Per-mode coupling ``g(k)`` of the scalar field to one source.

    EM uses ``q c sqrt(hbar / (2 eps0 w (2 pi)^3))``; gravity uses
    ``m c sqrt(G / (hbar w (2 pi)^2))``.  Both formulas are taken literally;
    with them the static energy between two sources is exactly ``kappa / R``
    for the respective ``kappa``.
    """
    u = config.units
    w = mode_frequency(k, u)
    if config.coupling is Coupling.EM:
        return config.charge * u.c * np.sqrt(u.hbar / (2.0 * u.epsilon0 * w * (2.0 * np.pi) ** 3))
    return config.charge * u.c * np.sqrt(u.G / (u.hbar * w * (2.0 * np.pi) ** 2))


@dataclass(frozen=True)
class ModeAmplitude:
    k_magnitude: float
    value: complex


def source_amplitude(k_vec, positions: Sequence, config: Configuration) -> complex:
    """Eigenvalue of the per-mode source operator for sharp sources at ``positions``.

    ``(g / hbar w) * sum_l exp(-i k . r_l)``.
    """
    k_vec = np.asarray(k_vec, dtype=float)
    k = float(np.linalg.norm(k_vec))
    if not k > 0:
        raise DomainError("zero wave vector has no mode amplitude")
    pref = coupling_g(k, config) / (config.units.hbar * mode_frequency(k, config.units))
    phase_sum = sum(np.exp(-1j * np.dot(k_vec, np.asarray(r, dtype=float))) for r in positions)
    return complex(pref * phase_sum)


def eta_eigenvalue(k_vec, pos_a, pos_b, config: Configuration) -> ModeAmplitude:
    """Coherent amplitude of the scalar mode ``k_vec`` with sources at ``pos_a`` and ``pos_b``."""
    value = source_amplitude(k_vec, (pos_a, pos_b), config)
    return ModeAmplitude(float(np.linalg.norm(k_vec)), value)


def phase_to_si(coupling: Coupling | str, charge_si: float, distance_m: float, time_s: float) -> float:
    """Static-interaction phase ``kappa t / (hbar R)`` for a charge [C] or mass [kg] in SI."""
    from scipy import constants as sc

    coupling = Coupling.parse(coupling)
    if coupling is Coupling.EM:
        kappa = charge_si**2 / (4.0 * np.pi * sc.epsilon_0)
    else:
        kappa = sc.G * charge_si**2
    return kappa * time_s / (sc.hbar * distance_m)
