"""Polynomial constitutive law for the shape memory bars.

Everything here is dimensional: stresses in MPa, temperatures in K and
angles in rad. Conversion to SI only happens when the truss parameters are
made nondimensional (see :mod:`sma_truss.dynamics`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class MaterialProperties:
    a1: float  # MPa/K
    a2: float  # MPa
    a3: float  # MPa
    T_M: float  # K, martensite stable below this

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "T_M"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class TrussGeometry:
    L0: float  # m
    phi0: float  # rad
    A: float  # m^2
    m: float  # kg
    c: float = 0.0  # N s/m

    def __post_init__(self):
        if not 0.0 < self.phi0 < math.pi / 2:
            raise ValueError(f"phi0 must lie in (0, pi/2), got {self.phi0!r}")
        for name in ("L0", "A", "m"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.c < 0:
            raise ValueError(f"damping c must be non-negative, got {self.c!r}")

    @property
    def B(self) -> float:
        """Horizontal projection of one bar."""
        return self.L0 * math.cos(self.phi0)


# Cu-Zn-Al-Ni alloy fitted at 373 K.
CUZNALNI = MaterialProperties(a1=523.29, a2=1.868e7, a3=2.186e9, T_M=288.0)


def stress(eps, T: float, mat: MaterialProperties):
    """Uniaxial stress in MPa for strain ``eps`` at temperature ``T``.

    Evaluated as ``eps * (a1 (T - T_M) + eps^2 (-a2 + a3 eps^2))``; the
    nested form keeps the large a3 term from swamping the linear one.
    Works elementwise on numpy arrays.
    """
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T!r}")
    e2 = eps * eps
    return eps * (mat.a1 * (T - mat.T_M) + e2 * (-mat.a2 + mat.a3 * e2))


def austenite_temperature(mat: MaterialProperties) -> float:
    """Temperature above which the free energy has a single minimum."""
    return mat.T_M + mat.a2 * mat.a2 / (4.0 * mat.a1 * mat.a3)


def strain_from_angle(phi: float, phi0: float) -> float:
    """Bar strain ``L/L0 - 1`` for the current bar angle ``phi``."""
    if not 0.0 < phi < math.pi / 2:
        raise ValueError(f"phi must lie in (0, pi/2), got {phi!r}")
    return math.cos(phi0) / math.cos(phi) - 1.0
