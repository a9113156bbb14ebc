"""Nondimensional equation of motion of the SMA two-bar (von Mises) truss.

The apex displacement ``x = X / L0`` obeys::

    x' = y
    y' = gamma sin(Omega tau) - xi y + g(x) + u

where ``g`` is the restoring acceleration produced by the two bars. With
``r = sqrt(x^2 + b^2)`` the bar strain is ``eps = r - 1`` and

    g(x) = -(x / r) * sigma(eps),
    sigma(eps) = (theta - 1) eps - alpha2 eps^3 + alpha3 eps^5.

Expanding ``sigma(r - 1) / r`` in powers of ``r`` gives the familiar
six-term polynomial in half-integer powers of ``x^2 + b^2``. That expanded
form cancels about six significant digits at the stable wells (the alpha3
terms are ~1e5 while ``g`` is ~1e-2), so ``g`` is evaluated in the factored
form above.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constitutive import MaterialProperties, TrussGeometry

# 1 MPa in Pa
_MPA = 1.0e6


@dataclass(frozen=True)
class TrussParams:
    theta: float  # T / T_M
    xi: float  # damping
    gamma: float  # forcing amplitude
    Omega: float  # forcing frequency / natural frequency
    alpha2: float  # a2 / (a1 T_M)
    alpha3: float  # a3 / (a1 T_M)
    b: float  # B / L0

    def __post_init__(self):
        if not 0.0 < self.b < 1.0:
            raise ValueError(f"b must lie in (0, 1), got {self.b!r}")
        if self.xi < 0:
            raise ValueError(f"xi must be non-negative, got {self.xi!r}")
        for name in ("theta", "alpha2", "alpha3"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be positive, got {value!r}")


@dataclass(frozen=True, slots=True)
class SimState:
    x: float
    y: float
    tau: float = 0.0


def nondimensionalize(
    mat: MaterialProperties,
    geom: TrussGeometry,
    T: float,
    P0: float = 0.0,
    omega: float = 0.0,
) -> TrussParams:
    """Map dimensional truss data onto :class:`TrussParams`.

    ``P0`` is in N and ``omega`` in rad/s; the material constants are taken
    in MPa and converted here.
    """
    for name, value in (("m", geom.m), ("A", geom.A), ("L0", geom.L0)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    a1_T_M = mat.a1 * mat.T_M
    omega0 = math.sqrt(2.0 * geom.A * a1_T_M * _MPA / (geom.m * geom.L0))
    return TrussParams(
        theta=T / mat.T_M,
        xi=geom.c / (geom.m * omega0),
        gamma=P0 / (geom.m * geom.L0 * omega0**2),
        Omega=omega / omega0,
        alpha2=mat.a2 / a1_T_M,
        alpha3=mat.a3 / a1_T_M,
        b=math.cos(geom.phi0),
    )


def bar_strain(x, b: float):
    """Strain ``sqrt(x^2 + b^2) - 1`` without cancellation near ``r = 1``."""
    r2 = x * x + b * b
    return (r2 - 1.0) / (r2**0.5 + 1.0)


def restoring_term(x, params: TrussParams):
    """Restoring acceleration ``g(x)``; accepts floats or numpy arrays."""
    b = params.b
    r = (x * x + b * b) ** 0.5
    eps = bar_strain(x, b)
    e2 = eps * eps
    sigma = eps * ((params.theta - 1.0) + e2 * (-params.alpha2 + params.alpha3 * e2))
    return -x / r * sigma


def potential(x, params: TrussParams):
    """Potential ``V`` with ``dV/dx = -g(x)``, zero at the natural length."""
    e2 = bar_strain(x, params.b) ** 2
    return e2 * ((params.theta - 1.0) / 2.0 + e2 * (-params.alpha2 / 4.0 + params.alpha3 * e2 / 6.0))


def energy(x, y, params: TrussParams):
    return 0.5 * y * y + potential(x, params)


def derivative(
    state: SimState, params: TrussParams, u: float = 0.0, include_forcing: bool = True
) -> tuple[float, float]:
    """Right-hand side ``(x', y')``; the control ``u`` enters ``y'`` with unit gain."""
    dy = -params.xi * state.y + restoring_term(state.x, params) + u
    if include_forcing:
        dy += params.gamma * math.sin(params.Omega * state.tau)
    return state.y, dy


def _bisect(f, lo: float, hi: float, tol: float = 1e-10, maxiter: int = 200) -> float:
    flo = f(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def equilibria(
    params: TrussParams,
    lo: float = -2.0,
    hi: float = 2.0,
    resolution: float = 1e-4,
    tol: float = 1e-10,
) -> list[tuple[float, bool]]:
    """Roots of ``g`` on ``[lo, hi]`` as ``(x_star, is_stable)`` pairs.

    Roots are bracketed by sign changes on a uniform grid and refined by
    bisection. A root is stable when ``g`` has negative slope there. An even
    root count means a tangency slipped through the grid and is warned about.
    """
    n = int(round((hi - lo) / resolution)) + 1
    grid = np.linspace(lo, hi, n)
    values = restoring_term(grid, params)
    sign = np.sign(values)

    def g(x):
        return restoring_term(x, params)

    roots = [float(grid[i]) for i in np.flatnonzero(sign == 0)]
    for i in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        roots.append(_bisect(g, float(grid[i]), float(grid[i + 1]), tol))
    roots.sort()

    if len(roots) % 2 == 0:
        warnings.warn(
            f"found an even number of equilibria ({len(roots)}); "
            "a tangential root was probably missed",
            RuntimeWarning,
            stacklevel=2,
        )

    h = 1e-6
    return [(x, (g(x + h) - g(x - h)) / (2 * h) < 0.0) for x in roots]
