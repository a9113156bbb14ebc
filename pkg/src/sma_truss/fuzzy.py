"""Single-input TSK fuzzy system used as a disturbance compensator.

Rules have the form "if s is S_r then d_r = D_r" with crisp (zero-order)
consequents. The fuzzy sets S_r are triangles peaking at their center and
reaching zero at the neighbouring centers, with saturating shoulders on the
two outer sets, so the firing strengths always sum to one.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CENTERS = (-0.100, -0.050, -0.002, 0.002, 0.050, 0.100)


@dataclass(frozen=True)
class MembershipPartition:
    centers: tuple[float, ...] = DEFAULT_CENTERS

    def __post_init__(self):
        centers = tuple(float(c) for c in self.centers)
        if len(centers) < 2:
            raise ValueError("a partition needs at least two centers")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError(f"centers must be strictly increasing: {centers}")
        object.__setattr__(self, "centers", centers)

    def __len__(self):
        return len(self.centers)


@dataclass(frozen=True)
class RuleConsequents:
    D_hat: np.ndarray
    d_max: float = 10.0

    def __post_init__(self):
        D = np.array(self.D_hat, dtype=float)
        if not np.all(np.isfinite(D)):
            raise ValueError("consequents must be finite")
        object.__setattr__(self, "D_hat", D)

    @classmethod
    def zeros(cls, n: int, d_max: float = 10.0) -> "RuleConsequents":
        return cls(np.zeros(n), d_max)


def memberships(s: float, part: MembershipPartition) -> np.ndarray:
    """Firing strengths of every rule for input ``s``.

    At most two entries are nonzero and they sum to one.
    """
    c = part.centers
    w = np.zeros(len(c))
    if s <= c[0]:
        w[0] = 1.0
    elif s >= c[-1]:
        w[-1] = 1.0
    else:
        i = bisect.bisect_right(c, s) - 1
        t = (s - c[i]) / (c[i + 1] - c[i])
        w[i] = 1.0 - t
        w[i + 1] = t
    return w


def normalized_memberships(s: float, part: MembershipPartition) -> np.ndarray:
    w = memberships(s, part)
    return w / w.sum()


def infer(s: float, part: MembershipPartition, cons: RuleConsequents) -> float:
    """Weighted-average output ``D_hat . Psi(s)``."""
    return float(cons.D_hat @ normalized_memberships(s, part))


def adapt(
    cons: RuleConsequents,
    s: float,
    part: MembershipPartition,
    phi: float,
    dtau: float,
) -> RuleConsequents:
    """One explicit-Euler step of ``D_hat' = phi * s * Psi(s)``, clamped to ``d_max``."""
    if phi < 0:
        raise ValueError(f"learning rate must be non-negative, got {phi!r}")
    if phi == 0.0 or s == 0.0:
        return cons
    D = cons.D_hat + phi * s * dtau * normalized_memberships(s, part)
    return RuleConsequents(np.clip(D, -cons.d_max, cons.d_max), cons.d_max)


@dataclass
class FuzzyCompensator:
    """Mutable compensator state: partition, current consequents and learning rate.

    One instance belongs to one controller; it is not safe to share.
    """

    part: MembershipPartition = field(default_factory=MembershipPartition)
    cons: RuleConsequents | None = None
    phi: float = 2.0

    def __post_init__(self):
        if self.cons is None:
            self.cons = RuleConsequents.zeros(len(self.part))
        if len(self.cons.D_hat) != len(self.part):
            raise ValueError("one consequent per membership function is required")

    def output(self, s: float) -> float:
        return infer(s, self.part, self.cons)

    def update(self, s: float, dtau: float) -> None:
        self.cons = adapt(self.cons, s, self.part, self.phi, dtau)
