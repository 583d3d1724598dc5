"""Steering thresholds and classification of the (eta, p) parameter plane.

Both certification conditions are sufficient only, so the plane carries
four labels: both conditions hold (one-way steering with full dimension
certified on one side and unsteerability on the other), exactly one holds,
or neither does.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class RegionLabel(Enum):
    UNLIMITED_ONE_WAY = "UNLIMITED_ONE_WAY"
    D_STEERABLE_ONLY = "D_STEERABLE_ONLY"
    UNSTEERABLE_B_TO_A_ONLY = "UNSTEERABLE_B_TO_A_ONLY"
    UNDETERMINED = "UNDETERMINED"


def p_threshold_all(d: int) -> float:
    """Visibility above which full-dimension steering is certified with all
    measurements: (d sqrt(d/(d+1)) - 1)/(d - 1). The inequality is strict."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return (d * np.sqrt(d / (d + 1.0)) - 1.0) / (d - 1.0)


def p_threshold_two_mubs(d: int) -> float:
    """Visibility at which a pair of mutually unbiased bases certifies
    full-dimension steering: ((d + sqrt(d) - 1) sqrt(d-1) - 1) /
    ((d-1)(sqrt(d-1) + 1))."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    rd = np.sqrt(float(d))
    rdm1 = np.sqrt(d - 1.0)
    return ((d + rd - 1.0) * rdm1 - 1.0) / ((d - 1.0) * (rdm1 + 1.0))


def eta_unsteerable_bound(d: int, p: float) -> float:
    """Transmission below which the lossy-noisy side is unsteerable: (1-p)^(d-1).
    The inequality is non-strict."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return (1.0 - p) ** (d - 1)


#: Relative slack on the transmission bound comparison. Boundary equality
#: certifies unsteerability, and points equal to the bound in exact
#: arithmetic can land a few ulp above it in floating point; the slack is
#: relative so the exponentially small bounds at large d stay sharp.
_BOUND_RTOL = 1e-12


def certified_unsteerable(d: int, eta: float, p: float) -> bool:
    """Does the transmission satisfy eta <= (1-p)^(d-1) (boundary included)?"""
    return eta <= eta_unsteerable_bound(d, p) * (1.0 + _BOUND_RTOL)


def certified_d_steerable(d: int, eta: float, p: float) -> bool:
    """Strict visibility threshold plus a positive transmission for the filter."""
    return p > p_threshold_all(d) and eta > 0.0


@dataclass(frozen=True)
class ThresholdReport:
    """Certification thresholds for one dimension."""

    d: int
    p_all_meas: float
    p_two_mubs: float

    def eta_bound_at(self, p: float) -> float:
        return eta_unsteerable_bound(self.d, p)

    def to_document(self) -> dict:
        return {
            "d": self.d,
            "p_all_meas": self.p_all_meas,
            "p_two_mubs": self.p_two_mubs,
            "eta_bound_formula": "(1-p)^(d-1)",
        }


def threshold_report(d: int) -> ThresholdReport:
    return ThresholdReport(
        d=d, p_all_meas=p_threshold_all(d), p_two_mubs=p_threshold_two_mubs(d)
    )


def classify(d: int, eta: float, p: float) -> RegionLabel:
    """Apply both sufficient conditions to one parameter point.

    Full-dimension steering needs strict ``p > p_threshold_all(d)`` and a
    positive transmission (the loss filter requires eta > 0); the
    unsteerability certificate needs ``eta <= (1-p)^(d-1)``. Points
    satisfying neither are UNDETERMINED, not declared anything.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    d_steer = certified_d_steerable(d, eta, p)
    unsteer = certified_unsteerable(d, eta, p)
    if d_steer and unsteer:
        return RegionLabel.UNLIMITED_ONE_WAY
    if d_steer:
        return RegionLabel.D_STEERABLE_ONLY
    if unsteer:
        return RegionLabel.UNSTEERABLE_B_TO_A_ONLY
    return RegionLabel.UNDETERMINED


def eta_grid(d: int, grid_n: int) -> np.ndarray:
    """Transmission grid: uniform in u with eta = u^(d-1) (linear for d=2).

    The certified overlap region sits at transmissions of order
    (1-p)^(d-1), exponentially thin in d; gridding the transmission axis
    in the same power renders it at every dimension with the same
    resolution. For d=2 this is precisely the uniform grid on [0, 1].
    """
    u = np.linspace(0.0, 1.0, grid_n + 1)
    return u ** (d - 1)


def phase_diagram(d: int, grid_n: int) -> list[tuple[float, float, RegionLabel]]:
    """Label the (eta, p) plane on a (grid_n+1)^2 grid.

    Rows are ordered row-major in eta then p. The p axis is the uniform
    grid on [0, 1]; the eta axis is the power grid of :func:`eta_grid`.
    For d <= 16 and grid_n >= 200 the tabulation is guaranteed to contain
    at least one UNLIMITED_ONE_WAY cell, and that is checked.
    """
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    etas = eta_grid(d, grid_n)
    ps = np.linspace(0.0, 1.0, grid_n + 1)
    p_thresh = p_threshold_all(d)
    bounds = (1.0 - ps) ** (d - 1) * (1.0 + _BOUND_RTOL)
    d_steer_row = ps > p_thresh
    rows: list[tuple[float, float, RegionLabel]] = []
    none_unlimited = True
    for eta in etas:
        unsteer = eta <= bounds
        d_steer = d_steer_row & (eta > 0.0)
        for j, p in enumerate(ps):
            if d_steer[j] and unsteer[j]:
                label = RegionLabel.UNLIMITED_ONE_WAY
                none_unlimited = False
            elif d_steer[j]:
                label = RegionLabel.D_STEERABLE_ONLY
            elif unsteer[j]:
                label = RegionLabel.UNSTEERABLE_B_TO_A_ONLY
            else:
                label = RegionLabel.UNDETERMINED
            rows.append((float(eta), float(p), label))
    if none_unlimited and d <= 16 and grid_n >= 200:
        raise RuntimeError(
            f"no UNLIMITED_ONE_WAY cell found for d={d} at grid {grid_n}; "
            "this contradicts the guaranteed nonempty overlap"
        )
    return rows


def phase_diagram_csv(rows: list[tuple[float, float, RegionLabel]]) -> str:
    """Render phase-diagram rows as CSV with 17 significant digits."""
    lines = ["eta,p,label"]
    for eta, p, label in rows:
        lines.append(f"{eta:.17g},{p:.17g},{label.value}")
    return "\n".join(lines) + "\n"
