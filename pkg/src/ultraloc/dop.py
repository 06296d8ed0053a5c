"""Dilution-of-precision analysis of beacon/receiver geometry.

The unit vectors from the receiver to each beacon form a matrix whose
normal-matrix inverse maps unit range noise onto position covariance;
its diagonal yields HDOP (x-y), VDOP (z), and GDOP. A closed-form 2-D
Cramer-Rao expression is provided for cross-checks, plus a qualitative
banding of GDOP values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .channel import BeaconLayout
from .errors import DegenerateGeometryError, DomainDegeneracyError

CONDITION_CAP = 1e8

# Default flight volume for desk-scale experiments: half a meter away
# from every wall, ceiling clearance of one meter, half-meter lattice.
DOMAIN_XY = (0.5, 4.5)
DOMAIN_Z = (0.5, 3.0)
DOMAIN_GRID = 0.5


class GdopClass(enum.Enum):
    MEASUREMENT_ERROR_OR_REDUNDANCY = "measurement error or redundancy"
    IDEAL = "ideal"
    VERY_GOOD = "very good"
    GOOD = "good"
    MEDIUM = "medium"
    SUFFICIENT = "sufficient"
    BAD = "bad"


def classify_gdop(gdop: float) -> GdopClass:
    """Band a GDOP value: <1 flags error/redundancy, 1 is ideal, then
    half-open bands [1,2), [2,5), [5,10), [10,20), [20,inf)."""
    if gdop < 0:
        raise ValueError("GDOP cannot be negative")
    if gdop == 1.0:
        return GdopClass.IDEAL
    if gdop < 1.0:
        return GdopClass.MEASUREMENT_ERROR_OR_REDUNDANCY
    if gdop < 2.0:
        return GdopClass.VERY_GOOD
    if gdop < 5.0:
        return GdopClass.GOOD
    if gdop < 10.0:
        return GdopClass.MEDIUM
    if gdop < 20.0:
        return GdopClass.SUFFICIENT
    return GdopClass.BAD


@dataclass(frozen=True)
class DopReport:
    hdop: float
    vdop: float
    gdop: float
    classification: GdopClass


@dataclass(frozen=True)
class GeometryMatrix:
    """One unit row vector per beacon, pointing from the target to it."""

    rows: np.ndarray


@dataclass(frozen=True)
class DroneDomain:
    """Axis-aligned flight volume discretized on a regular lattice."""

    x_range: tuple[float, float] = DOMAIN_XY
    y_range: tuple[float, float] = DOMAIN_XY
    z_range: tuple[float, float] = DOMAIN_Z
    grid_resolution: float = DOMAIN_GRID

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range, self.z_range):
            if lo > hi:
                raise ValueError("domain range must have min <= max")
        if self.grid_resolution <= 0:
            raise ValueError("grid resolution must be positive")

    def points(self) -> np.ndarray:
        """Lattice points covering the box, inclusive of both ends."""
        axes = [
            _inclusive_arange(lo, hi, self.grid_resolution)
            for lo, hi in (self.x_range, self.y_range, self.z_range)
        ]
        xx, yy, zz = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def contains(self, p: np.ndarray) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(
            self.x_range[0] <= p[0] <= self.x_range[1]
            and self.y_range[0] <= p[1] <= self.y_range[1]
            and self.z_range[0] <= p[2] <= self.z_range[1]
        )


def _inclusive_arange(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    pts = lo + step * np.arange(n + 1)
    return pts[pts <= hi + 1e-9]


def geometry_matrix(beacons: BeaconLayout, target: np.ndarray) -> GeometryMatrix:
    """Unit direction vectors from the target point to every beacon.

    Raises:
        ValueError: If the target coincides with a beacon.
    """
    target = np.asarray(target, dtype=float)
    diff = np.asarray(beacons.positions, dtype=float) - target[None, :]
    r = np.linalg.norm(diff, axis=1)
    if np.any(r < 1e-12):
        raise ValueError("target coincides with a beacon")
    return GeometryMatrix(rows=diff / r[:, None])


def dop_at(beacons: BeaconLayout, target: np.ndarray) -> DopReport:
    """Compute HDOP/VDOP/GDOP of the layout at one target point.

    Raises:
        DegenerateGeometryError: If the normal matrix is singular or its
            condition number exceeds CONDITION_CAP.
    """
    u = geometry_matrix(beacons, target).rows
    m = u.T @ u
    eigs = np.linalg.eigvalsh(m)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > CONDITION_CAP:
        raise DegenerateGeometryError(
            f"geometry at {np.asarray(target)} is degenerate (cond too high)"
        )
    q = np.linalg.inv(m)
    hdop = float(np.sqrt(q[0, 0] + q[1, 1]))
    vdop = float(np.sqrt(q[2, 2]))
    gdop = float(np.sqrt(q[0, 0] + q[1, 1] + q[2, 2]))
    return DopReport(hdop=hdop, vdop=vdop, gdop=gdop, classification=classify_gdop(gdop))


def dop_components(
    beacons: BeaconLayout | np.ndarray, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized HDOP/VDOP over many points.

    Returns (hdop, vdop, degenerate_mask); hdop/vdop are NaN where the
    geometry is degenerate. Used by domain averaging and the placement
    optimizer's fitness evaluations.
    """
    positions = np.asarray(
        beacons.positions if isinstance(beacons, BeaconLayout) else beacons, dtype=float
    )
    points = np.atleast_2d(np.asarray(points, dtype=float))
    diff = positions[None, :, :] - points[:, None, :]
    r = np.linalg.norm(diff, axis=2)
    coincident = np.any(r < 1e-12, axis=1)
    r_safe = np.where(r < 1e-12, 1.0, r)
    u = diff / r_safe[:, :, None]
    m = np.einsum("pij,pik->pjk", u, u)
    eigs = np.linalg.eigvalsh(m)
    degenerate = coincident | (eigs[:, 0] <= 0) | (eigs[:, -1] / np.maximum(eigs[:, 0], 1e-300) > CONDITION_CAP)

    hdop = np.full(points.shape[0], np.nan)
    vdop = np.full(points.shape[0], np.nan)
    ok = ~degenerate
    if np.any(ok):
        q = np.linalg.inv(m[ok])
        hdop[ok] = np.sqrt(q[:, 0, 0] + q[:, 1, 1])
        vdop[ok] = np.sqrt(q[:, 2, 2])
    return hdop, vdop, degenerate


def dop_average(beacons: BeaconLayout, domain: DroneDomain) -> tuple[float, float]:
    """Arithmetic mean of HDOP and VDOP over the domain lattice.

    Degenerate lattice points are excluded if they make up less than 1%
    of the domain, otherwise the whole domain is rejected.

    Returns:
        (hdop_avg, vdop_avg)
    """
    points = domain.points()
    if points.shape[0] == 0:
        raise ValueError("drone domain has no lattice points")
    hdop, vdop, degenerate = dop_components(beacons, points)
    n_bad = int(degenerate.sum())
    if n_bad > 0.01 * points.shape[0]:
        raise DomainDegeneracyError(
            f"{n_bad}/{points.shape[0]} domain points have degenerate geometry"
        )
    ok = ~degenerate
    return float(hdop[ok].mean()), float(vdop[ok].mean())


def crb_2d(beacon_angles: np.ndarray, sigma_r: float) -> float:
    """Closed-form 2-D position-error bound for angular beacon geometry.

    For ranging noise sigma_r and beacons seen from the target at angles
    theta_i, evaluates sigma_r * sqrt(N_b / sum_{i<j} |sin(theta_i - theta_j)|).

    Raises:
        DegenerateGeometryError: If all pairwise angle sines vanish.
        ValueError: If fewer than 3 beacon angles are given.
    """
    angles = np.asarray(beacon_angles, dtype=float)
    if angles.size < 3:
        raise ValueError("need at least 3 beacon angles")
    pair_sum = sum(abs(np.sin(a - b)) for a, b in combinations(angles, 2))
    if pair_sum <= 0:
        raise DegenerateGeometryError("all beacon angles coincide; bound diverges")
    return float(sigma_r * np.sqrt(angles.size / pair_sum))
