"""Mobius transforms on the Riemann sphere and transformed index-map generation.

Conventions used throughout the package:

- Spherical coordinates are (theta, phi) = (longitude, latitude) in radians,
  theta in [-pi, pi), phi in [-pi/2, pi/2].
- The unit sphere embeds as (cos phi cos theta, cos phi sin theta, sin phi).
- Stereographic projection uses (0, 0, 1) as the pole; plane points are kept
  in homogeneous complex coordinates (u : v) so the pole and the poles of a
  Mobius map are ordinary values instead of infinities.
- ERP grids use half-pixel centers: column j has longitude
  2*pi*(j+0.5)/w - pi, row i has latitude pi/2 - pi*(i+0.5)/h (row 0 is the
  northernmost row).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimsError, NearSingularError

SINGULARITY_FLOOR = 1e-12

# Chart switch for the homogeneous stereographic projection: chart A divides
# by 1-z, chart B by x-iy, so each is used only where its denominator is
# bounded away from zero.
_CHART_SPLIT_Z = 0.5


def normalize_longitude(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    t = math.fmod(theta + math.pi, 2.0 * math.pi)
    if t < 0.0:
        t += 2.0 * math.pi
    t -= math.pi
    # rounding in the subtraction can land exactly on +pi
    return -math.pi if t >= math.pi else t


def _require_finite(name: str, *values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class SphericalCoord:
    """Longitude/latitude pair; longitude is normalized into [-pi, pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        _require_finite("SphericalCoord", self.theta, self.phi)
        if not -math.pi / 2 <= self.phi <= math.pi / 2:
            raise ValueError(f"latitude out of range: {self.phi}")
        object.__setattr__(self, "theta", normalize_longitude(self.theta))


@dataclass(frozen=True)
class SpherePoint:
    """Point on the unit sphere; the constructor enforces unit norm."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        _require_finite("SpherePoint", self.x, self.y, self.z)
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > 1e-12:
            raise ValueError(f"not a unit vector: |p|^2 = {n2}")

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        """Build from any 3-vector, normalizing it first."""
        x, y, z = float(v[0]), float(v[1]), float(v[2])
        n = math.sqrt(x * x + y * y + z * z)
        if n == 0.0 or not math.isfinite(n):
            raise ValueError("cannot normalize zero or non-finite vector")
        return cls(x / n, y / n, z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class HomogPlanePoint:
    """Projective complex-plane point (u : v); (1 : 0) is the point at infinity."""

    u: complex
    v: complex

    def __post_init__(self):
        for c in (self.u, self.v):
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError("HomogPlanePoint components must be finite")
        if abs(self.u) == 0.0 and abs(self.v) == 0.0:
            raise ValueError("(0 : 0) is not a projective point")


@dataclass(frozen=True)
class MobiusMatrix:
    """Coefficients of w -> (a*w + b)/(c*w + d), stored as a 2x2 complex matrix.

    Equality of transforms is projective: m and lambda*m act identically.
    Use canonicalize() to pick the det = 1 representative (up to sign).
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            c = complex(getattr(self, name))
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"coefficient {name} must be finite")
            object.__setattr__(self, name, c)
        if abs(self.det) <= SINGULARITY_FLOOR:
            raise NearSingularError(f"|ad - bc| = {abs(self.det)} <= {SINGULARITY_FLOOR}")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> "MobiusMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    def to_floats(self) -> tuple[float, ...]:
        """Serialize as 8 floats: a.re, a.im, b.re, b.im, c.re, c.im, d.re, d.im."""
        return (
            self.a.real, self.a.imag, self.b.real, self.b.imag,
            self.c.real, self.c.imag, self.d.real, self.d.imag,
        )

    @classmethod
    def from_floats(cls, values) -> "MobiusMatrix":
        vals = [float(v) for v in values]
        if len(vals) != 8:
            raise ValueError(f"expected 8 floats, got {len(vals)}")
        return cls(
            complex(vals[0], vals[1]), complex(vals[2], vals[3]),
            complex(vals[4], vals[5]), complex(vals[6], vals[7]),
        )


@dataclass(frozen=True)
class ViewControls:
    """User-facing view parameters: yaw/pitch rotation plus zoom about a center."""

    yaw: float = 0.0
    pitch: float = 0.0
    zoom_center: SphericalCoord = field(default_factory=lambda: SphericalCoord(0.0, 0.0))
    zoom_factor: float = 1.0

    def __post_init__(self):
        _require_finite("ViewControls", self.yaw, self.pitch, self.zoom_factor)
        if self.zoom_factor <= 0.0:
            raise ValueError("zoom_factor must be positive")


@dataclass(frozen=True)
class IndexMap:
    """H x W grid of spherical coordinates (channel 0 longitude, channel 1 latitude)."""

    height: int
    width: int
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=np.float64)
        if c.shape != (self.height, self.width, 2):
            raise BadDimsError(f"coords shape {c.shape} != ({self.height}, {self.width}, 2)")
        theta, phi = c[..., 0], c[..., 1]
        if not np.all(np.isfinite(c)):
            raise ValueError("index map contains non-finite entries")
        if np.any(theta < -math.pi) or np.any(theta >= math.pi):
            raise ValueError("index map longitude out of [-pi, pi)")
        if np.any(np.abs(phi) > math.pi / 2):
            raise ValueError("index map latitude out of [-pi/2, pi/2]")
        object.__setattr__(self, "coords", c)


# ---------------------------------------------------------------------------
# Projections


def sp(c: SphericalCoord) -> SpherePoint:
    """Spherical projection: (theta, phi) -> unit vector."""
    cp = math.cos(c.phi)
    return SpherePoint(cp * math.cos(c.theta), cp * math.sin(c.theta), math.sin(c.phi))


def sp_inv(p: SpherePoint) -> SphericalCoord:
    """Inverse spherical projection; quadrant-aware in longitude.

    At the exact poles (x = y = 0) the longitude is 0 by convention.
    """
    if p.x == 0.0 and p.y == 0.0:
        theta = 0.0
    else:
        theta = math.atan2(p.y, p.x)
    phi = math.asin(max(-1.0, min(1.0, p.z)))
    return SphericalCoord(theta, phi)


def homog_stp(p: SpherePoint, chart: str = "auto") -> HomogPlanePoint:
    """Stereographic projection from (0, 0, 1) in homogeneous coordinates.

    Two overlapping charts cover the sphere: chart "a" is (x+iy : 1-z) and
    chart "b" is (1+z : x-iy); they agree projectively wherever both are
    defined because (x+iy)(x-iy) = (1-z)(1+z) on the unit sphere. "auto"
    picks whichever denominator is well conditioned. The pole maps to (1 : 0).
    """
    if chart == "auto":
        chart = "a" if p.z <= _CHART_SPLIT_Z else "b"
    if chart == "a":
        return HomogPlanePoint(complex(p.x, p.y), complex(1.0 - p.z, 0.0))
    if chart == "b":
        return HomogPlanePoint(complex(1.0 + p.z, 0.0), complex(p.x, -p.y))
    raise ValueError(f"unknown chart {chart!r}")


def homog_stp_inv(h: HomogPlanePoint) -> SpherePoint:
    """Inverse stereographic projection of a homogeneous plane point.

    For v != 0 and w = u/v this is the usual
    (2 Re w, 2 Im w, |w|^2 - 1) / (|w|^2 + 1); (1 : 0) returns the pole.
    """
    uu = (h.u * h.u.conjugate()).real
    vv = (h.v * h.v.conjugate()).real
    s = uu + vv
    w = 2.0 * h.u * h.v.conjugate()
    x, y, z = w.real / s, w.imag / s, (uu - vv) / s
    n = math.sqrt(x * x + y * y + z * z)
    return SpherePoint(x / n, y / n, z / n)


# ---------------------------------------------------------------------------
# Mobius algebra


def mobius_apply(m: MobiusMatrix, h: HomogPlanePoint) -> HomogPlanePoint:
    """Apply the transform to a homogeneous plane point (poles included)."""
    return HomogPlanePoint(m.a * h.u + m.b * h.v, m.c * h.u + m.d * h.v)


def mobius_compose(m1: MobiusMatrix, m2: MobiusMatrix) -> MobiusMatrix:
    """Matrix product m1 * m2; applying the result applies m2 first."""
    return MobiusMatrix(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def mobius_inverse(m: MobiusMatrix) -> MobiusMatrix:
    """Adjugate matrix (d, -b, -c, a); projective inverse of m."""
    return MobiusMatrix(m.d, -m.b, -m.c, m.a)


def canonicalize(m: MobiusMatrix) -> MobiusMatrix:
    """Scale entries so ad - bc = 1 (representative fixed up to global sign)."""
    det = m.det
    if abs(det) <= SINGULARITY_FLOOR:
        raise NearSingularError(f"|ad - bc| = {abs(det)} <= {SINGULARITY_FLOOR}")
    root = cmath.sqrt(det)
    return MobiusMatrix(m.a / root, m.b / root, m.c / root, m.d / root)


def map_sphere(m: MobiusMatrix, p: SpherePoint) -> SpherePoint:
    """Conjugate the plane transform by stereographic projection: sphere -> sphere."""
    return homog_stp_inv(mobius_apply(m, homog_stp(p)))


# ---------------------------------------------------------------------------
# Transform construction


def from_rotation(axis: SpherePoint, angle: float) -> MobiusMatrix:
    """Mobius matrix whose sphere action is the 3D rotation about `axis` by `angle`.

    Right-hand rule: positive angle about (0,0,1) increases longitude. The
    sign convention is pinned by the rotation-fidelity property test against
    a direct Rodrigues oracle.
    """
    _require_finite("angle", angle)
    c = math.cos(angle / 2.0)
    s = math.sin(angle / 2.0)
    n1, n2, n3 = axis.x, axis.y, axis.z
    return MobiusMatrix(
        complex(c, s * n3),
        complex(-s * n2, s * n1),
        complex(s * n2, s * n1),
        complex(c, -s * n3),
    )


def _rotation_to_pole(p: SpherePoint) -> MobiusMatrix:
    """Rotation carrying p to the projection pole (0, 0, 1)."""
    ax, ay, az = p.y, -p.x, 0.0  # p x (0,0,1)
    n = math.hypot(ax, ay)
    if n < 1e-15:
        if p.z > 0.0:
            return MobiusMatrix.identity()
        return from_rotation(SpherePoint(1.0, 0.0, 0.0), math.pi)
    angle = math.atan2(n, p.z)
    return from_rotation(SpherePoint(ax / n, ay / n, az), angle)


def zoom_at(center: SphericalCoord, k: float) -> MobiusMatrix:
    """Sampling transform that magnifies content at `center` by angular factor k.

    Fed to build_index_map (backward-warp convention), an output pixel at
    small angular distance delta from `center` samples source content at
    delta/k. Built as R^-1 * diag(sqrt k, 1/sqrt k) * R with R the rotation
    taking `center` to the projection pole.
    """
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError("zoom factor must be positive and finite")
    r = _rotation_to_pole(sp(center))
    scale = MobiusMatrix(complex(math.sqrt(k)), 0.0, 0.0, complex(1.0 / math.sqrt(k)))
    return mobius_compose(mobius_inverse(r), mobius_compose(scale, r))


def from_controls(v: ViewControls) -> MobiusMatrix:
    """Compose yaw, then pitch, then zoom into one canonical matrix."""
    yaw_m = from_rotation(SpherePoint(0.0, 0.0, 1.0), v.yaw)
    pitch_m = from_rotation(SpherePoint(1.0, 0.0, 0.0), v.pitch)
    zoom_m = zoom_at(v.zoom_center, v.zoom_factor)
    return canonicalize(mobius_compose(zoom_m, mobius_compose(pitch_m, yaw_m)))


# ---------------------------------------------------------------------------
# Index-map generation (vectorized)


def pixel_center_longitudes(w: int) -> np.ndarray:
    """Pixel-center longitudes of an ERP grid with w columns."""
    return 2.0 * math.pi * (np.arange(w) + 0.5) / w - math.pi


def pixel_center_latitudes(h: int) -> np.ndarray:
    """Pixel-center latitudes of an ERP grid with h rows (row 0 northernmost)."""
    return math.pi / 2 - math.pi * (np.arange(h) + 0.5) / h


def transform_coords(theta: np.ndarray, phi: np.ndarray, m: MobiusMatrix):
    """Push spherical coordinate arrays through SP, STP, the Mobius map and back.

    Returns (theta', phi') arrays of the same shape. Fully vectorized; the
    chart split keeps both stereographic denominators well conditioned.
    """
    cp = np.cos(phi)
    x = cp * np.cos(theta)
    y = cp * np.sin(theta)
    z = np.sin(phi)

    # complex arithmetic unrolled over real components (hot path)
    use_a = z <= _CHART_SPLIT_Z
    ur = np.where(use_a, x, 1.0 + z)
    ui = np.where(use_a, y, 0.0)
    vr = np.where(use_a, 1.0 - z, x)
    vi = np.where(use_a, 0.0, -y)

    ar, ai = m.a.real, m.a.imag
    br, bi = m.b.real, m.b.imag
    cr, ci = m.c.real, m.c.imag
    dr, di = m.d.real, m.d.imag
    u2r = ar * ur - ai * ui + br * vr - bi * vi
    u2i = ar * ui + ai * ur + br * vi + bi * vr
    v2r = cr * ur - ci * ui + dr * vr - di * vi
    v2i = cr * ui + ci * ur + dr * vi + di * vr

    uu = u2r * u2r + u2i * u2i
    vv = v2r * v2r + v2i * v2i
    s = uu + vv
    # sphere point (exactly unit up to rounding; angles need no renormalizing)
    wr = u2r * v2r + u2i * v2i  # Re(u2 * conj(v2))
    wi = u2i * v2r - u2r * v2i  # Im(u2 * conj(v2))

    theta_out = np.arctan2(wi, wr)
    theta_out = np.where(theta_out >= math.pi, theta_out - 2.0 * math.pi, theta_out)
    # atan2(0, 0) = 0 already matches the pole convention
    phi_out = np.arcsin(np.clip((uu - vv) / s, -1.0, 1.0))
    return theta_out, phi_out


def build_index_map(h: int, w: int, m: MobiusMatrix,
                    threads: int | None = None) -> IndexMap:
    """Transformed spatial index map: per output pixel, where to sample the source.

    The output grid's pixel centers are projected to the sphere, pushed
    through the Mobius transform on the stereographic plane, and re-projected
    to spherical coordinates. Pure function: the fixed row banding makes the
    output bit-identical for every thread count.
    """
    if h < 2 or w < 4:
        raise BadDimsError(f"index map needs h >= 2 and w >= 4, got {h}x{w}")
    theta = np.broadcast_to(pixel_center_longitudes(w)[None, :], (h, w))
    phi = np.broadcast_to(pixel_center_latitudes(h)[:, None], (h, w))
    coords = np.empty((h, w, 2), dtype=np.float64)
    bands = [(r, min(r + 64, h)) for r in range(0, h, 64)]

    def run(band):
        r0, r1 = band
        coords[r0:r1, :, 0], coords[r0:r1, :, 1] = transform_coords(
            theta[r0:r1], phi[r0:r1], m)

    n = 1 if threads is None else max(1, int(threads))
    if n <= 1 or len(bands) <= 1:
        for band in bands:
            run(band)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n) as pool:
            list(pool.map(run, bands))
    return IndexMap(h, w, coords)
