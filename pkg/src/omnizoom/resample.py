"""Spherical and planar resampling of ERP images over a transformed index map.

The spherical kernel interpolates along great-circle arcs: for each query it
picks the four bracketing source pixels, slides the two row pairs along
their arcs onto the query's meridian plane (closed-form great-circle /
meridian-plane intersection), then interpolates between those two points
along their shared meridian. All weights are Slerp weights with an exact
linear fallback below the degenerate-angle threshold.

Polar caps: above the first source row (or below the last) the missing row
is the same extreme row continued across the pole, i.e. with longitudes
shifted by pi.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadDimsError, DegenerateArcError, NoCrossingError
from .geometry import (
    IndexMap,
    SphericalCoord,
    SpherePoint,
    sp,
)
from .image import ErpImage

DEGENERATE_ANGLE = 1e-7
BICUBIC_A = -0.5
BAND_ROWS = 64


class ResampleKernel(Enum):
    SPHERICAL = "spherical"
    NEAREST = "nearest"
    PLANAR_BILINEAR = "planar_bilinear"
    PLANAR_BICUBIC = "planar_bicubic"

    @classmethod
    def from_name(cls, name: str) -> "ResampleKernel":
        aliases = {"bilinear": "planar_bilinear", "bicubic": "planar_bicubic"}
        key = aliases.get(name.lower(), name.lower())
        for k in cls:
            if k.value == key:
                return k
        raise ValueError(f"unknown kernel {name!r}")


def resolve_threads(threads: int | None) -> int:
    """Explicit argument, else OMNIZOOM_THREADS, else single-threaded."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("OMNIZOOM_THREADS")
    return max(1, int(env)) if env else 1


# ---------------------------------------------------------------------------
# Scalar surface


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    c = np.cross(a, b)
    return math.atan2(float(np.linalg.norm(c)), float(np.dot(a, b)))


def slerp(a: SpherePoint, b: SpherePoint, t: float) -> SpherePoint:
    """Constant-angular-speed interpolation along the great circle from a to b."""
    av, bv = a.as_array(), b.as_array()
    beta = _angle(av, bv)
    if beta < DEGENERATE_ANGLE or beta > math.pi - DEGENERATE_ANGLE:
        raise DegenerateArcError(f"arc angle {beta} outside usable range")
    sb = math.sin(beta)
    out = (math.sin((1.0 - t) * beta) / sb) * av + (math.sin(t * beta) / sb) * bv
    return SpherePoint.from_vector(out)


def meridian_cross(pa: SpherePoint, pb: SpherePoint,
                   theta_q: float) -> tuple[SpherePoint, float]:
    """Point where the minor arc pa->pb meets the meridian plane of theta_q.

    Closed form: intersect the arc's great circle with the meridian plane
    (normal (-sin theta_q, cos theta_q, 0)) and pick the sign that lies on
    the minor arc. Returns (point, t) with t the arc fraction from pa,
    clamped to [0, 1].
    """
    av, bv = pa.as_array(), pb.as_array()
    alpha = _angle(av, bv)
    if alpha < DEGENERATE_ANGLE or alpha > math.pi - DEGENERATE_ANGLE:
        raise DegenerateArcError(f"arc angle {alpha} outside usable range")
    n = np.cross(av, bv)
    m = np.array([-math.sin(theta_q), math.cos(theta_q), 0.0])
    d = np.cross(n, m)
    dn = float(np.linalg.norm(d))
    if dn < 1e-12:
        raise NoCrossingError("arc lies in the meridian plane")
    d /= dn
    for cand in (d, -d):
        if abs(_angle(av, cand) + _angle(cand, bv) - alpha) <= 1e-9:
            t = min(max(_angle(av, cand) / alpha, 0.0), 1.0)
            return SpherePoint.from_vector(cand), t
    raise NoCrossingError(f"arc does not cross meridian {theta_q}")


@dataclass(frozen=True)
class ResampleStencil:
    """Four-corner interpolation stencil for one spherical query.

    Corners keep the layout theta0 = theta3, theta1 = theta2 (left/right)
    and phi0 = phi1, phi2 = phi3 (top/bottom). corner_cols brackets the
    query longitude; when a polar cap is active (pole_cap set) the
    continued pair reads from cap_cols instead.
    """

    corner_rows: tuple[int, int]
    corner_cols: tuple[int, int]
    p0: SpherePoint
    p1: SpherePoint
    p2: SpherePoint
    p3: SpherePoint
    alpha01: float
    alpha23: float
    omega: float
    t01: float
    t23: float
    tq: float
    pole_cap: str | None = None
    cap_cols: tuple[int, int] | None = None

    def __post_init__(self):
        for name in ("t01", "t23", "tq"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1]")
        for name in ("alpha01", "alpha23", "omega"):
            v = getattr(self, name)
            if not 0.0 <= v < math.pi:
                raise ValueError(f"{name} = {v} outside [0, pi)")

    def corner_indices(self) -> tuple[tuple[int, int], ...]:
        """(row, col) source indices for p0, p1, p2, p3."""
        top_cols = self.cap_cols if self.pole_cap == "north" else self.corner_cols
        bot_cols = self.cap_cols if self.pole_cap == "south" else self.corner_cols
        rt, rb = self.corner_rows
        return ((rt, top_cols[0]), (rt, top_cols[1]),
                (rb, bot_cols[1]), (rb, bot_cols[0]))


def make_stencil(height: int, width: int, q: SphericalCoord) -> ResampleStencil:
    """Build the spherical interpolation stencil of a query on an H x W grid."""
    if height < 2 or width < 4:
        raise BadDimsError(f"source grid needs h >= 2 and w >= 4, got {height}x{width}")
    dth = 2.0 * math.pi / width
    dph = math.pi / height

    jf = (q.theta + math.pi) / dth - 0.5
    j0 = math.floor(jf)
    fi = (math.pi / 2 - q.phi) / dph - 0.5
    i0 = math.floor(fi)
    north = i0 < 0
    south = i0 + 1 > height - 1
    row_top = 0 if north else i0
    row_bot = height - 1 if south else i0 + 1

    half = math.pi / dth  # half a turn, in columns
    jf_top = jf + half if north else jf
    jf_bot = jf + half if south else jf
    jt0 = math.floor(jf_top)
    jb0 = math.floor(jf_bot)

    def lon(j):
        return -math.pi + (j + 0.5) * dth

    lat_top = math.pi / 2 - (row_top + 0.5) * dph
    lat_bot = math.pi / 2 - (row_bot + 0.5) * dph
    p0 = sp(SphericalCoord(lon(jt0), lat_top))
    p1 = sp(SphericalCoord(lon(jt0 + 1), lat_top))
    p3 = sp(SphericalCoord(lon(jb0), lat_bot))
    p2 = sp(SphericalCoord(lon(jb0 + 1), lat_bot))

    def pair_cross(pa, pb, frac):
        try:
            point, t = meridian_cross(pa, pb, q.theta)
        except DegenerateArcError:
            point, t = pa, min(max(frac, 0.0), 1.0)
        return point, t

    p01, t01 = pair_cross(p0, p1, jf_top - jt0)
    p23, t23 = pair_cross(p3, p2, jf_bot - jb0)

    alpha01 = _angle(p0.as_array(), p1.as_array())
    alpha23 = _angle(p3.as_array(), p2.as_array())
    omega = _angle(p01.as_array(), p23.as_array())
    if omega < DEGENERATE_ANGLE:
        tq = min(max(fi - i0, 0.0), 1.0)
    else:
        # signed parameter along the p01 -> p23 arc, clamped at the cell edges
        av, bv, qv = p01.as_array(), p23.as_array(), sp(q).as_array()
        axis = np.cross(av, bv)
        sin_q = float(np.dot(np.cross(av, qv), axis)) / max(float(np.linalg.norm(axis)), 1e-300)
        a_q = math.atan2(sin_q, float(np.dot(av, qv)))
        tq = min(max(a_q / omega, 0.0), 1.0)

    cap = "north" if north else ("south" if south else None)
    cap_pair = (jt0, jt0 + 1) if north else ((jb0, jb0 + 1) if south else None)
    return ResampleStencil(
        corner_rows=(row_top, row_bot),
        corner_cols=(j0 % width, (j0 + 1) % width),
        p0=p0, p1=p1, p2=p2, p3=p3,
        alpha01=alpha01, alpha23=alpha23, omega=omega,
        t01=t01, t23=t23, tq=tq,
        pole_cap=cap,
        cap_cols=None if cap_pair is None else (cap_pair[0] % width, cap_pair[1] % width),
    )


# ---------------------------------------------------------------------------
# Vectorized kernels


def _slerp_weights(t, alpha):
    """Slerp pair weights, normalized to a weighted average.

    The raw pair sin((1-t)a)/sin(a), sin(t*a)/sin(a) sums to
    cos((0.5-t)a)/cos(a/2) > 1 strictly between the endpoints, so it is
    divided by its sum to make the scheme convex and constant-preserving.
    Below the degenerate-angle threshold the exact linear limit is used.
    """
    lin = alpha < DEGENERATE_ANGLE
    safe = np.where(lin, 1.0, alpha)
    wa = np.where(lin, 1.0 - t, np.sin((1.0 - t) * safe))
    wb = np.where(lin, t, np.sin(t * safe))
    total = wa + wb
    return wa / total, wb / total


class _RowTables:
    """Per-source-row quantities reused across every query, packed so one
    fancy-index gather fetches all six columns."""

    def __init__(self, hs: int, ws: int):
        dth = 2.0 * math.pi / ws
        lat = math.pi / 2 - math.pi * (np.arange(hs) + 0.5) / hs
        cos = np.cos(lat)
        # alpha: angle between horizontally adjacent pixels at each latitude
        alpha = 2.0 * np.arcsin(cos * math.sin(dth / 2.0))
        self.packed = np.column_stack([
            cos, np.sin(lat), np.tan(lat), alpha, np.cos(alpha), np.sin(alpha),
        ])


def _pair_crossing(rows, frac, dth, tables: _RowTables):
    """Crossing of a same-latitude pixel pair's arc with the query meridian.

    Solves p . (pA x pB) = 0 symbolically for the pair at latitude phi and
    longitude offset delta = frac * dth from the left pixel:
        tan(lambda) = tan(phi) * (sin(delta) + sin(dth - delta)) / sin(dth)
    Returns the crossing latitude lambda and the signed, clamped arc
    fraction t from the left pixel (pure-longitude fraction when the pair
    angle is degenerate).
    """
    sin_dth = math.sin(dth)
    cos_dth = math.cos(dth)
    delta = frac * dth
    sind = np.sin(delta)
    cosd = np.cos(delta)
    sin_rest = sin_dth * cosd - cos_dth * sind  # sin(dth - delta)

    row = tables.packed[rows]
    cos_phi, sin_phi, tan_phi = row[..., 0], row[..., 1], row[..., 2]
    alpha, cos_alpha, sin_alpha = row[..., 3], row[..., 4], row[..., 5]

    big_t = tan_phi * ((sind + sin_rest) / sin_dth)
    inv = 1.0 / np.sqrt(1.0 + big_t * big_t)
    cos_lam = inv
    sin_lam = big_t * inv
    lam = np.arctan(big_t)

    # arc parameter via the in-plane frame at pA: s = atan2(w.p01, pA.p01)
    cos_db = cosd * cos_dth + sind * sin_dth  # cos(dth - delta)
    dot_a = cos_phi * cos_lam * cosd + sin_phi * sin_lam
    dot_b = cos_phi * cos_lam * cos_db + sin_phi * sin_lam
    s = np.arctan2(dot_b - cos_alpha * dot_a, sin_alpha * dot_a)

    degenerate = alpha < DEGENERATE_ANGLE
    t = np.where(degenerate, frac, s / np.maximum(alpha, 1e-300))
    return lam, alpha, np.clip(t, 0.0, 1.0)


def _spherical_block(src: np.ndarray, theta_q: np.ndarray, phi_q: np.ndarray,
                     tables: _RowTables) -> np.ndarray:
    hs, ws = src.shape[0], src.shape[1]
    dth = 2.0 * math.pi / ws
    dph = math.pi / hs

    jf = (theta_q + math.pi) / dth - 0.5
    fi = (math.pi / 2 - phi_q) / dph - 0.5
    i0 = np.floor(fi).astype(np.int64)
    north = i0 < 0
    south = i0 + 1 > hs - 1
    row_top = np.where(north, 0, i0)
    row_bot = np.where(south, hs - 1, i0 + 1)

    half = math.pi / dth
    jf_top = np.where(north, jf + half, jf)
    jf_bot = np.where(south, jf + half, jf)
    jt0 = np.floor(jf_top).astype(np.int64)
    jb0 = np.floor(jf_bot).astype(np.int64)

    lam01, alpha01, t01 = _pair_crossing(row_top, jf_top - jt0, dth, tables)
    lam23, alpha23, t23 = _pair_crossing(row_bot, jf_bot - jb0, dth, tables)

    # p01, p23 and q share the query meridian plane, so the vertical step
    # reduces to positions along that circle: latitude, continued past the
    # pole as pi - lam (north) / -pi - lam (south) for the shifted pair.
    psi01 = np.where(north, math.pi - lam01, lam01)
    psi23 = np.where(south, -math.pi - lam23, lam23)
    omega = psi01 - psi23
    tq = np.where(omega < DEGENERATE_ANGLE,
                  np.clip(fi - i0, 0.0, 1.0),
                  (psi01 - phi_q) / np.maximum(omega, 1e-300))
    tq = np.clip(tq, 0.0, 1.0)

    w0, w1 = _slerp_weights(t01, alpha01)
    w3, w2 = _slerp_weights(t23, alpha23)
    wv0, wv1 = _slerp_weights(tq, omega)

    jt0m, jt1m = np.mod(jt0, ws), np.mod(jt0 + 1, ws)
    jb0m, jb1m = np.mod(jb0, ws), np.mod(jb0 + 1, ws)
    # fold the two interpolation stages into one set of corner weights
    out = (wv0 * w0)[..., None] * src[row_top, jt0m]
    out += (wv0 * w1)[..., None] * src[row_top, jt1m]
    out += (wv1 * w3)[..., None] * src[row_bot, jb0m]
    out += (wv1 * w2)[..., None] * src[row_bot, jb1m]
    return np.clip(out, 0.0, 1.0, out=out)


def _fractional_coords(theta_q, phi_q, hs, ws):
    dth = 2.0 * math.pi / ws
    dph = math.pi / hs
    colf = (theta_q + math.pi) / dth - 0.5
    rowf = (math.pi / 2 - phi_q) / dph - 0.5
    return rowf, colf


def _nearest_block(src, theta_q, phi_q, _tables=None):
    hs, ws = src.shape[0], src.shape[1]
    rowf, colf = _fractional_coords(theta_q, phi_q, hs, ws)
    j = np.mod(np.floor(colf + 0.5).astype(np.int64), ws)
    i = np.clip(np.floor(rowf + 0.5).astype(np.int64), 0, hs - 1)
    return src[i, j]


def _bilinear_block(src, theta_q, phi_q, _tables=None):
    hs, ws = src.shape[0], src.shape[1]
    rowf, colf = _fractional_coords(theta_q, phi_q, hs, ws)
    j0 = np.floor(colf).astype(np.int64)
    i0 = np.floor(rowf).astype(np.int64)
    fx = (colf - j0)[..., None]
    fy = (rowf - i0)[..., None]
    j0m, j1m = np.mod(j0, ws), np.mod(j0 + 1, ws)
    i0c = np.clip(i0, 0, hs - 1)
    i1c = np.clip(i0 + 1, 0, hs - 1)
    top = (1.0 - fx) * src[i0c, j0m] + fx * src[i0c, j1m]
    bot = (1.0 - fx) * src[i1c, j0m] + fx * src[i1c, j1m]
    return (1.0 - fy) * top + fy * bot


def _keys_weights(frac):
    """Four Keys cubic-kernel weights (a = -0.5) for taps at offsets -1..2."""
    a = BICUBIC_A
    d = [frac + 1.0, frac, 1.0 - frac, 2.0 - frac]
    w_near = [(a + 2.0) * dd ** 3 - (a + 3.0) * dd ** 2 + 1.0 for dd in (d[1], d[2])]
    w_far = [a * dd ** 3 - 5.0 * a * dd ** 2 + 8.0 * a * dd - 4.0 * a for dd in (d[0], d[3])]
    return [w_far[0], w_near[0], w_near[1], w_far[1]]


def bicubic_grid_sample(src: np.ndarray, rowf: np.ndarray, colf: np.ndarray) -> np.ndarray:
    """Bicubic sampling at fractional grid coordinates; wrap columns, clamp rows."""
    hs, ws = src.shape[0], src.shape[1]
    j0 = np.floor(colf).astype(np.int64)
    i0 = np.floor(rowf).astype(np.int64)
    wx = _keys_weights(colf - j0)
    wy = _keys_weights(rowf - i0)
    out = np.zeros(rowf.shape + (src.shape[2],), dtype=np.float64)
    for di in range(4):
        i = np.clip(i0 + di - 1, 0, hs - 1)
        row_acc = np.zeros_like(out)
        for dj in range(4):
            j = np.mod(j0 + dj - 1, ws)
            row_acc += wx[dj][..., None] * src[i, j]
        out += wy[di][..., None] * row_acc
    return np.clip(out, 0.0, 1.0)


def _bicubic_block(src, theta_q, phi_q, _tables=None):
    rowf, colf = _fractional_coords(theta_q, phi_q, src.shape[0], src.shape[1])
    return bicubic_grid_sample(src, rowf, colf)


_BLOCK_FNS = {
    ResampleKernel.SPHERICAL: _spherical_block,
    ResampleKernel.NEAREST: _nearest_block,
    ResampleKernel.PLANAR_BILINEAR: _bilinear_block,
    ResampleKernel.PLANAR_BICUBIC: _bicubic_block,
}


def resample(src: ErpImage, y: IndexMap, kernel: ResampleKernel,
             threads: int | None = None) -> ErpImage:
    """Sample `src` at the spherical locations of index map `y`.

    Output dims follow the index map. Work is split into fixed 64-row bands;
    the band partition is independent of the thread count, so results are
    bit-identical for any number of workers.
    """
    if src.height < 2 or src.width < 4:
        raise BadDimsError(f"source needs h >= 2 and w >= 4, got {src.height}x{src.width}")
    arr = src.samples
    theta_q = y.coords[..., 0]
    phi_q = y.coords[..., 1]

    tables = _RowTables(arr.shape[0], arr.shape[1]) if kernel is ResampleKernel.SPHERICAL else None
    block = _BLOCK_FNS[kernel]
    out = np.empty((y.height, y.width, src.channels), dtype=np.float64)
    bands = [(r, min(r + BAND_ROWS, y.height)) for r in range(0, y.height, BAND_ROWS)]

    def run(band):
        r0, r1 = band
        out[r0:r1] = block(arr, theta_q[r0:r1], phi_q[r0:r1], tables)

    n_threads = resolve_threads(threads)
    if n_threads <= 1 or len(bands) <= 1:
        for band in bands:
            run(band)
    else:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            list(pool.map(run, bands))
    return ErpImage(out, allow_any_aspect=True)
