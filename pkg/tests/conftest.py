"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np

from omnizoom.geometry import (
    MobiusMatrix,
    SpherePoint,
    canonicalize,
    from_rotation,
    mobius_compose,
)


def rand_unit(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform random unit 3-vector(s)."""
    v = rng.normal(size=(3,) if n is None else (n, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def rand_sphere_point(rng: np.random.Generator) -> SpherePoint:
    return SpherePoint.from_vector(rand_unit(rng))


def rand_canonical_matrix(rng: np.random.Generator) -> MobiusMatrix:
    """Random det-1 matrix with standard-normal complex entries."""
    while True:
        e = rng.normal(size=8)
        a, b = complex(e[0], e[1]), complex(e[2], e[3])
        c, d = complex(e[4], e[5]), complex(e[6], e[7])
        if abs(a * d - b * c) > 1e-6:
            return canonicalize(MobiusMatrix(a, b, c, d))


def rand_bounded_mobius(rng: np.random.Generator,
                        zoom_range: tuple[float, float] = (0.7, 1.5)) -> MobiusMatrix:
    """Random transform with bounded angular distortion: rotation * zoom * rotation."""
    r1 = from_rotation(rand_sphere_point(rng), rng.uniform(-math.pi, math.pi))
    r2 = from_rotation(rand_sphere_point(rng), rng.uniform(-math.pi, math.pi))
    k = rng.uniform(*zoom_range)
    scale = MobiusMatrix(complex(math.sqrt(k)), 0.0, 0.0, complex(1.0 / math.sqrt(k)))
    return canonicalize(mobius_compose(r1, mobius_compose(scale, r2)))


def mobius_close(m1: MobiusMatrix, m2: MobiusMatrix, tol: float = 1e-9) -> bool:
    """Projective equality: canonical representatives match up to global sign."""
    c1 = np.array(canonicalize(m1).to_floats()).reshape(4, 2)
    c2 = np.array(canonicalize(m2).to_floats()).reshape(4, 2)
    return bool(
        np.max(np.abs(c1 - c2)) <= tol or np.max(np.abs(c1 + c2)) <= tol
    )


def homog_close(h1, h2, tol: float = 1e-9) -> bool:
    """Projective equality of plane points: u1*v2 - u2*v1 ~ 0 after scaling."""
    n1 = math.hypot(abs(h1.u), abs(h1.v))
    n2 = math.hypot(abs(h2.u), abs(h2.v))
    return abs(h1.u * h2.v - h2.u * h1.v) <= tol * n1 * n2


def point_close(p: SpherePoint, q, tol: float = 1e-12) -> bool:
    qa = np.asarray([q.x, q.y, q.z]) if isinstance(q, SpherePoint) else np.asarray(q)
    return bool(np.max(np.abs(p.as_array() - qa)) <= tol)
