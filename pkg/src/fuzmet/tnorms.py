"""Continuous t-norms on the unit interval."""

from __future__ import annotations

import enum

import numpy as np

from .verdict import Verdict, Witness, fails, holds

AXIOM_TOL = 1e-12


class DomainError(ValueError):
    pass


class TNorm(enum.Enum):
    PRODUCT = "product"
    MINIMUM = "minimum"
    LUKASIEWICZ = "lukasiewicz"

    @classmethod
    def from_name(cls, name: str) -> "TNorm":
        try:
            return cls(name)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown t-norm {name!r}; expected one of {names}") from None

    def __call__(self, a, b):
        return apply_many(self, a, b)


def apply_many(kind: TNorm, a, b):
    """Vectorised t-norm; no range checks. ``x * 1 == x`` is kept exact."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if kind is TNorm.PRODUCT:
        return a * b
    if kind is TNorm.MINIMUM:
        return np.minimum(a, b)
    # (a + 1) - 1 can round away small a, so pin the identity explicitly
    out = np.maximum(a + b - 1.0, 0.0)
    out = np.where(b == 1.0, a, out)
    return np.where(a == 1.0, b, out)


def apply(kind: TNorm, a: float, b: float) -> float:
    for name, v in (("a", a), ("b", b)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"t-norm argument {name}={v!r} is outside [0, 1]")
    return float(apply_many(kind, a, b))


def check_tnorm_axioms(kind: TNorm, grid_size: int) -> Verdict:
    """Check commutativity, identity, associativity and monotonicity on the
    uniform grid of ``grid_size`` points.

    Monotonicity is checked between grid neighbours in each argument, which
    by transitivity covers every ordered 4-tuple of grid values.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    g = np.arange(grid_size) / (grid_size - 1)
    A, B = np.meshgrid(g, g, indexing="ij")
    T = apply_many(kind, A, B)
    params = {"tnorm": kind.value, "grid_size": grid_size}

    def violation(axiom, idx, points, values):
        return fails(Witness(tuple(int(i) for i in idx), tuple(points), tuple(values),
                             {**params, "axiom": axiom}), f"{axiom} violated")

    if (T < 0).any() or (T > 1).any():
        i, j = np.argwhere((T < 0) | (T > 1))[0]
        return violation("range", (i, j), (g[i], g[j]), (T[i, j],))

    bad = np.abs(T - T.T) > AXIOM_TOL
    if bad.any():
        i, j = np.argwhere(bad)[0]
        return violation("commutativity", (i, j), (g[i], g[j]), (T[i, j], T[j, i]))

    ident = np.abs(T[:, -1] - g) > AXIOM_TOL
    if ident.any():
        i = int(np.argmax(ident))
        return violation("identity", (i,), (g[i], 1.0), (T[i, -1], g[i]))

    # T(T(a,b),c) vs T(a,T(b,c)) over the whole grid cube
    left = apply_many(kind, T[:, :, None], g[None, None, :])
    right = apply_many(kind, g[:, None, None], T[None, :, :])
    bad = np.abs(left - right) > AXIOM_TOL
    if bad.any():
        i, j, k = np.argwhere(bad)[0]
        return violation("associativity", (i, j, k), (g[i], g[j], g[k]),
                         (left[i, j, k], right[i, j, k]))

    for axis in (0, 1):
        dec = np.diff(T, axis=axis) < -AXIOM_TOL
        if dec.any():
            i, j = np.argwhere(dec)[0]
            i2, j2 = (i + 1, j) if axis == 0 else (i, j + 1)
            return violation("monotonicity", (i, j, i2, j2),
                             (g[i], g[j], g[i2], g[j2]), (T[i, j], T[i2, j2]))

    max_assoc = float(np.max(np.abs(left - right)))
    return holds(Witness((grid_size,), (), (max_assoc,), params),
                 "t-norm axioms hold on grid")
