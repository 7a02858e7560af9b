"""Second-order linear parabolic PDE on the open unit square.

    u_t = a*u_x1x1 + b*u_x1x2 + c*u_x2x2 + d*u_x1 + e*u_x2 + f*u

with polynomial coefficients and zero Dirichlet boundary conditions.
Model files are flat "key = expression" text, keys a,b,c,d,e,f,u0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .poly import (Polynomial, ParseError, format_polynomial,
                   parse_polynomial)

COEFF_KEYS = ("a", "b", "c", "d", "e", "f")
BOUNDARY_TOL = 1e-9


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class ParabolicPde2D:
    """Coefficient polynomials of the PDE; domain fixed to (0,1)^2."""

    a: Polynomial = field(default_factory=Polynomial.zero)
    b: Polynomial = field(default_factory=Polynomial.zero)
    c: Polynomial = field(default_factory=Polynomial.zero)
    d: Polynomial = field(default_factory=Polynomial.zero)
    e: Polynomial = field(default_factory=Polynomial.zero)
    f: Polynomial = field(default_factory=Polynomial.zero)

    def coefficients(self):
        return {k: getattr(self, k) for k in COEFF_KEYS}

    def max_coeff_degree(self):
        return max((getattr(self, k).degree() for k in COEFF_KEYS), default=-1)

    def is_zero(self):
        return all(getattr(self, k).is_zero() for k in COEFF_KEYS)


class InitialCondition:
    """Initial state: a polynomial in (x1,x2) or sampled interior values.

    Polynomial initial data must vanish on the boundary of the square
    (checked at 4*101 boundary sample points, tolerance 1e-9).
    """

    def __init__(self, poly=None, grid=None):
        if (poly is None) == (grid is None):
            raise ModelError("give exactly one of poly= or grid=")
        self.poly = poly
        self.grid = None if grid is None else np.asarray(grid, dtype=float)
        if self.poly is not None:
            self._check_boundary()
        if self.grid is not None and (self.grid.ndim != 2
                                      or self.grid.shape[0] != self.grid.shape[1]):
            raise ModelError("sampled initial condition must be a square grid")

    def _check_boundary(self):
        t = np.linspace(0.0, 1.0, 101)
        zeros = np.zeros_like(t)
        worst = 0.0
        for x1, x2 in ((t, zeros), (t, zeros + 1.0), (zeros, t), (zeros + 1.0, t)):
            worst = max(worst, float(np.max(np.abs(self.poly(x1, x2)))))
        if worst > BOUNDARY_TOL:
            raise ModelError(
                "initial condition violates zero Dirichlet boundary "
                "(max |u0| on boundary = %.3g)" % worst)

    def sample(self, n):
        """Values at the n x n interior nodes x = (i+1)/(n+1)."""
        if self.grid is not None:
            if self.grid.shape[0] != n:
                raise ModelError("sampled initial condition has %d nodes per "
                                 "axis, simulation wants %d"
                                 % (self.grid.shape[0], n))
            return self.grid.copy()
        xs = np.arange(1, n + 1) / (n + 1.0)
        return self.poly(xs[:, None], xs[None, :])


def kiss_model(h, r):
    """Population-growth diffusion model u_t = h*(u_x1x1 + u_x2x2) + r*u."""
    if h <= 0 or r < 0:
        raise ModelError("kiss_model requires h > 0 and r >= 0")
    return ParabolicPde2D(a=Polynomial.constant(h),
                          c=Polynomial.constant(h),
                          f=Polynomial.constant(r))


def default_bump_u0(scale=1e3):
    """The polynomial bump 10^3 * x1*x2*(1-x1)*(1-x2)."""
    bump = parse_polynomial("x1*x2*(1-x1)*(1-x2)") * scale
    return InitialCondition(poly=bump)


def load_model(path):
    """Read a model file; returns (ParabolicPde2D, InitialCondition or None).

    Missing coefficient keys default to the zero polynomial.
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ModelError("%s:%d: expected 'key = expression'"
                                 % (path, lineno))
            key, expr = line.split("=", 1)
            key = key.strip()
            if key not in COEFF_KEYS + ("u0",):
                raise ModelError("%s:%d: unknown key %r" % (path, lineno, key))
            if key in entries:
                raise ModelError("%s:%d: duplicate key %r" % (path, lineno, key))
            try:
                entries[key] = parse_polynomial(expr.strip())
            except ParseError as err:
                raise ModelError("%s:%d: %s" % (path, lineno, err)) from err
    model = ParabolicPde2D(**{k: entries.get(k, Polynomial.zero())
                              for k in COEFF_KEYS})
    u0 = None
    if "u0" in entries:
        u0 = InitialCondition(poly=entries["u0"])
    return model, u0


def save_model(model, path, u0=None):
    """Write a model back out in the load_model format."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in COEFF_KEYS:
            p = getattr(model, key)
            if not p.is_zero():
                fh.write("%s = %s\n" % (key, format_polynomial(p)))
        if u0 is not None and u0.poly is not None:
            fh.write("u0 = %s\n" % format_polynomial(u0.poly))
