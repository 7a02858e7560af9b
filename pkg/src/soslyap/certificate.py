"""Symbolic construction of the Lyapunov derivative matrices.

For V(u) = int s(x) u(t,x)^2 dx, integration by parts under zero Dirichlet
conditions turns dV/dt into int U^T Q U dx with U = (u, u_x1, u_x2).  Four
spacing matrices (parameterized by free polynomials p1..p4) integrate to
zero against any admissible state and are added to Q to form M.  The decay
test adds gamma*S with S carrying s in its (1,1) slot.

`quadrature_identity_check` validates the symbolic derivation numerically:
it compares int 2*s*u*du dx against int U^T M U dx on a sample grid using
trapezoid quadrature and centered differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly import Polynomial, PolyMatrix3


@dataclass(frozen=True)
class CertificateInputs:
    """Unknowns of the stability/decay test: weight s, spacing p1..p4."""

    s: Polynomial
    p1: Polynomial
    p2: Polynomial
    p3: Polynomial
    p4: Polynomial
    theta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")

    @property
    def spacing(self):
        return (self.p1, self.p2, self.p3, self.p4)


def build_Q(model, s):
    """Derivative matrix before spacing terms."""
    a, b, c = model.a, model.b, model.c
    d, e, f = model.d, model.e, model.f
    q = PolyMatrix3()
    q.set(0, 0, 2.0 * s * f)
    q.set(1, 1, -2.0 * s * a)
    q.set(2, 2, -2.0 * s * c)
    q.set(1, 2, -(s * b))
    q.set(0, 1, s * d - (s * a).diff(1) - 0.5 * (s * b).diff(2))
    q.set(0, 2, s * e - 0.5 * (s * b).diff(1) - (s * c).diff(2))
    return q


def build_spacing(p1, p2, p3, p4):
    """The four matrices whose quadratic form integrates to zero."""
    u1 = PolyMatrix3()
    u1.set(0, 0, p1.diff(1))
    u1.set(0, 1, p1)
    u2 = PolyMatrix3()
    u2.set(0, 0, p2.diff(2))
    u2.set(0, 2, p2)
    u3 = PolyMatrix3()
    u3.set(0, 1, 0.5 * p3.diff(2))
    u3.set(0, 2, -0.5 * p3.diff(1))
    u4 = PolyMatrix3()
    u4.set(0, 1, -0.5 * p4.diff(2))
    u4.set(0, 2, 0.5 * p4.diff(1))
    return u1, u2, u3, u4


def build_M(model, inputs):
    """M = Q(model, s) + sum of the spacing matrices."""
    m = build_Q(model, inputs.s)
    for up in build_spacing(*inputs.spacing):
        m = m + up
    return m


def build_S(s):
    """Matrix form of the functional itself: s in the (1,1) slot."""
    out = PolyMatrix3()
    out.set(0, 0, s)
    return out


# ---------------------------------------------------------------------------
# quadrature identity check
# ---------------------------------------------------------------------------

def _full_grid(u_interior):
    """Embed interior values in the full grid with zero boundary ring."""
    n = u_interior.shape[0]
    full = np.zeros((n + 2, n + 2))
    full[1:-1, 1:-1] = u_interior
    return full


def gradient_on_grid(u_interior):
    """(u_x1, u_x2) at interior nodes; centered, zero Dirichlet ring.

    Axis 0 of the array is x1.
    """
    n = u_interior.shape[0]
    h = 1.0 / (n + 1)
    full = _full_grid(u_interior)
    ux1 = (full[2:, 1:-1] - full[:-2, 1:-1]) / (2.0 * h)
    ux2 = (full[1:-1, 2:] - full[1:-1, :-2]) / (2.0 * h)
    return ux1, ux2


def trapezoid_box(values_interior):
    """Trapezoid integral over [0,1]^2 of a field vanishing on the boundary."""
    n = values_interior.shape[0]
    h = 1.0 / (n + 1)
    return float(values_interior.sum()) * h * h


def quadratic_form_integral(matrix, u_interior):
    """int U^T matrix(x) U dx with U from centered differences of u."""
    n = u_interior.shape[0]
    xs = np.arange(1, n + 1) / (n + 1.0)
    x1 = xs[:, None]
    x2 = xs[None, :]
    ux1, ux2 = gradient_on_grid(u_interior)
    comps = (u_interior, ux1, ux2)
    acc = np.zeros_like(u_interior)
    for i in range(3):
        for j in range(3):
            entry = matrix.get(i, j)
            if entry.is_zero():
                continue
            acc = acc + entry(x1, x2) * comps[i] * comps[j]
    return trapezoid_box(acc)


def quadrature_identity_check(model, inputs, u_interior, du_interior,
                              eps=1e-14):
    """Relative mismatch of dV/dt computed two ways.

    u_interior holds state samples at interior nodes (boundary implicitly
    zero), du_interior the matching time derivative from the PDE stencils.
    Returns |int 2*s*u*du - int U^T M U| / max(|int U^T M U|, eps).
    """
    u_interior = np.asarray(u_interior, dtype=float)
    du_interior = np.asarray(du_interior, dtype=float)
    if u_interior.shape != du_interior.shape:
        raise ValueError("u and du grids must have the same shape")
    n = u_interior.shape[0]
    xs = np.arange(1, n + 1) / (n + 1.0)
    if not np.all(np.isfinite(u_interior)):
        raise ValueError("state grid contains non-finite values")
    m = build_M(model, inputs)
    lhs_field = 2.0 * inputs.s(xs[:, None], xs[None, :]) * u_interior * du_interior
    lhs = trapezoid_box(lhs_field)
    rhs = quadratic_form_integral(m, u_interior)
    return abs(lhs - rhs) / max(abs(rhs), eps)
