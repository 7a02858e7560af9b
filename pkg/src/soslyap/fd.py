"""Finite-difference oracle for the PDE on (0,1)^2.

Independent numerical check of the certified bounds: second-order central
stencils on a uniform interior grid (boundary values are identically zero
and never stored), implicit Euler (default) or Crank-Nicolson in time with
a single sparse factorization, the trapezoid-weighted L2 norm sampled
along the trajectory, and a least-squares decay-rate estimate on the tail
of the log-norm series.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class FdError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 128               # interior nodes per axis
    dt: float = 1e-4
    t_final: float = 1.0
    scheme: str = "implicit-euler"  # or "crank-nicolson"
    sample_stride: int = 10    # record the norm every this many steps

    def __post_init__(self):
        if self.n < 8:
            raise FdError("grid needs n >= 8 interior nodes per axis")
        if self.dt <= 0 or self.t_final <= 0:
            raise FdError("dt and t_final must be positive")
        if self.scheme not in ("implicit-euler", "crank-nicolson"):
            raise FdError("unknown scheme %r" % self.scheme)
        if self.sample_stride < 1:
            raise FdError("sample_stride must be >= 1")


@dataclass
class SimResult:
    times: np.ndarray
    norms: np.ndarray
    config: SimConfig
    blew_up: bool = False
    final_state: np.ndarray = None
    snapshots: list = field(default_factory=list)  # (t, state) pairs

    def series(self):
        return list(zip(self.times.tolist(), self.norms.tolist()))


def interior_nodes(n):
    """Coordinates of the n interior nodes per axis: x = (i+1)/(n+1)."""
    return np.arange(1, n + 1) / (n + 1.0)


def build_operator(model, n):
    """Sparse spatial operator L with (L u)_ij ~ a u_x1x1 + b u_x1x2 +
    c u_x2x2 + d u_x1 + e u_x2 + f u at the interior nodes.

    Interior values are vectorized row-major with axis 0 = x1, so the
    stencils are Kronecker products of 1-D difference matrices; the
    cross derivative uses the 4-corner centered stencil.
    """
    h = 1.0 / (n + 1)
    eye = sp.identity(n, format="csr")
    d2 = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n),
                  format="csr") / (h * h)
    d1 = sp.diags([-1.0, 1.0], [-1, 1], shape=(n, n),
                  format="csr") / (2.0 * h)
    xs = interior_nodes(n)
    x1 = xs[:, None]
    x2 = xs[None, :]

    def coeff_diag(p):
        return sp.diags(np.broadcast_to(p(x1, x2), (n, n)).ravel())

    op = sp.csr_matrix((n * n, n * n))
    terms = ((model.a, sp.kron(d2, eye)),
             (model.b, sp.kron(d1, d1)),
             (model.c, sp.kron(eye, d2)),
             (model.d, sp.kron(d1, eye)),
             (model.e, sp.kron(eye, d1)),
             (model.f, sp.identity(n * n)))
    for p, stencil in terms:
        if not p.is_zero():
            op = op + coeff_diag(p) @ sp.csr_matrix(stencil)
    return op.tocsc()


def apply_operator(model, u_interior):
    """du/dt = L u for a square interior grid; returns the same shape."""
    u_interior = np.asarray(u_interior, dtype=float)
    n = u_interior.shape[0]
    op = build_operator(model, n)
    return (op @ u_interior.ravel()).reshape(n, n)


def l2_norm(u_interior, n=None):
    """Trapezoid L2 norm; exact for fields vanishing on the boundary."""
    u = np.asarray(u_interior, dtype=float).ravel()
    if n is None:
        n = int(round(np.sqrt(u.size)))
    h = 1.0 / (n + 1)
    return float(np.linalg.norm(u)) * h


def simulate(model, u0, cfg=None, keep_snapshots=0):
    """March the PDE and sample the L2 norm.

    Blow-up (non-finite values) terminates the march and is reported on
    the result, not raised: growth is a legitimate outcome.  If
    keep_snapshots > 0, that many (t, state) pairs are retained at evenly
    spaced sample times.
    """
    cfg = cfg or SimConfig()
    n = cfg.n
    u = u0.sample(n).astype(float).ravel()
    op = build_operator(model, n)
    ident = sp.identity(n * n, format="csc")
    if cfg.scheme == "implicit-euler":
        lhs = ident - cfg.dt * op
        rhs_mat = None
    else:
        lhs = ident - 0.5 * cfg.dt * op
        rhs_mat = (ident + 0.5 * cfg.dt * op).tocsr()
    try:
        lu = spla.splu(lhs.tocsc())
    except RuntimeError as err:
        raise FdError("implicit step factorization failed: %s" % err) from err

    steps = int(round(cfg.t_final / cfg.dt))
    times = [0.0]
    norms = [l2_norm(u, n)]
    snaps = [(0.0, u.reshape(n, n).copy())] if keep_snapshots else []
    blew_up = False
    n_samples = steps // cfg.sample_stride
    snap_every = max(1, n_samples // keep_snapshots) if keep_snapshots else 0
    sample_count = 0
    for k in range(1, steps + 1):
        rhs = u if rhs_mat is None else rhs_mat @ u
        u = lu.solve(rhs)
        if k % cfg.sample_stride == 0 or k == steps:
            t = k * cfg.dt
            if not np.all(np.isfinite(u)):
                blew_up = True
                break
            times.append(t)
            norms.append(l2_norm(u, n))
            sample_count += 1
            if keep_snapshots and sample_count % snap_every == 0 \
                    and len(snaps) < keep_snapshots + 1:
                snaps.append((t, u.reshape(n, n).copy()))
    return SimResult(times=np.asarray(times), norms=np.asarray(norms),
                     config=cfg, blew_up=blew_up,
                     final_state=u.reshape(n, n), snapshots=snaps)


def estimate_decay_rate(series, window=0.5):
    """Least-squares slope of -ln(norm) versus t over the tail window.

    Positive return value = decay; negative = growth.  `series` is an
    iterable of (t, norm) pairs or a SimResult.
    """
    if isinstance(series, SimResult):
        pairs = list(zip(series.times, series.norms))
    else:
        pairs = list(series)
    if not 0 < window <= 1:
        raise FdError("window must be a fraction in (0, 1]")
    start = int(len(pairs) * (1.0 - window))
    tail = pairs[start:]
    if len(tail) < 10:
        raise FdError("need at least 10 samples in the tail window, got %d"
                      % len(tail))
    t = np.array([p[0] for p in tail], dtype=float)
    v = np.array([p[1] for p in tail], dtype=float)
    if np.any(v <= 0):
        raise FdError("non-positive norms in the fit window")
    slope = np.polyfit(t, np.log(v), 1)[0]
    return -float(slope)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def write_norms_csv(result, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "norm"])
        for t, v in zip(result.times, result.norms):
            w.writerow([repr(float(t)), repr(float(v))])


def write_checkpoint(path, u_interior):
    """Binary checkpoint: little-endian uint32 n, then n*n float64 node
    values row-major."""
    u = np.asarray(u_interior, dtype=float)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise FdError("checkpoint wants a square interior grid")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", u.shape[0]))
        fh.write(u.astype("<f8").tobytes(order="C"))


def read_checkpoint(path):
    with open(path, "rb") as fh:
        raw = fh.read(4)
        if len(raw) != 4:
            raise FdError("truncated checkpoint header")
        n = struct.unpack("<I", raw)[0]
        body = fh.read(8 * n * n)
        if len(body) != 8 * n * n:
            raise FdError("truncated checkpoint body")
        return np.frombuffer(body, dtype="<f8").reshape(n, n).copy()
