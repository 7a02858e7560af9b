"""Block-diagonal semidefinite programming.

Instances are in primal standard form with free scalar variables:

    maximize    sum_b <C_b, X_b> + c'u
    subject to  sum_b <A_ib, X_b> + B_i u = b_i,   i = 1..m
                X_b >= 0 (psd blocks, or nonnegative diagonal blocks)
                u free

solved by a primal-dual path-following method (Mehrotra-style predictor-
corrector with the Nesterov-Todd scaling; the Schur complement and the
free-variable block are factored together as one augmented system).
The dual is  min b'y  s.t.  sum_i y_i A_ib - C_b = Z_b >= 0,  B'y = c.

SDPA sparse (.dat-s) export/import is provided for exchanging instances
with external solvers; free variables are split into differences of
nonnegative scalars on export.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp


class SdpError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    kind: str  # 'psd' or 'diag'
    size: int

    def __post_init__(self):
        if self.kind not in ("psd", "diag"):
            raise SdpError("unknown block kind %r" % self.kind)
        if self.size < 1:
            raise SdpError("block size must be >= 1")


class SdpInstance:
    """Immutable SDP data.  Constraint matrices are stored per block as a
    CSR matrix of shape (m, size*size) holding the full symmetric matrix
    vectorized row-major."""

    def __init__(self, blocks, A, b, C=None, n_free=0, B=None, c_free=None):
        self.blocks = list(blocks)
        self.b = np.asarray(b, dtype=float)
        m = self.b.size
        if m == 0:
            raise SdpError("constraint list must be nonempty")
        self.m = m
        if len(A) != len(self.blocks):
            raise SdpError("need one constraint matrix stack per block")
        self.A = []
        for blk, Ab in zip(self.blocks, A):
            Ab = sp.csr_matrix(Ab)
            if Ab.shape != (m, blk.size * blk.size):
                raise SdpError("constraint stack shape %s does not match "
                               "block size %d" % (Ab.shape, blk.size))
            self.A.append(Ab)
        self.C = []
        for k, blk in enumerate(self.blocks):
            Cb = None if C is None else C[k]
            if Cb is None:
                Cb = np.zeros((blk.size, blk.size))
            Cb = np.asarray(Cb, dtype=float)
            if not np.allclose(Cb, Cb.T, atol=0):
                raise SdpError("objective block %d is not symmetric" % k)
            self.C.append(Cb)
        self.n_free = int(n_free)
        if self.n_free:
            self.B = sp.csr_matrix(B)
            if self.B.shape != (m, self.n_free):
                raise SdpError("free-variable matrix has shape %s, expected "
                               "(%d, %d)" % (self.B.shape, m, self.n_free))
            self.c_free = np.asarray(c_free, dtype=float)
        else:
            self.B = sp.csr_matrix((m, 0))
            self.c_free = np.zeros(0)
        self._check_symmetry()

    def _check_symmetry(self):
        for blk, Ab in zip(self.blocks, self.A):
            n = blk.size
            if n == 1:
                continue
            # spot check a few rows for symmetry of the vectorized matrices
            for i in range(0, self.m, max(1, self.m // 7)):
                row = Ab.getrow(i).toarray().reshape(n, n)
                if not np.allclose(row, row.T, atol=1e-13 * (1 + abs(row).max())):
                    raise SdpError("constraint %d, block %d not symmetric"
                                   % (i, blk.size))


class InstanceBuilder:
    """Incremental construction of an SdpInstance."""

    def __init__(self, blocks, n_constraints, n_free=0):
        self.blocks = [b if isinstance(b, Block) else Block(*b) for b in blocks]
        self.m = n_constraints
        self.n_free = n_free
        self._entries = [([], [], []) for _ in self.blocks]  # rows, flat, vals
        self._free = ([], [], [])
        self.b = np.zeros(n_constraints)
        self.C = [np.zeros((blk.size, blk.size)) for blk in self.blocks]
        self.c_free = np.zeros(n_free)

    def add_entry(self, constraint, block, i, j, value):
        """Add `value` at (i, j) of the symmetric constraint matrix; the
        mirrored entry is added automatically for i != j."""
        n = self.blocks[block].size
        rows, flat, vals = self._entries[block]
        rows.append(constraint)
        flat.append(i * n + j)
        vals.append(value)
        if i != j:
            rows.append(constraint)
            flat.append(j * n + i)
            vals.append(value)

    def add_free(self, constraint, var, value):
        rows, cols, vals = self._free
        rows.append(constraint)
        cols.append(var)
        vals.append(value)

    def build(self):
        A = []
        for blk, (rows, flat, vals) in zip(self.blocks, self._entries):
            A.append(sp.coo_matrix((vals, (rows, flat)),
                                   shape=(self.m, blk.size * blk.size)).tocsr())
        rows, cols, vals = self._free
        B = sp.coo_matrix((vals, (rows, cols)),
                          shape=(self.m, self.n_free)).tocsr()
        return SdpInstance(self.blocks, A, self.b, C=self.C,
                           n_free=self.n_free, B=B, c_free=self.c_free)


@dataclass
class SolveOptions:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iter: int = 200
    step_frac: float = 0.98
    diverge_limit: float = 1e8
    init_scale: float = None  # starting X = Z = init_scale * I
    verbose: bool = False


@dataclass
class SolveReport:
    status: str  # optimal | infeasible | unbounded | max-iterations | numerical-failure
    primal_obj: float = np.nan
    dual_obj: float = np.nan
    gap: float = np.nan
    iterations: int = 0
    X: list = field(default_factory=list)
    Z: list = field(default_factory=list)
    y: np.ndarray = None
    u: np.ndarray = None
    primal_infeas: float = np.nan
    dual_infeas: float = np.nan
    dual_ray: np.ndarray = None
    dual_ray_residual: float = np.nan
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

class _BlockData:
    """Per-block constraint data in a loop-friendly layout."""

    def __init__(self, block, Ab):
        self.n = block.size
        # private canonical copy: other scipy operations on a shared matrix
        # can reorder indices/data in place, which would silently desync the
        # (row, col, value) triplets cached below
        csr = Ab.tocsr().copy()
        csr.sum_duplicates()
        self.Ab = csr
        self.active = np.flatnonzero(np.diff(csr.indptr))
        self.rows = []
        for i in self.active:
            sl = slice(csr.indptr[i], csr.indptr[i + 1])
            flat = csr.indices[sl].copy()
            self.rows.append((flat // self.n, flat % self.n,
                              csr.data[sl].copy()))


def _sym(mat):
    return 0.5 * (mat + mat.T)


def _max_step(X, dX):
    """Largest alpha with X + alpha*dX psd (X assumed pd)."""
    n = X.shape[0]
    if n == 1:
        x, dx = X[0, 0], dX[0, 0]
        return np.inf if dx >= 0 else -x / dx
    try:
        L = np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return 0.0
    W = sla.solve_triangular(L, dX, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True)
    lam = np.linalg.eigvalsh(_sym(W)).min()
    if lam >= -1e-16:
        return np.inf
    return -1.0 / lam


def solve(instance, options=None):
    """Interior-point solve of an SdpInstance.

    The problem is embedded in the homogeneous self-dual model: a solution
    (X,u,y,Z,tau,kappa) of

        A(X) + B u - b tau          = 0
        A'(y) - C tau - Z           = 0
        B'y - c tau                 = 0
        <C,X> + c'u - b'y - kappa   = 0

    with X,Z psd and tau,kappa >= 0 recovers a primal-dual optimal pair
    when tau > 0 and an infeasibility/unboundedness certificate when
    kappa > 0.  Deterministic: fixed data ordering, no randomization."""
    opt = options or SolveOptions()
    m = instance.m
    nf = instance.n_free

    # row equilibration (copies; the instance is immutable)
    row_norm = np.zeros(m)
    for Ab in instance.A:
        row_norm += np.asarray(Ab.multiply(Ab).sum(axis=1)).ravel()
    row_norm += np.asarray(instance.B.multiply(instance.B).sum(axis=1)).ravel()
    row_norm = np.sqrt(row_norm)
    row_norm[row_norm < 1e-12] = 1.0
    Dr = sp.diags(1.0 / row_norm)
    A = [Dr @ Ab for Ab in instance.A]
    B = (Dr @ instance.B).toarray() if nf else np.zeros((m, 0))
    b = instance.b / row_norm
    C = instance.C
    c = instance.c_free.copy()

    data = [_BlockData(blk, Ab.tocsr()) for blk, Ab in
            zip(instance.blocks, A)]
    sizes = [blk.size for blk in instance.blocks]
    N = sum(sizes)

    eta = opt.init_scale or max(10.0, np.linalg.norm(instance.b),
                                max((np.linalg.norm(Cb) for Cb in C),
                                    default=0.0))
    X = [eta * np.eye(n) for n in sizes]
    Z = [eta * np.eye(n) for n in sizes]
    y = np.zeros(m)
    u = np.zeros(nf)

    norm_b = 1.0 + np.linalg.norm(b)
    norm_C = 1.0 + max((np.linalg.norm(Cb) for Cb in C), default=0.0) \
        + np.linalg.norm(c)

    def a_apply(Xs):
        out = np.zeros(m)
        for dat, Xb in zip(data, Xs):
            out += dat.Ab @ Xb.ravel()
        return out

    def at_apply(vec):
        return [(dat.Ab.T @ vec).reshape(dat.n, dat.n) for dat in data]

    tau = 1.0
    kappa = eta

    def classify_rays(by, cx):
        """Certificate extraction once the homogeneous model drives tau
        to zero: returns 'infeasible' / 'unbounded' / None."""
        if by < 0.0:
            # dual improving ray => primal infeasible
            ray = y / max(1.0, np.linalg.norm(y))
            at_ray = at_apply(ray)
            ray_res = 0.0
            for k in range(len(data)):
                lmin = np.linalg.eigvalsh(_sym(at_ray[k])).min()
                ray_res = max(ray_res, max(0.0, -lmin))
            if nf:
                ray_res = max(ray_res, np.linalg.norm(B.T @ ray))
            report.dual_ray = ray
            report.dual_ray_residual = ray_res
            return "infeasible"
        if cx > 0.0:
            return "unbounded"
        return None

    report = SolveReport(status="max-iterations")
    fail = None
    best = None  # (merit, gap, pinf, dinf, X, Z, y, u) all de-homogenized
    stall = 0
    mu_floor = np.inf
    for it in range(opt.max_iter):
        # homogeneous residuals
        Fp = a_apply(X) + B @ u - b * tau
        AtY = at_apply(y)
        Fd = [AtY[k] - C[k] * tau - Z[k] for k in range(len(data))]
        Ff = B.T @ y - c * tau if nf else np.zeros(0)
        cx = sum(np.tensordot(C[k], X[k]) for k in range(len(data))) \
            + (c @ u if nf else 0.0)
        by = b @ y
        Fg = cx - by - kappa
        mu = (sum(np.tensordot(Xb, Zb) for Xb, Zb in zip(X, Z))
              + tau * kappa) / (N + 1)

        # de-homogenized diagnostics (the iterate divided by tau)
        pobj = cx / tau
        dobj = by / tau
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        pinf = np.linalg.norm(Fp) / (tau * norm_b)
        dinf = (np.sqrt(sum(np.linalg.norm(Fdb) ** 2 for Fdb in Fd)
                        + np.linalg.norm(Ff) ** 2)) / (tau * norm_C)
        report.history.append((pobj, dobj, gap, pinf, dinf, mu))
        if opt.verbose:
            print("it %3d  p %+.8e  d %+.8e  gap %.2e  pinf %.2e  dinf %.2e"
                  "  tau %.2e  kap %.2e"
                  % (it, pobj, dobj, gap, pinf, dinf, tau, kappa))

        merit = max(gap, pinf, dinf)
        if best is None or merit < best[0]:
            best = (merit, gap, pinf, dinf,
                    [Xb / tau for Xb in X], [Zb / tau for Zb in Z],
                    y / tau, u / tau)
            stall = 0
        elif mu < 0.9 * mu_floor:
            # the duality measure is still shrinking; not a stall even if
            # the residual merit is transiently worse
            stall = 0
        else:
            stall += 1
        mu_floor = min(mu_floor, mu)

        if gap <= opt.gap_tol and pinf <= opt.feas_tol and dinf <= opt.feas_tol:
            report.status = "optimal"
            report.iterations = it
            break
        if tau <= 1e-8 * max(1.0, kappa) and kappa > 1e6 * tau:
            # tau -> 0, kappa bounded away: no complementary solution with
            # tau > 0 exists; classify by the sign of the limiting rays
            verdict = classify_rays(by, cx)
            if verdict is not None:
                report.status = verdict
                report.iterations = it
                break
            fail = "homogeneous model degenerate (tau and objective vanish)"
            break
        if stall >= 10:
            # no progress for 10 consecutive iterations; check whether the
            # stalled point is actually an emerging infeasibility ray
            if kappa > 1e4 * tau:
                verdict = classify_rays(by, cx)
                if verdict is not None:
                    report.status = verdict
                    report.iterations = it
                    break
            fail = "progress stalled"
            break

        # Nesterov-Todd scaling: per block W = R R' with W Z W = X; the
        # scaled point lambda = R' Z R = Rinv X Rinv' equals diag(sv)
        try:
            Wnt = []
            Zinv = []
            Rnt = []
            Rinv = []
            lam = []
            for Xb, Zb in zip(X, Z):
                nb = Xb.shape[0]
                if nb == 1:
                    w = np.sqrt(Xb[0, 0] / Zb[0, 0])
                    Wnt.append(np.array([[w]]))
                    Zinv.append(np.array([[1.0 / Zb[0, 0]]]))
                    Rnt.append(np.array([[np.sqrt(w)]]))
                    Rinv.append(np.array([[1.0 / np.sqrt(w)]]))
                    lam.append(np.array([np.sqrt(Xb[0, 0] * Zb[0, 0])]))
                    continue
                Lx = np.linalg.cholesky(Xb)
                Lz = np.linalg.cholesky(Zb)
                _, sv, Vt = np.linalg.svd(Lz.T @ Lx)
                if sv.min() <= 0.0:
                    raise np.linalg.LinAlgError
                R = Lx @ (Vt.T / np.sqrt(sv))
                Ri = (np.sqrt(sv)[:, None] * Vt) @ \
                    sla.solve_triangular(Lx, np.eye(nb), lower=True)
                Wnt.append(R @ R.T)
                Zinv.append(sla.cho_solve((Lz, True), np.eye(nb)))
                Rnt.append(R)
                Rinv.append(Ri)
                lam.append(sv)
        except np.linalg.LinAlgError:
            fail = "iterate lost positive definiteness"
            break

        # Schur complement S_ij = sum_b <A_i, W A_j W>  (symmetric psd)
        S = np.zeros((m, m))
        for k, dat in enumerate(data):
            n = dat.n
            Wk = Wnt[k]
            if len(dat.active) == 0:
                continue
            W = np.empty((len(dat.active), n * n))
            for t, (rr, cc, vv) in enumerate(dat.rows):
                W[t] = (Wk[:, rr] @ (vv[:, None] * Wk[cc, :])).ravel()
            Sk = dat.Ab @ W.T  # (m, active)
            S[:, dat.active] += Sk
        S = _sym(S)

        # augmented system [[S, B], [B', 0]]; LU with partial pivoting is
        # markedly more stable than eliminating the free block through
        # S^-1 once Z approaches the boundary
        dim = m + nf
        K = np.zeros((dim, dim))
        K[:m, :m] = S
        if nf:
            K[:m, m:] = -B
            K[m:, :m] = B.T

        # symmetric Ruiz equilibration: near the boundary of the cone the
        # entries of S spread over ~16 orders of magnitude and partial
        # pivoting alone cannot cope
        dscale = np.ones(dim)
        for _ in range(6):
            Ks = (dscale[:, None] * K) * dscale[None, :]
            rmax = np.abs(Ks).max(axis=1)
            rmax[rmax <= 0.0] = 1.0
            dscale /= np.sqrt(rmax)
        Ks = (dscale[:, None] * K) * dscale[None, :]
        Kld = K.astype(np.longdouble)

        lu = None
        reg = 1e-14  # static regularization (scaled matrix has unit rows)
        for _ in range(8):
            try:
                Kreg = Ks.copy()
                Kreg[np.arange(m), np.arange(m)] += reg
                if nf:
                    Kreg[np.arange(m, dim), np.arange(m, dim)] -= reg
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    lu = sla.lu_factor(Kreg)
                diag = np.abs(np.diag(lu[0]))
                if (not np.all(np.isfinite(lu[0]))
                        or diag.min() <= 1e-14 * max(diag.max(), 1.0)):
                    raise np.linalg.LinAlgError
                break
            except (np.linalg.LinAlgError, ValueError):
                lu = None
                reg *= 100.0
        if lu is None:
            fail = "Schur complement lost positive definiteness"
            break

        def ksolve(rhs):
            """Solve the augmented system with iterative refinement against
            the unregularized matrix; residuals are accumulated in extended
            precision, which keeps refinement contracting up to condition
            numbers around 1e17."""
            rhs_ld = rhs.astype(np.longdouble)
            sol = dscale * sla.lu_solve(lu, dscale * rhs)
            resid = rhs_ld - Kld @ sol.astype(np.longdouble)
            rnorm = float(np.linalg.norm(resid.astype(float)))
            for _ in range(8):
                step = resid.astype(float)
                cand = sol + dscale * sla.lu_solve(lu, dscale * step)
                cresid = rhs_ld - Kld @ cand.astype(np.longdouble)
                cnorm = float(np.linalg.norm(cresid.astype(float)))
                if not np.isfinite(cnorm) or cnorm >= rnorm:
                    break
                sol, resid, rnorm = cand, cresid, cnorm
            return sol

        # the tau column couples through W C W; precompute it once per
        # iteration together with <C, W C W>
        WCW = [Wnt[k] @ C[k] @ Wnt[k] for k in range(len(data))]
        hvec = a_apply(WCW)
        ccc = sum(np.tensordot(C[k], WCW[k]) for k in range(len(data)))
        WFdW = [Wnt[k] @ Fd[k] @ Wnt[k] for k in range(len(data))]
        cWFdW = sum(np.tensordot(C[k], WFdW[k]) for k in range(len(data)))
        rhs2 = np.concatenate([hvec - b, c]) if nf else hvec - b
        sol2 = ksolve(rhs2)
        p2, q2 = sol2[:m], (sol2[m:] if nf else np.zeros(0))
        denom = ccc + kappa / tau - (b + hvec) @ p2 \
            + (c @ q2 if nf else 0.0)
        if not np.isfinite(denom) or denom == 0.0:
            fail = "tau pivot of the homogeneous system lost positivity"
            break

        def hsde_newton(Rc, rct):
            """Newton step of the homogeneous model for complementarity
            targets dX + W dZ W = Rc and tau*dkappa + kappa*dtau = rct.
            The bordered tau column is eliminated via a second solve with
            the same factorization."""
            g1 = Fp.copy()
            for k, dat in enumerate(data):
                g1 += dat.Ab @ (Rc[k] - WFdW[k]).ravel()
            g3 = -Fg - sum(np.tensordot(C[k], Rc[k])
                           for k in range(len(data))) + cWFdW + rct / tau
            rhs1 = np.concatenate([g1, -Ff]) if nf else g1
            sol1 = ksolve(rhs1)
            p1, q1 = sol1[:m], (sol1[m:] if nf else np.zeros(0))
            dtau = (g3 + (b + hvec) @ p1 - (c @ q1 if nf else 0.0)) / denom
            dy = p1 + dtau * p2
            du = q1 + dtau * q2
            at_dy = at_apply(dy)
            dZ = [at_dy[k] - C[k] * dtau + Fd[k] for k in range(len(data))]
            dX = [_sym(Rc[k] - Wnt[k] @ dZ[k] @ Wnt[k])
                  for k in range(len(data))]
            dkappa = (rct - kappa * dtau) / tau
            return dX, dZ, dy, du, dtau, dkappa

        def max_alpha(dX, dZ, dtau, dkappa):
            """Largest single step keeping X, Z, tau, kappa in the cone."""
            a = min((_max_step(X[k], dX[k]) for k in range(len(data))),
                    default=np.inf)
            a = min(a, min((_max_step(Z[k], dZ[k]) for k in range(len(data))),
                           default=np.inf))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # predictor (affine step)
        Rc_aff = [-X[k] for k in range(len(data))]
        dXa, dZa, dya, dua, dta, dka = hsde_newton(Rc_aff, -tau * kappa)
        aa = min(1.0, opt.step_frac * max_alpha(dXa, dZa, dta, dka))
        mu_aff = (sum(np.tensordot(X[k] + aa * dXa[k], Z[k] + aa * dZa[k])
                      for k in range(len(data)))
                  + (tau + aa * dta) * (kappa + aa * dka)) / (N + 1)
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.1

        # corrector: Mehrotra second-order term computed in the scaled
        # space, where the Lyapunov operator of lambda inverts elementwise
        Rc = []
        for k in range(len(data)):
            dXs = Rinv[k] @ dXa[k] @ Rinv[k].T
            dZs = Rnt[k].T @ dZa[k] @ Rnt[k]
            H = 0.5 * (dXs @ dZs + dZs @ dXs)
            H = H * (2.0 / np.add.outer(lam[k], lam[k]))
            Rc.append(sigma * mu * Zinv[k] - X[k]
                      - Rnt[k] @ H @ Rnt[k].T)
        rct = sigma * mu - tau * kappa - dta * dka
        dX, dZ, dy, du, dt, dk = hsde_newton(Rc, rct)
        alpha = min(1.0, opt.step_frac * max_alpha(dX, dZ, dt, dk))
        if alpha < 1e-10:
            fail = "step size collapsed"
            break

        for k in range(len(data)):
            X[k] = _sym(X[k] + alpha * dX[k])
            Z[k] = _sym(Z[k] + alpha * dZ[k])
        y = y + alpha * dy
        if nf:
            u = u + alpha * du
        tau += alpha * dt
        kappa += alpha * dk
        report.iterations = it + 1
    else:
        report.status = "max-iterations"

    if report.status in ("infeasible", "unbounded"):
        # report the raw homogeneous ray point; the certificate itself is
        # in dual_ray / the sign of the objective, not in X or u
        pass
    elif report.status == "optimal" and best is not None \
            and max(report.history[-1][2:5]) > best[0]:
        # terminal iterate is worse than the best seen; keep the best
        _, _, _, _, X, Z, y, u = best
        tau = 1.0
    elif report.status == "optimal":
        X = [Xb / tau for Xb in X]
        Z = [Zb / tau for Zb in Z]
        y = y / tau
        u = u / tau
        tau = 1.0
    elif best is not None:
        # fall back to the best iterate seen; accept it if it is within a
        # small factor of the requested tolerances
        _, bgap, bpinf, bdinf, X, Z, y, u = best
        tau = 1.0
        if bgap <= 50 * opt.gap_tol and bpinf <= 50 * opt.feas_tol \
                and bdinf <= 50 * opt.feas_tol:
            report.status = "optimal"
            fail = None

    if fail is not None:
        report.status = "numerical-failure"
        if opt.verbose:
            print("numerical failure:", fail)

    report.primal_obj = sum(np.tensordot(C[k], X[k]) for k in range(len(data))) \
        + (c @ u if nf else 0.0)
    report.dual_obj = b @ y
    report.gap = abs(report.primal_obj - report.dual_obj) / (
        1.0 + abs(report.primal_obj) + abs(report.dual_obj))
    report.primal_infeas = np.linalg.norm(a_apply(X) + B @ u - b) / norm_b
    at_y = at_apply(y)
    report.dual_infeas = np.sqrt(
        sum(np.linalg.norm(at_y[k] - C[k] - Z[k]) ** 2 for k in range(len(data)))
        + (np.linalg.norm(B.T @ y - c) ** 2 if nf else 0.0)) / norm_C
    report.X = X
    report.Z = Z
    report.y = y / row_norm  # duals for the original (unequilibrated) rows
    report.u = u
    return report


# ---------------------------------------------------------------------------
# SDPA sparse format
# ---------------------------------------------------------------------------

def _fmt(x):
    return repr(float(x))


def export_sdpa(instance, path):
    """Write the instance as an SDPA sparse file (.dat-s).

    The exported problem is the SDPA dual pair whose maximization side is
    exactly this instance: c-vector = b, F_0 = objective, F_i = constraint
    matrices.  Free variables are split u = u+ - u- into one extra diagonal
    block of twice the free-variable count.
    """
    blocks = list(instance.blocks)
    nf = instance.n_free
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%d\n" % instance.m)
        nblocks = len(blocks) + (1 if nf else 0)
        fh.write("%d\n" % nblocks)
        struct = [(-blk.size if blk.kind == "diag" else blk.size)
                  for blk in blocks]
        if nf:
            struct.append(-2 * nf)
        fh.write(" ".join(str(s) for s in struct) + "\n")
        fh.write(" ".join(_fmt(v) for v in instance.b) + "\n")
        # objective F_0
        for k, Cb in enumerate(instance.C):
            n = blocks[k].size
            for i in range(n):
                for j in range(i, n):
                    if Cb[i, j] != 0.0:
                        fh.write("0 %d %d %d %s\n"
                                 % (k + 1, i + 1, j + 1, _fmt(Cb[i, j])))
        if nf:
            kf = len(blocks) + 1
            for j, cj in enumerate(instance.c_free):
                if cj != 0.0:
                    fh.write("0 %d %d %d %s\n" % (kf, j + 1, j + 1, _fmt(cj)))
                    fh.write("0 %d %d %d %s\n"
                             % (kf, nf + j + 1, nf + j + 1, _fmt(-cj)))
        # constraints F_i
        for k, Ab in enumerate(instance.A):
            n = blocks[k].size
            coo = Ab.tocoo()
            for row, flat, val in sorted(zip(coo.row, coo.col, coo.data)):
                i, j = divmod(flat, n)
                if i > j:
                    continue
                fh.write("%d %d %d %d %s\n"
                         % (row + 1, k + 1, i + 1, j + 1, _fmt(val)))
        if nf:
            kf = len(blocks) + 1
            coo = instance.B.tocoo()
            for row, col, val in sorted(zip(coo.row, coo.col, coo.data)):
                fh.write("%d %d %d %d %s\n"
                         % (row + 1, kf, col + 1, col + 1, _fmt(val)))
                fh.write("%d %d %d %d %s\n"
                         % (row + 1, kf, nf + col + 1, nf + col + 1, _fmt(-val)))


def import_sdpa(path):
    """Read an SDPA sparse file into an SdpInstance (no free variables;
    diagonal blocks keep their negative-size marker as kind 'diag')."""
    tokens_lines = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("//")[0].split('"')[0].strip()
            if line.startswith("*") or not line:
                continue
            tokens_lines.append(line)
    if len(tokens_lines) < 4:
        raise SdpError("truncated SDPA file %s" % path)
    m = int(tokens_lines[0].split()[0])
    nblocks = int(tokens_lines[1].split()[0])
    struct = [int(t.strip("{}(),")) for t in tokens_lines[2].replace(",", " ").split()]
    if len(struct) != nblocks:
        raise SdpError("block structure count mismatch in %s" % path)
    b = np.array([float(t.strip("{}(),")) for t in
                  tokens_lines[3].replace(",", " ").split()])
    if b.size != m:
        raise SdpError("c-vector length mismatch in %s" % path)
    blocks = [Block("diag" if s < 0 else "psd", abs(s)) for s in struct]
    builder = InstanceBuilder(blocks, m)
    builder.b = b
    for line in tokens_lines[4:]:
        parts = line.split()
        if len(parts) != 5:
            raise SdpError("malformed entry line %r in %s" % (line, path))
        matno, blkno, i, j, val = (int(parts[0]), int(parts[1]),
                                   int(parts[2]), int(parts[3]),
                                   float(parts[4]))
        if not (1 <= blkno <= nblocks):
            raise SdpError("block number %d out of range in %s" % (blkno, path))
        if matno == 0:
            n = blocks[blkno - 1].size
            builder.C[blkno - 1][i - 1, j - 1] = val
            builder.C[blkno - 1][j - 1, i - 1] = val
        else:
            builder.add_entry(matno - 1, blkno - 1, i - 1, j - 1, val)
    return builder.build()


def write_solution(path, y, X_blocks):
    """Write a solution file: one line of constraint duals y, then block
    entries `blkno i j value` (1-based, upper triangle) of the primal X."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(_fmt(v) for v in y) + "\n")
        for k, Xb in enumerate(X_blocks):
            n = Xb.shape[0]
            for i in range(n):
                for j in range(i, n):
                    if Xb[i, j] != 0.0:
                        fh.write("%d %d %d %s\n"
                                 % (k + 1, i + 1, j + 1, _fmt(Xb[i, j])))


def import_solution(path, instance):
    """Read a solution file written by write_solution (or the external
    solver adapter) for the given exported instance layout.

    Returns (y, X_blocks) where X_blocks follow the exported block
    structure (free-variable split block included if the instance has free
    variables)."""
    blocks = list(instance.blocks)
    if instance.n_free:
        blocks.append(Block("diag", 2 * instance.n_free))
    with open(path, "r", encoding="utf-8") as fh:
        lines = [l.strip() for l in fh if l.strip()]
    if not lines:
        raise SdpError("empty solution file %s" % path)
    try:
        y = np.array([float(t) for t in lines[0].split()])
    except ValueError as err:
        raise SdpError("malformed dual vector in %s: %s" % (path, err))
    if y.size != instance.m:
        raise SdpError("dual vector length %d, expected %d"
                       % (y.size, instance.m))
    X = [np.zeros((blk.size, blk.size)) for blk in blocks]
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 4:
            raise SdpError("malformed solution entry %r in %s" % (line, path))
        blkno, i, j = int(parts[0]), int(parts[1]), int(parts[2])
        val = float(parts[3])
        if not (1 <= blkno <= len(blocks)):
            raise SdpError("block number %d out of range in %s" % (blkno, path))
        X[blkno - 1][i - 1, j - 1] = val
        X[blkno - 1][j - 1, i - 1] = val
    return y, X


def split_imported_solution(instance, X_blocks):
    """Recover (X for the instance's own blocks, free vector u) from a
    solution with the exported free-variable split block."""
    own = X_blocks[:len(instance.blocks)]
    if instance.n_free:
        diag = np.diag(X_blocks[len(instance.blocks)])
        u = diag[:instance.n_free] - diag[instance.n_free:]
    else:
        u = np.zeros(0)
    return own, u
