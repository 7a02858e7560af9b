"""Compilation of the polynomial-identity stability tests into SDPs.

The stability test asks for polynomials s, p1..p4, scalar SOS multipliers
n1, n2 and 3x3 SOS matrix multipliers Q4, Q5, Q6 with

    s(x) = theta + x1(1-x1) n1(x) + x2(1-x2) n2(x)
    M(x) + gamma*S(x) = -Q4(x) - x1(1-x1) Q5(x) - x2(1-x2) Q6(x)

holding identically (gamma = 0 gives plain stability).  Matching every
monomial coefficient of every matrix entry yields affine equality
constraints on the free polynomial coefficients and the Gram matrices of
the SOS unknowns.  A uniform margin t, added to every Gram diagonal and
maximized, turns feasibility into a robust numerical test: the program is
always feasible (t can go negative), and "certified" means the optimal
margin clears a threshold.  theta is fixed to 1; the identities are
jointly homogeneous in the unknowns, so this costs no generality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import certificate as cb
from .poly import (Polynomial, PolyMatrix3, basis_size, from_coefficient_vector,
                   monomial_basis)
from .sdp import InstanceBuilder, SolveOptions, solve, split_imported_solution

MARGIN_THRESHOLD = 1e-7
# widest margin shortfall still handed to full verification; anything the
# solver leaves below -MARGIN_SOFT is rejected outright as not certified
MARGIN_SOFT = 1e-5
MARGIN_CAP = 1.0
IDENTITY_TOL = 1e-6
GRAM_EIG_TOL = -1e-7
GRID_EIG_TOL = -1e-6

ENTRY_ORDER = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))

# generator shifts: multiplying a polynomial by 1, x1(1-x1) or x2(1-x2)
GEN_NONE = (((0, 0), 1.0),)
GEN_X1 = (((1, 0), 1.0), ((2, 0), -1.0))
GEN_X2 = (((0, 1), 1.0), ((0, 2), -1.0))


class SosError(ValueError):
    pass


@dataclass(frozen=True)
class DegreeProfile:
    """Degrees of the unknowns: s, the spacing p_i, the scalar multipliers
    n1/n2 and the matrix multipliers Q4..Q6."""

    deg_s: int
    deg_p: int
    deg_n: int
    deg_qm: int

    def __post_init__(self):
        if self.deg_s < 2 or self.deg_s % 2:
            raise SosError("deg_s must be an even integer >= 2")
        if self.deg_p < 1:
            raise SosError("deg_p must be >= 1")
        if self.deg_n < 0 or self.deg_n % 2:
            raise SosError("deg_n must be an even integer >= 0")
        if self.deg_qm < 0 or self.deg_qm % 2:
            raise SosError("deg_qm must be an even integer >= 0")

    @staticmethod
    def defaults(model, deg_s):
        """Multiplier degrees sized so every monomial of the identities is
        representable (checked again during assembly)."""
        k = max(0, model.max_coeff_degree())
        deg_qm = deg_s + k
        if deg_qm % 2:
            deg_qm += 1
        # below degree 6 the matrix multipliers are too poor to reproduce
        # the certified-rate tables; a floor of 6 restores them at deg_s=4
        deg_qm = max(6, deg_qm)
        return DegreeProfile(deg_s=deg_s, deg_p=deg_s + k,
                             deg_n=max(0, deg_s - 2), deg_qm=deg_qm)


class SosProgram:
    """Variable layout of the compiled program (immutable after creation).

    Free scalar unknowns: the coefficients of s, p1 and p2 plus the margin
    t.  PSD unknowns: Gram matrices of n1, n2 (monomial basis of degree
    deg_n/2) and of Q4..Q6 (kron basis: monomial basis of degree deg_qm/2
    tensor the 3 coordinate directions), plus a 1x1 slack for the margin
    cap t <= 1.
    """

    def __init__(self, profile, gamma=None, theta=1.0):
        if gamma is not None and gamma < 0:
            raise SosError("gamma must be >= 0")
        self.profile = profile
        self.mode = "stability" if gamma is None else "decay"
        self.gamma = 0.0 if gamma is None else float(gamma)
        self.theta = float(theta)
        self.basis_s = monomial_basis(profile.deg_s)
        # Only p1 and p2 are parameterized.  p3 and p4 enter the identities
        # through p3 - p4 alone, and that combined term is itself redundant:
        # the choice p1 = q_x2/2, p2 = -q_x1/2 reproduces the (p3-p4)=q
        # spacing matrix exactly, at one degree lower.  Keeping p3/p4 as
        # unknowns makes the constraint system rank-deficient.
        self.basis_p = [monomial_basis(profile.deg_p),
                        monomial_basis(profile.deg_p)]
        self.basis_n = monomial_basis(profile.deg_n // 2)
        self.basis_qm = monomial_basis(profile.deg_qm // 2)
        ns = len(self.basis_s)
        self.idx_s = 0
        self.idx_p = []
        offset = ns
        for basis in self.basis_p:
            self.idx_p.append(offset)
            offset += len(basis)
        self.idx_t = offset
        self.n_free = self.idx_t + 1
        side_n = len(self.basis_n)
        side_qm = 3 * len(self.basis_qm)
        # blocks: N1, N2, G4, G5, G6, margin-cap slack
        self.block_sides = (side_n, side_n, side_qm, side_qm, side_qm, 1)

    def s_from(self, u):
        return from_coefficient_vector(
            u[self.idx_s:self.idx_s + len(self.basis_s)], self.basis_s)

    def p_from(self, u, k):
        """Spacing polynomial k (0-based); p3 and p4 are identically zero."""
        if k >= 2:
            return Polynomial.zero()
        i0 = self.idx_p[k]
        return from_coefficient_vector(
            u[i0:i0 + len(self.basis_p[k])], self.basis_p[k])


def parameterize(profile, gamma=None):
    """Build the variable layout for a stability (gamma=None) or decay
    (fixed gamma >= 0) program."""
    return SosProgram(profile, gamma=gamma)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def _unit_contributions(model, program):
    """PolyMatrix3 contribution of each unit free coefficient to the
    left-hand side M + gamma*S."""
    out = []
    for mi in program.basis_s:
        unit = Polynomial.monomial(*mi)
        contrib = cb.build_Q(model, unit)
        if program.gamma:
            contrib = contrib + program.gamma * cb.build_S(unit)
        out.append((program.idx_s + len(out), contrib))
    zero = Polynomial.zero()
    for k in range(len(program.basis_p)):
        for b_idx, mi in enumerate(program.basis_p[k]):
            unit = Polynomial.monomial(*mi)
            polys = [zero] * 4
            polys[k] = unit
            sp = cb.build_spacing(*polys)
            contrib = sp[0] + sp[1] + sp[2] + sp[3]
            out.append((program.idx_p[k] + b_idx, contrib))
    return out


def assemble(model, program):
    """Compile the coefficient-matching identities into an SdpInstance."""
    prof = program.profile
    deg_s_id = max(prof.deg_s, prof.deg_n + 2)
    deg_m_id = prof.deg_qm + 2

    units = _unit_contributions(model, program)
    for _, contrib in units:
        for entry in ENTRY_ORDER:
            if contrib.get(*entry).degree() > deg_m_id:
                raise SosError(
                    "inconsistent degree profile: identity entry of degree "
                    "%d not representable by multipliers of degree %d"
                    % (contrib.get(*entry).degree(), prof.deg_qm))

    rows_s = monomial_basis(deg_s_id)
    rows_m = monomial_basis(deg_m_id)
    row_index = {}
    for alpha in rows_s:
        row_index[("s", alpha)] = len(row_index)
    for entry in ENTRY_ORDER:
        for alpha in rows_m:
            row_index[(entry, alpha)] = len(row_index)
    cap_row = len(row_index)
    m = cap_row + 1

    builder = InstanceBuilder(
        [("psd", side) for side in program.block_sides[:5]] + [("diag", 1)],
        m, n_free=program.n_free)

    # --- s-identity: s - x1(1-x1) n1 - x2(1-x2) n2 = theta ----------------
    builder.b[row_index[("s", (0, 0))]] = program.theta
    for b_idx, mi in enumerate(program.basis_s):
        builder.add_free(row_index[("s", mi)], program.idx_s + b_idx, 1.0)
    for blk, gen in ((0, GEN_X1), (1, GEN_X2)):
        half = program.basis_n
        pair_coeff = {}
        for i, bi in enumerate(half):
            for j, bj in enumerate(half):
                delta = (bi[0] + bj[0], bi[1] + bj[1])
                for shift, sign in gen:
                    alpha = (delta[0] + shift[0], delta[1] + shift[1])
                    row = row_index[("s", alpha)]
                    key = (row, min(i, j), max(i, j))
                    pair_coeff[key] = pair_coeff.get(key, 0.0) - sign
        for (row, i, j), total in pair_coeff.items():
            builder.add_entry(row, blk, i, j, total / (2.0 if i != j else 1.0))
        for i, bi in enumerate(half):  # margin t on the Gram diagonal
            for shift, sign in gen:
                alpha = (2 * bi[0] + shift[0], 2 * bi[1] + shift[1])
                builder.add_free(row_index[("s", alpha)], program.idx_t, -sign)

    # --- M-identity: (M + gamma S) + Q4 + x1(1-x1) Q5 + x2(1-x2) Q6 = 0 --
    for var, contrib in units:
        for entry in ENTRY_ORDER:
            for mi, coef in contrib.get(*entry).terms.items():
                builder.add_free(row_index[(entry, mi)], var, coef)

    half = program.basis_qm
    nb = len(half)
    for blk, gen in ((2, GEN_NONE), (3, GEN_X1), (4, GEN_X2)):
        pair_coeff = {}
        for r, c in ENTRY_ORDER:
            for i, bi in enumerate(half):
                for j, bj in enumerate(half):
                    I = i * 3 + r
                    J = j * 3 + c
                    delta = (bi[0] + bj[0], bi[1] + bj[1])
                    for shift, sign in gen:
                        alpha = (delta[0] + shift[0], delta[1] + shift[1])
                        row = row_index[((r, c), alpha)]
                        key = (row, min(I, J), max(I, J))
                        pair_coeff[key] = pair_coeff.get(key, 0.0) + sign
        for (row, I, J), total in pair_coeff.items():
            builder.add_entry(row, blk, I, J, total / (2.0 if I != J else 1.0))
        for r in range(3):  # margin t: adds t * sum_b x^(2b) on the diagonal
            for bi in half:
                for shift, sign in gen:
                    alpha = (2 * bi[0] + shift[0], 2 * bi[1] + shift[1])
                    builder.add_free(row_index[((r, r), alpha)],
                                     program.idx_t, sign)

    # --- margin cap: t + slack = MARGIN_CAP -------------------------------
    builder.add_free(cap_row, program.idx_t, 1.0)
    builder.add_entry(cap_row, 5, 0, 0, 1.0)
    builder.b[cap_row] = MARGIN_CAP

    builder.c_free[program.idx_t] = 1.0  # maximize the margin
    return builder.build()


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def scalar_gram_to_poly(gram, half_basis):
    terms = {}
    n = len(half_basis)
    for i in range(n):
        for j in range(n):
            mi = (half_basis[i][0] + half_basis[j][0],
                  half_basis[i][1] + half_basis[j][1])
            terms[mi] = terms.get(mi, 0.0) + gram[i, j]
    return Polynomial(terms)


def matrix_gram_to_polymatrix(gram, half_basis):
    out = PolyMatrix3()
    n = len(half_basis)
    for r, c in ENTRY_ORDER:
        terms = {}
        for i in range(n):
            for j in range(n):
                mi = (half_basis[i][0] + half_basis[j][0],
                      half_basis[i][1] + half_basis[j][1])
                terms[mi] = terms.get(mi, 0.0) + gram[i * 3 + r, j * 3 + c]
        out.set(r, c, Polynomial(terms))
    return out


@dataclass
class Certificate:
    """A recovered (and re-verifiable) feasible point of the identities."""

    s: Polynomial
    p1: Polynomial
    p2: Polynomial
    p3: Polynomial
    p4: Polynomial
    theta: float
    gamma: float
    n1: Polynomial
    n2: Polynomial
    q_multipliers: list  # three PolyMatrix3 (Q4, Q5, Q6)
    grams: list          # the five Gram matrices (margin included)
    margin: float
    gram_min_eigs: list = field(default_factory=list)
    identity_residual: float = np.nan

    def inputs(self):
        return cb.CertificateInputs(s=self.s, p1=self.p1, p2=self.p2,
                                    p3=self.p3, p4=self.p4,
                                    theta=self.theta, gamma=self.gamma)

    def scaled(self, factor):
        """Joint positive rescaling; both identities are homogeneous of
        degree one in (theta, s, p_i, n_i, Grams)."""
        if factor <= 0:
            raise SosError("scale factor must be positive")
        return Certificate(
            s=self.s * factor, p1=self.p1 * factor, p2=self.p2 * factor,
            p3=self.p3 * factor, p4=self.p4 * factor,
            theta=self.theta * factor, gamma=self.gamma,
            n1=self.n1 * factor, n2=self.n2 * factor,
            q_multipliers=[q * factor for q in self.q_multipliers],
            grams=[g * factor for g in self.grams],
            margin=self.margin * factor,
            gram_min_eigs=[e * factor for e in self.gram_min_eigs],
            identity_residual=self.identity_residual * factor)


class NotCertified(Exception):
    """The SDP solved but the margin is below the certification threshold
    (distinct from a solver failure)."""

    def __init__(self, margin):
        super().__init__("feasibility margin %.3e below threshold %.1e"
                         % (margin, MARGIN_THRESHOLD))
        self.margin = margin


def extract_certificate(program, x_blocks, u, model=None,
                        margin_threshold=MARGIN_THRESHOLD):
    """Reconstruct polynomials and Gram matrices from a solved instance.

    Raises NotCertified when the margin is below threshold."""
    t = float(u[program.idx_t])
    grams = []
    for k in range(5):
        side = program.block_sides[k]
        grams.append(np.asarray(x_blocks[k]) + t * np.eye(side))
    scale = max(1.0, max(float(np.abs(g).max()) for g in grams))
    if t / scale < margin_threshold:
        raise NotCertified(t)
    s = program.s_from(u)
    ps = [program.p_from(u, k) for k in range(4)]
    n1 = scalar_gram_to_poly(grams[0], program.basis_n)
    n2 = scalar_gram_to_poly(grams[1], program.basis_n)
    qms = [matrix_gram_to_polymatrix(grams[2 + k], program.basis_qm)
           for k in range(3)]
    cert = Certificate(s=s, p1=ps[0], p2=ps[1], p3=ps[2], p4=ps[3],
                       theta=program.theta, gamma=program.gamma,
                       n1=n1, n2=n2, q_multipliers=qms, grams=grams,
                       margin=t)
    cert.gram_min_eigs = [float(np.linalg.eigvalsh(g).min()) for g in grams]
    if model is not None:
        cert.identity_residual = identity_residual(model, cert)
    return cert


def identity_residual(model, cert):
    """Max absolute coefficient mismatch over both identities."""
    g1 = Polynomial({(1, 0): 1.0, (2, 0): -1.0})
    g2 = Polynomial({(0, 1): 1.0, (0, 2): -1.0})
    res_s = cert.s - Polynomial.constant(cert.theta) \
        - g1 * cert.n1 - g2 * cert.n2
    worst = max(map(abs, res_s.terms.values()), default=0.0)
    m = cb.build_M(model, cert.inputs())
    if cert.gamma:
        m = m + cert.gamma * cb.build_S(cert.s)
    q4, q5, q6 = cert.q_multipliers
    for r, c in ENTRY_ORDER:
        res = m.get(r, c) + q4.get(r, c) + g1 * q5.get(r, c) \
            + g2 * q6.get(r, c)
        worst = max(worst, max(map(abs, res.terms.values()), default=0.0))
    return worst


@dataclass
class VerificationReport:
    identity_residual: float
    gram_min_eig: float
    grid_min_eig: float
    grid_min_s: float
    passed: bool


def verify_certificate(model, cert, grid=51):
    """Independent re-check of a certificate: symbolic identity residuals,
    Gram eigenvalues, and a point-wise eigenvalue spot check of -(M+gamma*S)
    and of s - theta on a uniform grid."""
    residual = identity_residual(model, cert)
    gram_min = min(cert.gram_min_eigs) if cert.gram_min_eigs else \
        min(float(np.linalg.eigvalsh(g).min()) for g in cert.grams)
    m = cb.build_M(model, cert.inputs())
    if cert.gamma:
        m = m + cert.gamma * cb.build_S(cert.s)
    xs = np.linspace(0.0, 1.0, grid)
    grid_min = np.inf
    s_min = np.inf
    for x1 in xs:
        for x2 in xs:
            neg = -m(x1, x2)
            grid_min = min(grid_min, float(np.linalg.eigvalsh(neg).min()))
            s_min = min(s_min, cert.s(x1, x2) - cert.theta)
    passed = (residual < IDENTITY_TOL
              and gram_min >= GRAM_EIG_TOL
              and grid_min >= GRID_EIG_TOL
              and s_min >= GRID_EIG_TOL)
    return VerificationReport(identity_residual=residual,
                              gram_min_eig=gram_min,
                              grid_min_eig=grid_min,
                              grid_min_s=s_min,
                              passed=bool(passed))


# ---------------------------------------------------------------------------
# one-shot driver
# ---------------------------------------------------------------------------

@dataclass
class SosOutcome:
    status: str  # certified | not-certified | undecided
    certificate: Certificate = None
    margin: float = np.nan
    solver_status: str = ""
    solve_report: object = None


def solve_identities(model, profile, gamma=None, options=None, solver=None):
    """Assemble and solve; classify the outcome.

    Solver failures map to 'undecided', never to 'not-certified'.  `solver`
    optionally replaces the embedded interior-point method with any callable
    instance -> report exposing .status, .X and .u (e.g. the external
    adapter)."""
    program = parameterize(profile, gamma=gamma)
    instance = assemble(model, program)
    # tighter than the solver defaults: the identity residual check is an
    # absolute 1e-6 on coefficients, so feasibility must be driven hard
    opts = options or SolveOptions(gap_tol=1e-8, feas_tol=1e-8)
    if solver is not None:
        report = solver(instance)
    else:
        report = solve(instance, opts)
    if report.status not in ("optimal",):
        if report.status == "infeasible":
            return SosOutcome(status="not-certified", margin=-np.inf,
                              solver_status=report.status,
                              solve_report=report)
        return SosOutcome(status="undecided", solver_status=report.status,
                          solve_report=report)
    marginal = False
    try:
        cert = extract_certificate(program, report.X, report.u, model=model)
    except NotCertified as nc:
        # degenerate-but-feasible identities (e.g. forced-zero diagonal
        # entries of M) pin the optimal margin to exactly zero; accept a
        # vanishing margin (up to solver accuracy) when the full
        # verification below still passes -- that check, not the margin,
        # is the sound arbiter
        if nc.margin >= -MARGIN_SOFT:
            marginal = True
            cert = extract_certificate(program, report.X, report.u,
                                       model=model, margin_threshold=-np.inf)
        else:
            return SosOutcome(status="not-certified", margin=nc.margin,
                              solver_status=report.status,
                              solve_report=report)
    verification = verify_certificate(model, cert)
    if not verification.passed:
        if marginal:
            return SosOutcome(status="not-certified", margin=cert.margin,
                              solver_status=report.status,
                              solve_report=report)
        return SosOutcome(status="undecided", margin=cert.margin,
                          solver_status="verification-failed",
                          solve_report=report)
    return SosOutcome(status="certified", certificate=cert,
                      margin=cert.margin, solver_status=report.status,
                      solve_report=report)


# ---------------------------------------------------------------------------
# certificate persistence
# ---------------------------------------------------------------------------

def save_certificate(cert, path):
    """Write a certificate as JSON: polynomials in the expression grammar,
    Gram matrices as nested lists."""
    import json

    from .poly import format_polynomial

    def mat3(pm):
        return [[format_polynomial(pm.get(r, c)) for c in range(3)]
                for r in range(3)]

    payload = {
        "format": "soslyap-certificate-1",
        "theta": cert.theta,
        "gamma": cert.gamma,
        "margin": cert.margin,
        "identity_residual": cert.identity_residual,
        "s": format_polynomial(cert.s),
        "p1": format_polynomial(cert.p1),
        "p2": format_polynomial(cert.p2),
        "p3": format_polynomial(cert.p3),
        "p4": format_polynomial(cert.p4),
        "n1": format_polynomial(cert.n1),
        "n2": format_polynomial(cert.n2),
        "q_multipliers": [mat3(q) for q in cert.q_multipliers],
        "grams": [np.asarray(g).tolist() for g in cert.grams],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_certificate(path):
    import json

    from .poly import parse_polynomial

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "soslyap-certificate-1":
        raise SosError("unrecognized certificate file %s" % path)

    def mat3(rows):
        pm = PolyMatrix3()
        for r in range(3):
            for c in range(r, 3):
                pm.set(r, c, parse_polynomial(rows[r][c]))
        return pm

    cert = Certificate(
        s=parse_polynomial(payload["s"]),
        p1=parse_polynomial(payload["p1"]),
        p2=parse_polynomial(payload["p2"]),
        p3=parse_polynomial(payload["p3"]),
        p4=parse_polynomial(payload["p4"]),
        theta=float(payload["theta"]),
        gamma=float(payload["gamma"]),
        n1=parse_polynomial(payload["n1"]),
        n2=parse_polynomial(payload["n2"]),
        q_multipliers=[mat3(q) for q in payload["q_multipliers"]],
        grams=[np.asarray(g, dtype=float) for g in payload["grams"]],
        margin=float(payload["margin"]),
        identity_residual=float(payload.get("identity_residual", "nan")))
    cert.gram_min_eigs = [float(np.linalg.eigvalsh(g).min())
                          for g in cert.grams]
    return cert
