"""Sparse polynomials in two variables x1, x2.

Terms are stored as a dict mapping exponent pairs (i, j) to float
coefficients.  Coefficients with magnitude below ZERO_TOL are dropped, so
every Polynomial is in a unique canonical form.  All operations return new
objects; instances are treated as immutable.

The monomial order used everywhere (bases, coefficient vectors, SDP
assembly) is graded lexicographic with x1 > x2:

    1, x1, x2, x1^2, x1*x2, x2^2, x1^3, ...
"""

from __future__ import annotations

import math

import numpy as np

ZERO_TOL = 1e-12
MAX_EXPONENT = 64


class PolynomialError(ValueError):
    pass


class ParseError(PolynomialError):
    """Syntax error in a polynomial expression; carries the position."""

    def __init__(self, message, position):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


def _canonical(terms):
    out = {}
    for (i, j), c in terms.items():
        c = float(c)
        if abs(c) < ZERO_TOL:
            continue
        if i < 0 or j < 0:
            raise PolynomialError("negative exponent (%d, %d)" % (i, j))
        out[(int(i), int(j))] = out.get((int(i), int(j)), 0.0) + c
    return {k: v for k, v in out.items() if abs(v) >= ZERO_TOL}


class Polynomial:
    """A real polynomial in x1, x2 with sparse float coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = _canonical(terms or {})

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero():
        return Polynomial()

    @staticmethod
    def constant(c):
        return Polynomial({(0, 0): c})

    @staticmethod
    def monomial(i, j, c=1.0):
        return Polynomial({(i, j): c})

    # -- queries ------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(i + j for i, j in self.terms)

    def coefficient(self, i, j):
        return self.terms.get((i, j), 0.0)

    def coeff_l1(self):
        return sum(abs(c) for c in self.terms.values())

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0.0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial({k: c * other for k, c in self.terms.items()})
        other = _as_poly(other)
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                out[k] = out.get(k, 0.0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise PolynomialError("exponent must be a non-negative integer")
        result = Polynomial.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- calculus -----------------------------------------------------

    def diff(self, axis):
        """Formal partial derivative with respect to x1 (axis=1) or x2."""
        if axis not in (1, 2):
            raise PolynomialError("axis must be 1 or 2")
        out = {}
        for (i, j), c in self.terms.items():
            if axis == 1 and i > 0:
                out[(i - 1, j)] = out.get((i - 1, j), 0.0) + c * i
            elif axis == 2 and j > 0:
                out[(i, j - 1)] = out.get((i, j - 1), 0.0) + c * j
        return Polynomial(out)

    def integral_on_box(self):
        """Exact integral over the unit square [0,1]^2."""
        return sum(c / ((i + 1) * (j + 1)) for (i, j), c in self.terms.items())

    # -- evaluation ---------------------------------------------------

    def __call__(self, x1, x2):
        """Evaluate at scalars or (broadcastable) numpy arrays."""
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        acc = np.zeros(np.broadcast(x1, x2).shape)
        for (i, j), c in self.terms.items():
            acc = acc + c * (x1 ** i) * (x2 ** j)
        if acc.ndim == 0:
            return float(acc)
        return acc

    # -- formatting ---------------------------------------------------

    def __repr__(self):
        return "Polynomial(%s)" % format_polynomial(self)

    def __str__(self):
        return format_polynomial(self)


def _as_poly(value):
    if isinstance(value, Polynomial):
        return value
    if isinstance(value, (int, float)):
        return Polynomial.constant(value)
    raise PolynomialError("cannot coerce %r to Polynomial" % (value,))


X1 = Polynomial.monomial(1, 0)
X2 = Polynomial.monomial(0, 1)
ONE = Polynomial.constant(1.0)


# ---------------------------------------------------------------------------
# monomial bases
# ---------------------------------------------------------------------------

def monomial_basis(max_degree):
    """All exponent pairs with total degree <= max_degree, graded lex.

    Within a degree class, x1-dominant monomials come first:
    (d,0), (d-1,1), ..., (0,d).  Size is (d+1)(d+2)/2.
    """
    if max_degree < 0:
        raise PolynomialError("basis degree must be >= 0")
    basis = []
    for d in range(max_degree + 1):
        for i in range(d, -1, -1):
            basis.append((i, d - i))
    return basis


def basis_size(max_degree):
    return (max_degree + 1) * (max_degree + 2) // 2


def coefficient_vector(p, basis):
    """Coefficients of p in the given monomial basis (list of (i,j))."""
    index = {m: k for k, m in enumerate(basis)}
    v = np.zeros(len(basis))
    for m, c in p.terms.items():
        if m not in index:
            raise PolynomialError(
                "term x1^%d*x2^%d outside the basis (degree overflow)" % m)
        v[index[m]] = c
    return v


def from_coefficient_vector(v, basis):
    return Polynomial({m: c for m, c in zip(basis, v)})


# ---------------------------------------------------------------------------
# extrema on the unit square
# ---------------------------------------------------------------------------

class BoxExtrema:
    """Grid min/max of a polynomial on [0,1]^2 with a Lipschitz bracket.

    `lower`/`upper` are the exact extrema over the sample grid;
    `resolution_error` bounds how far the true extrema can lie outside
    [lower, upper], derived from a coefficient-based Lipschitz constant.
    """

    __slots__ = ("lower", "upper", "resolution_error")

    def __init__(self, lower, upper, resolution_error):
        self.lower = lower
        self.upper = upper
        self.resolution_error = resolution_error

    def __iter__(self):
        return iter((self.lower, self.upper))

    def __repr__(self):
        return "BoxExtrema(lower=%g, upper=%g, resolution_error=%g)" % (
            self.lower, self.upper, self.resolution_error)


def extrema_on_box(p, grid=201):
    """Estimate (inf, sup) of p over [0,1]^2 on a uniform grid.

    Exact whenever the extrema lie on grid nodes.  The certified interval
    is [lower - resolution_error, upper + resolution_error] where the
    error uses |dp/dx1| <= sum |c|*i and |dp/dx2| <= sum |c|*j on the box.
    """
    if p.is_zero():
        return BoxExtrema(0.0, 0.0, 0.0)
    xs = np.linspace(0.0, 1.0, grid)
    vals = p(xs[:, None], xs[None, :])
    lip1 = sum(abs(c) * i for (i, j), c in p.terms.items())
    lip2 = sum(abs(c) * j for (i, j), c in p.terms.items())
    h = 1.0 / (grid - 1)
    err = (lip1 + lip2) * h / 2.0
    return BoxExtrema(float(vals.min()), float(vals.max()), err)


# ---------------------------------------------------------------------------
# parsing / formatting
# ---------------------------------------------------------------------------

def parse_polynomial(text):
    """Parse an expression like "5*x1^2 - 15*x1*x2 + 13*x2^2".

    Grammar: expr := term (('+'|'-') term)*;
             term := factor ('*'? factor)*;
             factor := number | 'x1' | 'x2' | '(' expr ')', optionally '^' int.
    Whitespace is insignificant; parenthesized subexpressions are expanded.
    """
    return _Parser(text).parse()


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def parse(self):
        p = self._expr()
        self._skip_ws()
        if self.pos != len(self.text):
            raise ParseError("unexpected character %r" % self.text[self.pos],
                             self.pos)
        return p

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self):
        self._skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expr(self):
        sign = 1.0
        if self._peek() in ("+", "-"):
            if self.text[self.pos] == "-":
                sign = -1.0
            self.pos += 1
        acc = self._term() * sign
        while self._peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self._term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def _term(self):
        acc = self._factor()
        while True:
            ch = self._peek()
            if ch == "*":
                self.pos += 1
                acc = acc * self._factor()
            elif ch == "(" or ch == "x" or ch.isdigit() or ch == ".":
                acc = acc * self._factor()
            else:
                return acc

    def _factor(self):
        ch = self._peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            base = self._expr()
            if self._peek() != ")":
                raise ParseError("expected ')'", self.pos)
            self.pos += 1
        elif ch == "x":
            if self.text[self.pos:self.pos + 2] == "x1":
                base = X1
            elif self.text[self.pos:self.pos + 2] == "x2":
                base = X2
            else:
                raise ParseError("expected variable 'x1' or 'x2'", self.pos)
            self.pos += 2
        elif ch.isdigit() or ch == ".":
            base = Polynomial.constant(self._number())
        else:
            raise ParseError("expected a factor", self.pos)
        if self._peek() == "^":
            self.pos += 1
            n = self._integer()
            if n > MAX_EXPONENT:
                raise ParseError("exponent %d exceeds limit %d"
                                 % (n, MAX_EXPONENT), start)
            base = base ** n
        return base

    def _number(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit()
                                             or self.text[self.pos] in ".eE"
                                             or (self.text[self.pos] in "+-"
                                                 and self.pos > start
                                                 and self.text[self.pos - 1] in "eE")):
            self.pos += 1
        try:
            return float(self.text[start:self.pos])
        except ValueError:
            raise ParseError("bad numeric literal %r"
                             % self.text[start:self.pos], start)

    def _integer(self):
        self._skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ParseError("expected an integer exponent", start)
        return int(self.text[start:self.pos])


def format_polynomial(p, precision=17):
    """Render in the same grammar parse_polynomial accepts."""
    if p.is_zero():
        return "0"
    parts = []
    for (i, j) in sorted(p.terms, key=lambda m: (m[0] + m[1], -m[0])):
        c = p.terms[(i, j)]
        mono = []
        if i == 1:
            mono.append("x1")
        elif i > 1:
            mono.append("x1^%d" % i)
        if j == 1:
            mono.append("x2")
        elif j > 1:
            mono.append("x2^%d" % j)
        coeff = "%.*g" % (precision, abs(c))
        if mono and abs(abs(c) - 1.0) < 1e-300:
            body = "*".join(mono)
        elif mono:
            body = coeff + "*" + "*".join(mono)
        else:
            body = coeff
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += " %s %s" % (sign, body)
    return out


# ---------------------------------------------------------------------------
# symmetric 3x3 polynomial matrices
# ---------------------------------------------------------------------------

class PolyMatrix3:
    """Symmetric 3x3 matrix with Polynomial entries (upper triangle stored)."""

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        self.entries = {}
        for key in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
            self.entries[key] = Polynomial.zero()
        if entries:
            for (i, j), p in entries.items():
                self.set(i, j, p)

    def set(self, i, j, p):
        if i > j:
            i, j = j, i
        self.entries[(i, j)] = _as_poly(p)

    def get(self, i, j):
        if i > j:
            i, j = j, i
        return self.entries[(i, j)]

    def __add__(self, other):
        out = PolyMatrix3()
        for k in self.entries:
            out.entries[k] = self.entries[k] + other.entries[k]
        return out

    def __sub__(self, other):
        out = PolyMatrix3()
        for k in self.entries:
            out.entries[k] = self.entries[k] - other.entries[k]
        return out

    def __mul__(self, scalar):
        out = PolyMatrix3()
        for k in self.entries:
            out.entries[k] = self.entries[k] * scalar
        return out

    __rmul__ = __mul__

    def is_zero(self):
        return all(p.is_zero() for p in self.entries.values())

    def max_coeff(self):
        return max((max(map(abs, p.terms.values()), default=0.0)
                    for p in self.entries.values()), default=0.0)

    def __call__(self, x1, x2):
        """Evaluate to a numeric symmetric 3x3 matrix at a point."""
        m = np.zeros((3, 3))
        for (i, j), p in self.entries.items():
            m[i, j] = p(x1, x2)
            m[j, i] = m[i, j]
        return m

    def __repr__(self):
        return "PolyMatrix3(%s)" % {k: str(v) for k, v in self.entries.items()}
