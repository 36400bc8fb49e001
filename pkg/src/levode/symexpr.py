"""Exact rational-function algebra and order-of-magnitude tools.

``RationalFn`` is an immutable reduced quotient of polynomials with exact
rational coefficients (monic denominator, gcd cancelled), so equal values
have equal representations.  ``SymMatrix`` is a dense matrix of them with
non-commutative products.  On top of the arithmetic the module provides

* differentiation and the leading power at infinity,
* Laurent expansion at infinity with an exact rational tail,
* a certified supremum bound for |f| on a right half-line, computed with
  exact sign evaluations only (no floating point enters the bound),
* a canonical string form and the matching parser.

Everything downstream (the reduction engine, the error ledger, the
asymptotic evaluator) stores its symbolic state in these two types.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction

from . import poly
from .poly import Coeffs


class ParseError(ValueError):
    """A string did not match the rational-function grammar."""


class PoleInDomain(ValueError):
    """The function has a pole on the half-line being bounded."""


class UnboundedAtInfinity(ValueError):
    """The function grows at infinity, so no finite sup exists."""


class RationalFn:
    """A reduced ratio of polynomials in one variable over the rationals."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=poly.ONE):
        if isinstance(num, (int, Fraction)):
            num = poly.constant(num)
        else:
            num = poly.trim(Fraction(c) for c in num)
        if isinstance(den, (int, Fraction)):
            den = poly.constant(den)
        else:
            den = poly.trim(Fraction(c) for c in den)
        if poly.is_zero(den):
            raise ZeroDivisionError("rational function with zero denominator")
        if poly.is_zero(num):
            num, den = poly.ZERO, poly.ONE
        else:
            g = poly.gcd(num, den)
            if poly.degree(g) > 0:
                num = poly.divmod_exact(num, g)[0]
                den = poly.divmod_exact(den, g)[0]
            lc = poly.leading(den)
            if lc != 1:
                num = tuple(c / lc for c in num)
                den = tuple(c / lc for c in den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *a):  # immutability guard
        raise AttributeError("RationalFn is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def const(cls, c) -> "RationalFn":
        return cls(Fraction(c))

    @classmethod
    def x_power(cls, e: int) -> "RationalFn":
        """x**e for any integer e, negative powers going to the denominator."""
        if e >= 0:
            return cls(poly.x_power(e))
        return cls(poly.ONE, poly.x_power(-e))

    @classmethod
    def monomial(cls, c, e: int) -> "RationalFn":
        return cls.const(c) * cls.x_power(e)

    # -- predicates and structure -------------------------------------

    @property
    def is_zero(self) -> bool:
        return poly.is_zero(self.num)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RationalFn.const(other)
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __bool__(self) -> bool:
        return not self.is_zero

    # -- ring operations ----------------------------------------------

    @staticmethod
    def _coerce(v):
        if isinstance(v, RationalFn):
            return v
        if isinstance(v, (int, Fraction)):
            return RationalFn.const(v)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFn(
            poly.add(poly.mul(self.num, o.den), poly.mul(o.num, self.den)),
            poly.mul(self.den, o.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFn(poly.neg(self.num), self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFn(poly.mul(self.num, o.num), poly.mul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("division by the zero function")
        return RationalFn(poly.mul(self.num, o.den), poly.mul(self.den, o.num))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return RationalFn.const(1) / self ** (-k)
        out = RationalFn.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus and asymptotics -------------------------------------

    def differentiate(self) -> "RationalFn":
        n, d = self.num, self.den
        return RationalFn(
            poly.sub(poly.mul(poly.derivative(n), d), poly.mul(n, poly.derivative(d))),
            poly.mul(d, d),
        )

    def leading_order(self) -> int | None:
        """Exponent e with f ~ c*x^e at infinity; ``None`` for the zero function."""
        if self.is_zero:
            return None
        return poly.degree(self.num) - poly.degree(self.den)

    def leading_coefficient(self) -> Fraction:
        if self.is_zero:
            raise ValueError("zero function has no leading coefficient")
        return poly.leading(self.num) / poly.leading(self.den)

    def limit_at_infinity(self) -> Fraction:
        lo = self.leading_order()
        if lo is None:
            return Fraction(0)
        if lo > 0:
            raise UnboundedAtInfinity("function diverges at infinity")
        return self.leading_coefficient() if lo == 0 else Fraction(0)

    def laurent_split(self, stop_exponent: Fraction) -> tuple[list[tuple[Fraction, int]], "RationalFn"]:
        """Expansion at infinity down to, but excluding, ``stop_exponent``.

        Returns (terms, tail): terms is a list of (coefficient, exponent)
        with exponents strictly above ``stop_exponent`` in decreasing order,
        and tail is the exact rational remainder, every Laurent term of
        which sits at or below ``stop_exponent``.
        """
        terms: list[tuple[Fraction, int]] = []
        g = self
        while not g.is_zero:
            e = g.leading_order()
            if Fraction(e) <= stop_exponent:
                break
            c = g.leading_coefficient()
            terms.append((c, e))
            g = g - RationalFn.monomial(c, e)
        return terms, g

    # -- evaluation ----------------------------------------------------

    def eval_exact(self, x) -> Fraction:
        x = Fraction(x)
        d = poly.eval_at(self.den, x)
        if d == 0:
            raise ZeroDivisionError(f"pole at x = {x}")
        return poly.eval_at(self.num, x) / d

    def eval_float(self, x: float) -> float:
        d = poly.eval_float(self.den, x)
        return poly.eval_float(self.num, x) / d

    def has_pole_at_or_beyond(self, x) -> bool:
        x = Fraction(x)
        if poly.degree(self.den) < 1:
            return False
        if poly.eval_at(self.den, x) == 0:
            return True
        return poly.count_roots_above(self.den, x) > 0

    # -- canonical text form -------------------------------------------

    def _integer_parts(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        denoms = [c.denominator for c in self.num + self.den]
        m = 1
        for d in denoms:
            m = m * d // _gcd_int(m, d)
        ni = [int(c * m) for c in self.num]
        di = [int(c * m) for c in self.den]
        g = 0
        for v in ni + di:
            g = _gcd_int(g, abs(v))
        g = g or 1
        return tuple(v // g for v in ni), tuple(v // g for v in di)

    def to_string(self) -> str:
        if self.is_zero:
            return "0"
        ni, di = self._integer_parts()
        num_s = _format_int_poly(ni)
        if len(di) == 1 and di[0] == 1:
            return num_s
        return f"({num_s})/({_format_int_poly(di)})"

    __str__ = to_string

    def __repr__(self):
        return f"RationalFn({self.to_string()!r})"

    @classmethod
    def parse(cls, text: str) -> "RationalFn":
        num_s, den_s = _split_fraction(text)
        num = _parse_int_poly(num_s)
        den = _parse_int_poly(den_s) if den_s is not None else poly.ONE
        if poly.is_zero(den):
            raise ParseError(f"zero denominator in {text!r}")
        return cls(num, den)


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a)


def _format_int_poly(coeffs) -> str:
    terms = []
    for e in range(len(coeffs) - 1, -1, -1):
        c = coeffs[e]
        if not c:
            continue
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            xs = "x" if e == 1 else f"x^{e}"
            body = xs if mag == 1 else f"{mag}*{xs}"
        terms.append((c < 0, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] else "") + terms[0][1]
    for negative, body in terms[1:]:
        out += (" - " if negative else " + ") + body
    return out


def _split_fraction(text: str) -> tuple[str, str | None]:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError(f"unbalanced parentheses in {text!r}")
        elif ch == "/" and depth == 0:
            return text[:i], text[i + 1:]
    if depth != 0:
        raise ParseError(f"unbalanced parentheses in {text!r}")
    return text, None


def _strip_outer_parens(s: str) -> str:
    s = s.strip()
    while s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0 and i != len(s) - 1:
                    return s
        s = s[1:-1].strip()
    return s


_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*(?:"
    r"(?P<coeff>\d+)\s*\*?\s*(?P<var1>x(?:\^(?P<exp1>\d+))?)?"
    r"|(?P<var2>x(?:\^(?P<exp2>\d+))?)"
    r")\s*"
)


def _parse_int_poly(text: str) -> Coeffs:
    s = _strip_outer_parens(text)
    if not s:
        raise ParseError("empty polynomial")
    coeffs: dict[int, Fraction] = {}
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse polynomial {text!r} near {s[pos:]!r}")
        sign = m.group("sign")
        if sign is None and not first:
            raise ParseError(f"missing sign between terms in {text!r}")
        coeff = m.group("coeff")
        var = m.group("var1") or m.group("var2")
        exp = m.group("exp1") or m.group("exp2")
        if coeff is None and var is None:
            raise ParseError(f"empty term in {text!r}")
        c = Fraction(int(coeff)) if coeff is not None else Fraction(1)
        if sign == "-":
            c = -c
        e = 0
        if var is not None:
            e = int(exp) if exp is not None else 1
        coeffs[e] = coeffs.get(e, Fraction(0)) + c
        pos = m.end()
        first = False
    top = max(coeffs) if coeffs else 0
    return poly.trim(tuple(coeffs.get(i, Fraction(0)) for i in range(top + 1)))


# -- supremum bound on a half-line ------------------------------------


def sup_bound(f: RationalFn, X, *, rel_slack=Fraction(1, 20), max_cells: int = 4000) -> Fraction:
    """Certified upper bound for sup of |f| on [X, infinity).

    Raises ``PoleInDomain`` if the denominator vanishes on the half-line and
    ``UnboundedAtInfinity`` if f grows there.  The bound is computed with
    exact rational arithmetic: beyond the Cauchy bounds of the denominator
    and of the derivative numerator the function is monotone, so the tail
    contributes max(|f| at the cut, |limit|); the finite part is covered by
    adaptive cells, each bounded by a coefficient-sum estimate for the
    numerator over a certified positive lower bound for the denominator.
    Refinement stops once the bound is within ``rel_slack`` of an attained
    value, so the result is tight as well as sound.
    """
    if f.is_zero:
        return Fraction(0)
    lo = f.leading_order()
    if lo > 0:
        raise UnboundedAtInfinity(f"leading power {lo} > 0 on [{X}, inf)")
    X = Fraction(X)
    n, d = f.num, f.den
    if poly.eval_at(d, X) == 0 or poly.count_roots_above(d, X) > 0:
        raise PoleInDomain(f"denominator vanishes on [{X}, inf)")

    crit = poly.sub(
        poly.mul(poly.derivative(n), d), poly.mul(n, poly.derivative(d))
    )
    x_cut = max(X, poly.cauchy_root_bound(d), poly.cauchy_root_bound(crit))
    limit_abs = abs(f.limit_at_infinity())
    attained = max(abs(f.eval_exact(X)), abs(f.eval_exact(x_cut)), limit_abs)
    tail_max = max(abs(f.eval_exact(x_cut)), limit_abs)
    if x_cut == X:
        return max(abs(f.eval_exact(X)), limit_abs)

    def cell_bound(u: Fraction, v: Fraction) -> Fraction | None:
        # |den| >= |den(u)| - total coefficient motion on [u, v]
        motion = Fraction(0)
        for i in range(1, len(d)):
            if d[i]:
                motion += abs(d[i]) * (v**i - u**i)
        low = abs(poly.eval_at(d, u)) - motion
        if low <= 0:
            return None
        return poly.abs_sum_at(n, v) / low

    heap: list[tuple] = []
    counter = 0

    def push(u: Fraction, v: Fraction):
        nonlocal counter
        b = cell_bound(u, v)
        key = float("inf") if b is None else float(b)
        counter += 1
        heapq.heappush(heap, (-key, counter, u, v, b))

    push(X, x_cut)
    cells = 1
    while heap and cells < max_cells:
        top = -heap[0][0]
        if top <= float(attained * (1 + rel_slack)) and heap[0][4] is not None:
            break
        _, _, u, v, _ = heapq.heappop(heap)
        mid = (u + v) / 2
        attained = max(attained, abs(f.eval_exact(mid)))
        push(u, mid)
        push(mid, v)
        cells += 1

    finite_max = Fraction(0)
    for _, _, _, _, b in heap:
        if b is None:
            raise RuntimeError(
                "sup_bound hit its refinement limit before certifying every cell"
            )
        finite_max = max(finite_max, b)
    return max(finite_max, tail_max)


def differentiate(f: RationalFn) -> RationalFn:
    return f.differentiate()


def leading_order(f: RationalFn) -> int | None:
    return f.leading_order()


@dataclass(frozen=True)
class OrderExp:
    """A decay order recorded as sigma steps of size a: O(x**(-sigma*a))."""

    sigma: int
    a: Fraction

    @property
    def exponent(self) -> Fraction:
        return -self.sigma * self.a

    def admits(self, f: RationalFn) -> bool:
        lo = f.leading_order()
        return lo is None or Fraction(lo) <= self.exponent


class SymMatrix:
    """Dense matrix of RationalFn entries with exact non-commutative products."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        rows = tuple(tuple(_as_fn(e) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise ValueError("SymMatrix needs at least one row and column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged rows in SymMatrix")
        object.__setattr__(self, "rows", len(rows))
        object.__setattr__(self, "cols", width)
        object.__setattr__(self, "entries", rows)

    def __setattr__(self, *a):
        raise AttributeError("SymMatrix is immutable")

    # -- constructors --------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "SymMatrix":
        cols = rows if cols is None else cols
        z = RationalFn.const(0)
        return cls([[z] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        one = RationalFn.const(1)
        z = RationalFn.const(0)
        return cls([[one if i == j else z for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, values) -> "SymMatrix":
        vals = [_as_fn(v) for v in values]
        z = RationalFn.const(0)
        return cls(
            [[vals[i] if i == j else z for j in range(len(vals))] for i in range(len(vals))]
        )

    # -- structure -----------------------------------------------------

    def entry(self, i: int, j: int) -> RationalFn:
        return self.entries[i][j]

    def with_entry(self, i: int, j: int, value) -> "SymMatrix":
        rows = [list(r) for r in self.entries]
        rows[i][j] = _as_fn(value)
        return SymMatrix(rows)

    @property
    def is_zero(self) -> bool:
        return all(e.is_zero for row in self.entries for e in row)

    def __eq__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def diagonal_part(self) -> "SymMatrix":
        z = RationalFn.const(0)
        return SymMatrix(
            [
                [self.entries[i][j] if i == j else z for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def off_diagonal_part(self) -> "SymMatrix":
        z = RationalFn.const(0)
        return SymMatrix(
            [
                [z if i == j else self.entries[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ]
        )

    def diagonal_entries(self) -> tuple[RationalFn, ...]:
        return tuple(self.entries[i][i] for i in range(min(self.rows, self.cols)))

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        self._match(other)
        return SymMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other):
        if not isinstance(other, SymMatrix):
            return NotImplemented
        self._match(other)
        return SymMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self):
        return SymMatrix([[-e for e in row] for row in self.entries])

    def __mul__(self, other):
        if isinstance(other, SymMatrix):
            if self.cols != other.rows:
                raise ValueError("inner dimension mismatch")
            cols = list(zip(*other.entries))
            return SymMatrix(
                [
                    [_dot(row, col) for col in cols]
                    for row in self.entries
                ]
            )
        f = _as_fn_or_none(other)
        if f is None:
            return NotImplemented
        return SymMatrix([[e * f for e in row] for row in self.entries])

    def __rmul__(self, other):
        f = _as_fn_or_none(other)
        if f is None:
            return NotImplemented
        return SymMatrix([[f * e for e in row] for row in self.entries])

    def _match(self, other: "SymMatrix"):
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    # -- calculus, orders, evaluation ---------------------------------

    def derivative(self) -> "SymMatrix":
        return SymMatrix([[e.differentiate() for e in row] for row in self.entries])

    def max_leading_order(self) -> int | None:
        best: int | None = None
        for row in self.entries:
            for e in row:
                lo = e.leading_order()
                if lo is not None and (best is None or lo > best):
                    best = lo
        return best

    def order_at_most(self, exponent: Fraction) -> bool:
        """True when every entry is O(x**exponent) at infinity."""
        lo = self.max_leading_order()
        return lo is None or Fraction(lo) <= exponent

    def eval_exact(self, x) -> list[list[Fraction]]:
        x = Fraction(x)
        return [[e.eval_exact(x) for e in row] for row in self.entries]

    def eval_float(self, x: float) -> list[list[float]]:
        return [[e.eval_float(x) for e in row] for row in self.entries]

    def to_strings(self) -> list[list[str]]:
        return [[e.to_string() for e in row] for row in self.entries]

    def __repr__(self):
        body = "; ".join(", ".join(e.to_string() for e in row) for row in self.entries)
        return f"SymMatrix[{body}]"

    # -- inverse via adjugate (small sizes only) -----------------------

    def det(self) -> RationalFn:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 1:
            return self.entries[0][0]
        total = RationalFn.const(0)
        sign = 1
        for j in range(n):
            minor = SymMatrix(
                [
                    [self.entries[i][k] for k in range(n) if k != j]
                    for i in range(1, n)
                ]
            )
            total = total + RationalFn.const(sign) * self.entries[0][j] * minor.det()
            sign = -sign
        return total

    def inverse(self) -> "SymMatrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        d = self.det()
        if d.is_zero:
            raise ZeroDivisionError("matrix is singular as a rational-function matrix")
        if n == 1:
            return SymMatrix([[RationalFn.const(1) / d]])
        cof = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = SymMatrix(
                    [
                        [self.entries[r][c] for c in range(n) if c != j]
                        for r in range(n) if r != i
                    ]
                )
                s = -1 if (i + j) % 2 else 1
                cof[i][j] = RationalFn.const(s) * minor.det()
        # adjugate is the transposed cofactor matrix
        return SymMatrix([[cof[j][i] / d for j in range(n)] for i in range(n)])


def _as_fn(v) -> RationalFn:
    if isinstance(v, RationalFn):
        return v
    if isinstance(v, (int, Fraction)):
        return RationalFn.const(v)
    if isinstance(v, str):
        return RationalFn.parse(v)
    raise TypeError(f"cannot interpret {v!r} as a rational function")


def _as_fn_or_none(v):
    try:
        return _as_fn(v)
    except TypeError:
        return None


def _dot(row, col) -> RationalFn:
    acc = RationalFn.const(0)
    for a, b in zip(row, col):
        if not (a.is_zero or b.is_zero):
            acc = acc + a * b
    return acc
