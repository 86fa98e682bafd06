"""Exact integer and rational polynomial arithmetic.

Polynomials are stored densely with coefficients listed from the constant
term up (low-to-high).  All arithmetic is exact: integer coefficients are
arbitrary precision and rational helpers use Fraction.  The text format
used by the CLI is comma-separated low-to-high, e.g. "-1,-1,0,1" for
x^3 - x - 1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence


def _trim(coeffs: list) -> list:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


class IntPolynomial:
    """Dense integer polynomial, immutable, low-to-high coefficients."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[int]):
        cs = [int(c) for c in coeffs]
        object.__setattr__(self, "coeffs", tuple(_trim(cs)))

    def __setattr__(self, name, value):
        raise AttributeError("IntPolynomial is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "IntPolynomial":
        parts = [p.strip() for p in text.split(",") if p.strip() != ""]
        if not parts:
            raise ValueError("empty polynomial text")
        return cls([int(p) for p in parts])

    @classmethod
    def x_power(cls, n: int, scale: int = 1) -> "IntPolynomial":
        return cls([0] * n + [scale])

    @classmethod
    def from_json(cls, obj) -> "IntPolynomial":
        if isinstance(obj, dict):
            return cls(obj["coeffs"])
        return cls(obj)

    # -- basic queries --------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial reports -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def leading(self) -> int:
        if not self.coeffs:
            return 0
        return self.coeffs[-1]

    def constant(self) -> int:
        return self.coeffs[0] if self.coeffs else 0

    def __eq__(self, other) -> bool:
        return isinstance(other, IntPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"IntPolynomial({list(self.coeffs)})"

    def to_text(self) -> str:
        return ",".join(str(c) for c in self.coeffs)

    def to_json(self) -> dict:
        return {"coeffs": list(self.coeffs)}

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPolynomial(
            [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
        )

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPolynomial(
            [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
        )

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial([-c for c in self.coeffs])

    def __mul__(self, other) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial([c * other for c in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPolynomial([])
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return IntPolynomial(out)

    __rmul__ = __mul__

    def shift(self, n: int) -> "IntPolynomial":
        """Multiply by x^n."""
        if self.is_zero():
            return self
        return IntPolynomial([0] * n + list(self.coeffs))

    def divmod_exact(self, divisor: "IntPolynomial"):
        """Polynomial division; exact over Q, returned as Fraction lists.

        For a monic divisor the quotient and remainder are integral and an
        (IntPolynomial, IntPolynomial) pair is returned.
        """
        q, r = rat_divmod([Fraction(c) for c in self.coeffs], [Fraction(c) for c in divisor.coeffs])
        if divisor.is_monic():
            return IntPolynomial([int(c) for c in q]), IntPolynomial([int(c) for c in r])
        return q, r

    def divides(self, other: "IntPolynomial") -> bool:
        """True when self divides other over Q."""
        if self.is_zero():
            return other.is_zero()
        _, r = rat_divmod(
            [Fraction(c) for c in other.coeffs], [Fraction(c) for c in self.coeffs]
        )
        return not _trim(list(r))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Horner evaluation; works for int, Fraction, float, complex."""
        acc = 0 * x if self.coeffs else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_fraction(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose_x_power(self, k: int) -> "IntPolynomial":
        """Return p(x^k)."""
        out = [0] * (self.degree * k + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[i * k] = c
        return IntPolynomial(out)

    # -- structure ------------------------------------------------------

    def content(self) -> int:
        from math import gcd

        g = 0
        for c in self.coeffs:
            g = gcd(g, abs(c))
        return g

    def primitive(self) -> "IntPolynomial":
        """Primitive part with positive leading coefficient."""
        g = self.content()
        if g == 0:
            return self
        sign = 1 if self.leading() > 0 else -1
        return IntPolynomial([c // (sign * g) for c in self.coeffs])

    def reversed_poly(self) -> "IntPolynomial":
        """x^deg * p(1/x)."""
        return IntPolynomial(list(reversed(self.coeffs)))

    def is_palindromic(self) -> bool:
        return self.coeffs == tuple(reversed(self.coeffs))

    def is_antipalindromic(self) -> bool:
        return self.coeffs == tuple(-c for c in reversed(self.coeffs))

    def gcd(self, other: "IntPolynomial") -> "IntPolynomial":
        """Primitive gcd over Z (computed monically over Q)."""
        g = rat_gcd(
            [Fraction(c) for c in self.coeffs], [Fraction(c) for c in other.coeffs]
        )
        return rat_to_primitive_int(g)

    def squarefree_part(self) -> "IntPolynomial":
        if self.is_zero():
            return self
        return rat_to_primitive_int(
            rat_divmod(
                [Fraction(c) for c in self.coeffs],
                [Fraction(c) for c in self.gcd(self.derivative()).coeffs],
            )[0]
        )

    def squarefree_decomposition(self) -> list[tuple["IntPolynomial", int]]:
        """Yun's algorithm: [(q_i, i)] with self = unit * prod q_i^i, q_i squarefree.

        The inner recurrences need exact quotients, so everything runs over
        Q; factors are primitivized only on output.
        """
        if self.is_zero() or self.degree == 0:
            return []

        def deriv(f):
            return [k * f[k] for k in range(1, len(f))]

        p = [Fraction(c) for c in self.coeffs]
        dp = deriv(p)
        a = rat_gcd(p, dp)
        b = rat_divmod(p, a)[0]
        c = rat_divmod(dp, a)[0]
        out = []
        i = 1
        while len(rat_trim(list(b))) > 1:
            d2 = [Fraction(0)] * max(len(c), len(b) - 1)
            for k, v in enumerate(c):
                d2[k] += v
            for k, v in enumerate(deriv(b)):
                d2[k] -= v
            q = rat_gcd(b, d2)
            if len(q) > 1:
                out.append((rat_to_primitive_int(q), i))
            b = rat_divmod(b, q)[0]
            c = rat_divmod(d2, q)[0]
            i += 1
        return out

    def cauchy_root_bound(self) -> Fraction:
        """All complex roots satisfy |z| <= 1 + max |c_i / lead|."""
        if self.degree < 1:
            return Fraction(0)
        lead = abs(self.leading())
        m = max(abs(c) for c in self.coeffs[:-1]) if self.degree >= 1 else 0
        return 1 + Fraction(m, lead)


def _exact_div(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    q, r = rat_divmod([Fraction(c) for c in a.coeffs], [Fraction(c) for c in b.coeffs])
    if _trim(list(r)):
        raise ArithmeticError("division not exact")
    return rat_to_primitive_int(q)


# -- rational coefficient helpers (lists of Fraction, low-to-high) ------


def rat_trim(a: list[Fraction]) -> list[Fraction]:
    while a and a[-1] == 0:
        a.pop()
    return a


def rat_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a = rat_trim([Fraction(c) for c in a])
    b = rat_trim([Fraction(c) for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    r = list(a)
    inv = 1 / b[-1]
    while len(r) >= len(b) and rat_trim(r):
        k = len(r) - len(b)
        c = r[-1] * inv
        q[k] = c
        for i, bc in enumerate(b):
            r[i + k] -= c * bc
        rat_trim(r)
    return q, r


def rat_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    """Monic gcd over Q (Euclid); gcd(0,0) = 0."""
    a = rat_trim([Fraction(c) for c in a])
    b = rat_trim([Fraction(c) for c in b])
    while b:
        _, r = rat_divmod(a, b)
        a, b = b, rat_trim(r)
    if a:
        inv = 1 / a[-1]
        a = [c * inv for c in a]
    return a


def rat_to_primitive_int(a: Sequence[Fraction]) -> IntPolynomial:
    a = rat_trim([Fraction(c) for c in a])
    if not a:
        return IntPolynomial([])
    from math import lcm

    den = 1
    for c in a:
        den = lcm(den, c.denominator)
    return IntPolynomial([int(c * den) for c in a]).primitive()


# -- resultants, composed products, cyclotomics -------------------------


def _bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free determinant of a square integer matrix."""
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def resultant(p: IntPolynomial, q: IntPolynomial) -> int:
    """Resultant via Sylvester matrix and Bareiss elimination."""
    n, m = p.degree, q.degree
    if n < 0 or m < 0:
        return 0
    if n == 0:
        return p.coeffs[0] ** m
    if m == 0:
        return q.coeffs[0] ** n
    size = n + m
    rows = []
    pc = list(reversed(p.coeffs))
    qc = list(reversed(q.coeffs))
    for i in range(m):
        rows.append([0] * i + pc + [0] * (size - n - 1 - i))
    for i in range(n):
        rows.append([0] * i + qc + [0] * (size - m - 1 - i))
    return _bareiss_det(rows)


def _interpolate_int_poly(points: list[tuple[int, int]]) -> IntPolynomial:
    """Lagrange interpolation through integer points; result must be integral."""
    xs = [Fraction(x) for x, _ in points]
    ys = [Fraction(y) for _, y in points]
    n = len(points)
    # Newton's divided differences.
    table = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - j])
    poly = [Fraction(0)] * n
    acc = [Fraction(1)]
    for j in range(n):
        for i, c in enumerate(acc):
            poly[i] += table[j] * c
        nxt = [Fraction(0)] * (len(acc) + 1)
        for i, c in enumerate(acc):
            nxt[i] -= xs[j] * c
            nxt[i + 1] += c
        acc = nxt
    out = []
    for c in rat_trim(poly):
        if c.denominator != 1:
            raise ArithmeticError("interpolation produced non-integer coefficients")
        out.append(int(c))
    return IntPolynomial(out)


def product_of_root_products(p: IntPolynomial) -> IntPolynomial:
    """Polynomial with roots a_i * a_j over all ordered root pairs of p.

    Computed as Res_y(p(y), y^d p(x/y)) by evaluation at integer points and
    interpolation, so every coefficient is exact.
    """
    d = p.degree
    if d < 1:
        raise ValueError("need degree >= 1")
    target_deg = d * d
    pts = []
    x0 = 0
    while len(pts) < target_deg + 1:
        # q(y) = y^d p(x0/y) has integer coefficients p_i * x0^i reversed.
        q = IntPolynomial([p.coeffs[d - i] * x0 ** (d - i) for i in range(d + 1)])
        if q.degree < 0:
            x0 += 1
            continue
        pts.append((x0, resultant(p, q)))
        x0 += 1
    return _interpolate_int_poly(pts)


def power_map_charpoly(p: IntPolynomial, k: int) -> IntPolynomial:
    """prod_i (x - a_i^k) for the roots a_i of monic p, exactly."""
    if not p.is_monic():
        raise ValueError("power_map_charpoly needs a monic polynomial")
    d = p.degree
    if k == 1:
        return p
    pts = []
    x0 = 0
    while len(pts) < d + 1:
        # Res_y(p(y), x0 - y^k) = prod p-root products -> prod (x0 - a_i^k)
        q = IntPolynomial([x0] + [0] * (k - 1) + [-1])
        val = resultant(p, q)
        pts.append((x0, val))
        x0 += 1
    cand = _interpolate_int_poly(pts)
    # Res over ordered pair has a fixed sign convention; normalize monic.
    if cand.leading() < 0:
        cand = -cand
    return cand


_cyclotomic_cache: dict[int, IntPolynomial] = {}


def cyclotomic(n: int) -> IntPolynomial:
    """n-th cyclotomic polynomial by recursive exact division."""
    if n in _cyclotomic_cache:
        return _cyclotomic_cache[n]
    poly = IntPolynomial([-1] + [0] * (n - 1) + [1])  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            q, r = poly.divmod_exact(cyclotomic(d))
            assert r.is_zero()
            poly = q
    _cyclotomic_cache[n] = poly
    return poly


def euler_phi(n: int) -> int:
    out = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            out -= out // p
            while m % p == 0:
                m //= p
        p += 1
    if m > 1:
        out -= out // m
    return out


def orders_with_phi_at_most(d: int) -> list[int]:
    """All n with euler_phi(n) <= d; the list is finite since phi(n) -> oo."""
    out = []
    n = 1
    # phi(n) >= sqrt(n/2), so n <= 2 d^2 + 2 is a safe cutoff.
    while n <= 2 * d * d + 2:
        if euler_phi(n) <= d:
            out.append(n)
        n += 1
    return out
