"""Number fields Q(lambda) on a power basis, with certified classification.

A NumberField pins one positive real root of a monic squarefree polynomial.
Elements are rational coordinate vectors in the power basis; all ring
arithmetic is exact.  Embeddings evaluate coordinates on certified root
enclosures, so every numeric comparison is backed by an exact interval.

Classification (Perron / weak Perron / Pisot / Salem) mixes enclosure
refinement for strict inequalities with exact algebra for ties: a
conjugate shares the modulus of lambda iff lambda^2 is a repeated root of
the polynomial whose roots are all pairwise root products, and unit-circle
conjugates are counted through the trace polynomial of the reciprocal
part.  Numbers are never decided by floating point alone.
"""

from __future__ import annotations

from fractions import Fraction

from .intervals import Interval, eval_poly_box
from .polys import (
    IntPolynomial,
    product_of_root_products,
    power_map_charpoly,
    orders_with_phi_at_most,
    rat_divmod,
    rat_to_primitive_int,
    rat_trim,
)
from .roots import RootEnclosure, solve_squarefree


class FieldConstructionError(ValueError):
    pass


class ReducibleModulusError(ArithmeticError):
    """Division hit a zero divisor; carries a proper factor of the modulus."""

    def __init__(self, factor: IntPolynomial):
        super().__init__(f"modulus splits; found factor {factor.to_text()}")
        self.factor = factor


class UnresolvedTieError(RuntimeError):
    pass


# -- finite-field degree patterns (irreducibility certificates) ----------


def _ff_trim(a, ell):
    a = [c % ell for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def _ff_divmod(a, b, ell):
    a = list(a)
    inv = pow(b[-1], -1, ell)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = a[-1] * inv % ell
        k = len(a) - len(b)
        q[k] = c
        for i, bc in enumerate(b):
            a[i + k] = (a[i + k] - c * bc) % ell
        while a and a[-1] == 0:
            a.pop()
        if len(a) < len(b):
            break
    return q, a


def _ff_gcd(a, b, ell):
    a, b = _ff_trim(a, ell), _ff_trim(b, ell)
    while b:
        _, r = _ff_divmod(a, b, ell)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, ell)
        a = [c * inv % ell for c in a]
    return a

def _ff_mulmod(a, b, m, ell):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % ell
    _, r = _ff_divmod(out, m, ell)
    return r


def _ff_pow_frobenius(h, m, ell):
    """h(x)^ell mod m over F_ell by square-and-multiply."""
    result = [1]
    base = list(h)
    e = ell
    while e:
        if e & 1:
            result = _ff_mulmod(result, base, m, ell)
        base = _ff_mulmod(base, base, m, ell)
        e >>= 1
    return result


def _degree_pattern(p: IntPolynomial, ell: int):
    """Multiset of irreducible factor degrees of p mod ell, or None if bad."""
    m = _ff_trim(list(p.coeffs), ell)
    if len(m) != p.degree + 1:
        return None  # leading coefficient vanished
    dm = _ff_trim([i * c for i, c in enumerate(m)][1:], ell)
    if len(_ff_gcd(m, dm, ell)) != 1:
        return None  # not squarefree mod ell
    degrees = []
    h = [0, 1] if len(m) > 2 else [0]
    work = m
    k = 0
    while len(work) - 1 >= 2 * (k + 1):
        k += 1
        h = _ff_pow_frobenius(h, work, ell)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] = (diff[1] - 1) % ell
        g = _ff_gcd(work, diff, ell)
        if len(g) > 1:
            degrees.extend([k] * ((len(g) - 1) // k))
            work, _ = _ff_divmod(work, g, ell)
            _, h = _ff_divmod(h, work, ell)
    if len(work) > 1:
        degrees.append(len(work) - 1)
    return degrees


def _subset_sums(degrees, total):
    mask = 1
    for d in degrees:
        mask |= mask << d
    return {k for k in range(total + 1) if (mask >> k) & 1}


_CERT_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def irreducibility_certificate(p: IntPolynomial, budget: int = 8):
    """Try to certify irreducibility over Q from factor degrees mod primes.

    Returns (status, detail) with status in {"certified", "asserted"}.
    The test is sound but incomplete: some irreducible polynomials never
    certify this way, and reducible ones never do.
    """
    d = p.degree
    if d == 1:
        return "certified", {"method": "linear"}
    possible = set(range(d + 1))
    used = []
    for ell in _CERT_PRIMES:
        if len(used) >= budget:
            break
        pattern = _degree_pattern(p, ell)
        if pattern is None:
            continue
        used.append(ell)
        possible &= _subset_sums(pattern, d)
        if possible <= {0, d}:
            return "certified", {"method": "degree_patterns", "primes": used}
    return "asserted", {"method": "degree_patterns", "primes": used}


# -- the field and its elements ------------------------------------------


class NumberField:
    """Q(lambda) for a distinguished positive real root of min_poly."""

    def __init__(self, min_poly: IntPolynomial, roots, lambda_index: int,
                 irreducibility: str, certificate=None, warnings=()):
        self.min_poly = min_poly
        self.degree = min_poly.degree
        self.roots = list(roots)
        self.lambda_index = lambda_index
        self.irreducibility = irreducibility
        self.certificate = certificate or {}
        self.warnings = list(warnings)
        # reduction rule: lambda^d = -(m_0 + m_1 l + ... + m_{d-1} l^{d-1})
        self._reduction = tuple(Fraction(-c) for c in min_poly.coeffs[:-1])

    @classmethod
    def make(cls, p: IntPolynomial, which_root="largest_real",
             eps: Fraction = Fraction(1, 1 << 40)):
        if p.degree < 1:
            raise FieldConstructionError("need degree >= 1")
        if not p.is_monic():
            raise FieldConstructionError("minimal polynomial must be monic")
        witness = p.gcd(p.derivative())
        if witness.degree > 0:
            raise FieldConstructionError(
                f"not squarefree; repeated factor {witness.to_text()}"
            )
        roots = solve_squarefree(p, eps)
        positive_real = [
            e for e in roots if e.is_real and e.real_interval().sign() == 1
        ]
        if which_root == "largest_real":
            if not positive_real:
                raise FieldConstructionError("no positive real root")
            chosen = max(positive_real, key=lambda e: e.re)
        elif isinstance(which_root, int):
            if not 0 <= which_root < len(roots):
                raise FieldConstructionError("root index out of range")
            chosen = roots[which_root]
            if not (chosen.is_real and chosen.real_interval().sign() == 1):
                raise FieldConstructionError("selected root is not real positive")
        else:
            raise FieldConstructionError(f"unknown selection rule {which_root!r}")
        status, detail = irreducibility_certificate(p)
        warnings = []
        if status == "asserted":
            warnings.append("irreducibility not certified; arithmetic may split")
        return cls(p, roots, chosen.index, status, detail, warnings)

    # --- enclosure refinement cache ---

    def refined_roots(self, eps: Fraction) -> list[RootEnclosure]:
        """Roots with radius <= eps, keeping stable indices."""
        eps = Fraction(eps)
        if all(e.radius <= eps for e in self.roots):
            return self.roots
        warm = [e.to_complex() for e in self.roots]
        fresh = solve_squarefree(self.min_poly, eps, warm=warm)
        matched = [None] * len(self.roots)
        for cand in fresh:
            home = None
            for i, old in enumerate(self.roots):
                dre = cand.re - old.re
                dim = cand.im - old.im
                rr = cand.radius + old.radius
                if dre * dre + dim * dim <= rr * rr:
                    home = i
                    break
            if home is None or matched[home] is not None:
                raise UnresolvedTieError("refinement lost track of a root")
            cand.index = home
            matched[home] = cand
        self.roots = matched
        return self.roots

    @property
    def lam_enclosure(self) -> RootEnclosure:
        return self.roots[self.lambda_index]

    # --- element constructors ---

    def element(self, coords) -> "FieldElement":
        return FieldElement(self, coords)

    def zero(self) -> "FieldElement":
        return FieldElement(self, [])

    def one(self) -> "FieldElement":
        return FieldElement(self, [1])

    def lam(self) -> "FieldElement":
        if self.degree == 1:
            return FieldElement(self, [self._reduction[0]])
        return FieldElement(self, [0, 1])

    def from_rational(self, q) -> "FieldElement":
        return FieldElement(self, [Fraction(q)])

    # --- embeddings ---

    def embed(self, elem: "FieldElement", place: int, eps: Fraction):
        """Box around the image of elem under the embedding at `place`."""
        if elem.field is not self:
            raise ValueError("element from a different field")
        eps = Fraction(eps)
        coeffs = list(elem.coords)
        scale = sum(abs(c) for c in coeffs) + 1
        target = eps
        for _ in range(200):
            root = self.refined_roots(target)[place]
            # refined enclosures can carry very long endpoint fractions;
            # dyadic outward rounding at the target scale keeps the
            # evaluation cheap without giving up the enclosure
            bits = max(16, (target.denominator // target.numerator).bit_length() + 8)
            box = eval_poly_box(coeffs, root.box().round_out(bits))
            if box.width <= eps:
                return box
            target = target / scale / 16
        raise UnresolvedTieError("embedding did not reach the requested width")

    def real_value(self, elem: "FieldElement", eps: Fraction) -> Interval:
        box = self.embed(elem, self.lambda_index, eps)
        return box.re

    def sign_of(self, elem: "FieldElement") -> int:
        """Exact sign of the image of elem at the lambda place."""
        if elem.is_zero():
            return 0
        eps = Fraction(1, 1 << 40)
        for _ in range(40):
            s = self.real_value(elem, eps).sign()
            if s is not None and s != 0:
                return s
            eps = eps * eps
        raise UnresolvedTieError("sign did not resolve; element may not be real")

    def compare(self, a: "FieldElement", b: "FieldElement") -> int:
        return self.sign_of(a - b)

    def __repr__(self):
        return f"NumberField({self.min_poly.to_text()}, lam~{float(self.lam_enclosure.re):.6g})"


class FieldElement:
    """Element of a NumberField in the power basis; always canonical."""

    __slots__ = ("field", "coords")

    def __init__(self, field: NumberField, coords):
        d = field.degree
        cs = [Fraction(c) for c in coords]
        if len(cs) > d:
            cs = self._reduce(field, cs)
        cs += [Fraction(0)] * (d - len(cs))
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "coords", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    @staticmethod
    def _reduce(field, cs):
        d = field.degree
        red = field._reduction
        for k in range(len(cs) - 1, d - 1, -1):
            c = cs[k]
            if c:
                for j, r in enumerate(red):
                    cs[k - d + j] += c * r
            cs.pop()
        return cs

    # --- ring structure ---

    def _check(self, other):
        if not isinstance(other, FieldElement):
            other = FieldElement(self.field, [Fraction(other)])
        elif other.field is not self.field:
            raise ValueError("elements from different fields")
        return other

    def __add__(self, other):
        other = self._check(other)
        return FieldElement(self.field, [a + b for a, b in zip(self.coords, other.coords)])

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        other = self._check(other)
        return FieldElement(self.field, [a - b for a, b in zip(self.coords, other.coords)])

    def __rsub__(self, other):
        return self._check(other).__sub__(self)

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.coords])

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.field, [a * other for a in self.coords])
        other = self._check(other)
        a, b = self.coords, other.coords
        prod = [Fraction(0)] * (2 * len(a) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        return FieldElement(self.field, prod)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "FieldElement":
        """Multiplicative inverse mod min_poly (extended Euclid over Q)."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        # extended gcd of coords and min_poly
        a = rat_trim(list(self.coords))
        b = [Fraction(c) for c in self.field.min_poly.coeffs]
        s0, s1 = [Fraction(1)], []
        while b:
            q, r = rat_divmod(a, b)
            # s_next = s0 - q*s1
            qs = [Fraction(0)] * (len(q) + len(s1) - 1) if q and s1 else []
            for i, qi in enumerate(q):
                if qi:
                    for j, sj in enumerate(s1):
                        qs[i + j] += qi * sj
            s_next = [Fraction(0)] * max(len(s0), len(qs))
            for i, c in enumerate(s0):
                s_next[i] += c
            for i, c in enumerate(qs):
                s_next[i] -= c
            a, b = b, rat_trim(r)
            s0, s1 = s1, rat_trim(s_next)
        if len(a) != 1:
            raise ReducibleModulusError(rat_to_primitive_int(a))
        inv_lead = 1 / a[0]
        return FieldElement(self.field, [c * inv_lead for c in s0])

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    # --- predicates and views ---

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not rational")
        return self.coords[0]

    def is_lattice_integral(self) -> bool:
        """True when all power-basis denominators are 1 (element of Z[lambda])."""
        return all(c.denominator == 1 for c in self.coords)

    def denominator(self) -> int:
        from math import lcm
        d = 1
        for c in self.coords:
            d = lcm(d, c.denominator)
        return d

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FieldElement(self.field, [Fraction(other)])
        return (
            isinstance(other, FieldElement)
            and self.field is other.field
            and self.coords == other.coords
        )

    def __lt__(self, other):
        return self.field.sign_of(self - self._check(other)) < 0

    def __le__(self, other):
        return self.field.sign_of(self - self._check(other)) <= 0

    def __gt__(self, other):
        return self.field.sign_of(self - self._check(other)) > 0

    def __ge__(self, other):
        return self.field.sign_of(self - self._check(other)) >= 0

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"FieldElement({list(self.coords)})"

    def to_json(self):
        return {
            "coords": [[c.numerator, c.denominator] for c in self.coords],
        }


def make_field(p: IntPolynomial, which_root="largest_real",
               eps: Fraction = Fraction(1, 1 << 40)) -> NumberField:
    return NumberField.make(p, which_root=which_root, eps=eps)


def field_arith(a: FieldElement, b, op: str) -> FieldElement:
    """Thin named-operation wrapper used by the command layer."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "int_scale":
        return a * int(b)
    raise ValueError(f"unknown op {op!r}")


# -- unit-circle root counting -------------------------------------------


def trace_polynomial(p: IntPolynomial) -> IntPolynomial:
    """For even palindromic p of degree 2m: t with x^m t(x + 1/x) = p(x)."""
    d = p.degree
    if d % 2 != 0 or not p.is_palindromic():
        raise ValueError("need an even-degree palindromic polynomial")
    m = d // 2
    # P_k(s) = x^k + x^{-k}: P_0 = 2, P_1 = s, P_k = s P_{k-1} - P_{k-2}
    pk_prev = IntPolynomial([2])
    pk = IntPolynomial([0, 1])
    t = IntPolynomial([p.coeffs[m]])
    for k in range(1, m + 1):
        t = t + pk * p.coeffs[m + k]
        pk_prev, pk = pk, IntPolynomial([0, 1]) * pk - pk_prev
    return t


def count_unit_circle_roots(q: IntPolynomial) -> int:
    """Exact number of roots of squarefree q with modulus exactly 1."""
    count = 0
    g = q.gcd(q.reversed_poly())
    for lin in (IntPolynomial([-1, 1]), IntPolynomial([1, 1])):
        while lin.divides(g):
            gq, _ = g.divmod_exact(lin)
            g = gq
            count += 1
    if g.degree < 2:
        return count
    if g.leading() < 0:
        g = -g
    if not g.is_palindromic():
        # reciprocal-closed part should be palindromic after stripping +-1
        raise ValueError("unexpected reciprocal structure")
    t = trace_polynomial(g)
    eps = Fraction(1, 1 << 40)
    pending = solve_squarefree(t, eps)
    for _ in range(40):
        still = []
        for e in pending:
            # non-real trace values correspond to off-circle quadruples
            if e.is_real:
                iv = e.real_interval()
                if -2 < iv.lo and iv.hi < 2:
                    count += 2
                    continue
                if iv.lo > 2 or iv.hi < -2:
                    continue
                still.append(e)
        if not still:
            return count
        eps = eps * eps
        refreshed = solve_squarefree(t, eps)
        pending = []
        for old in still:
            for cand in refreshed:
                dre = cand.re - old.re
                dim = cand.im - old.im
                rr = cand.radius + old.radius
                if dre * dre + dim * dim <= rr * rr:
                    pending.append(cand)
                    break
    raise UnresolvedTieError("unit-circle count did not resolve")


# -- classification ------------------------------------------------------


class PerronClass:
    """Most specific label plus implied flags and the least Perron power."""

    __slots__ = ("kind", "weak_perron_k", "tie_count", "is_perron",
                 "is_weak_perron", "is_pisot", "is_salem")

    def __init__(self, kind, weak_perron_k=None, tie_count=1):
        self.kind = kind
        self.weak_perron_k = weak_perron_k
        self.tie_count = tie_count
        self.is_pisot = kind == "Pisot"
        self.is_salem = kind == "Salem"
        self.is_perron = kind in ("Pisot", "Salem", "Perron")
        self.is_weak_perron = self.is_perron or kind == "WeakPerron"

    def __repr__(self):
        if self.kind == "WeakPerron":
            return f"PerronClass(WeakPerron, k={self.weak_perron_k})"
        return f"PerronClass({self.kind})"

    def to_json(self):
        return {
            "kind": self.kind,
            "weak_perron_k": self.weak_perron_k,
            "is_perron": self.is_perron,
            "is_weak_perron": self.is_weak_perron,
            "is_pisot": self.is_pisot,
            "is_salem": self.is_salem,
        }


def _multiplicity_at(field: NumberField, q: IntPolynomial, value: FieldElement) -> int:
    """Multiplicity of `value` as a root of q, by exact field evaluation."""
    mult = 0
    while q.degree >= 0:
        acc = field.zero()
        for c in reversed(q.coeffs):
            acc = acc * value + c
        if not acc.is_zero():
            return mult
        mult += 1
        q = q.derivative()
    return mult


def _tie_indices(field: NumberField) -> list[int]:
    """Indices of conjugates whose modulus equals lambda exactly.

    Pairs (i, j) with root_i * root_j = lambda^2 are narrowed by interval
    refinement until exactly t remain, t being the exact multiplicity of
    lambda^2 in the pairwise-product polynomial; index i is a tie iff the
    surviving pairs include (i, conj(i)).
    """
    p = field.min_poly
    d = field.degree
    q = product_of_root_products(p)
    lam = field.lam()
    t = _multiplicity_at(field, q, lam * lam)
    eps = Fraction(1, 1 << 40)
    for _ in range(40):
        roots = field.refined_roots(eps)
        lam2 = field.lam_enclosure.real_interval().square()
        survivors = []
        for i in range(d):
            bi = roots[i].box()
            for j in range(d):
                prod = bi * roots[j].box()
                if prod.im.contains(Fraction(0)) and prod.re.overlaps(lam2):
                    survivors.append((i, j))
        if len(survivors) == t:
            conj = {e.index: (e.conj_index if e.conj_index is not None else e.index)
                    for e in roots}
            pairs = set(survivors)
            return [i for i in range(d) if (i, conj[i]) in pairs and i != field.lambda_index]
        if len(survivors) < t:
            raise UnresolvedTieError("tie pair count undershot its multiplicity")
        eps = eps * eps
    raise UnresolvedTieError("modulus ties did not resolve")


def classify(field: NumberField) -> PerronClass:
    """Most specific Perron-type label for the field's distinguished root."""
    p = field.min_poly
    d = field.degree
    if d == 1:
        n = -p.coeffs[0]
        if n >= 2:
            return PerronClass("Pisot", 1)
        if n == 1:
            return PerronClass("Perron", 1)
        return PerronClass("NonePositiveRealDominant")

    li = field.lambda_index
    # pass 1: try to settle every modulus comparison by refinement alone
    ties = None
    eps = Fraction(1, 1 << 40)
    for attempt in range(40):
        roots = field.refined_roots(eps)
        lam2 = field.lam_enclosure.real_interval().square()
        ambiguous = []
        for e in roots:
            if e.index == li:
                continue
            m2 = e.box().modulus_squared()
            if m2 > lam2:
                return PerronClass("NonePositiveRealDominant")
            if not (m2 < lam2):
                ambiguous.append(e.index)
        if not ambiguous:
            ties = []
            break
        if attempt == 1:
            # persistent ambiguity: identify exact ties algebraically; the
            # remaining comparisons are genuinely strict and must resolve
            ties = _tie_indices(field)
        if ties is not None and set(ambiguous) <= set(ties):
            break
        eps = eps * eps
    else:
        raise UnresolvedTieError("dominance comparisons did not resolve")
    if ties:
        tie_count = len(ties) + 1
        k = _least_perron_power(field, tie_count)
        return PerronClass("WeakPerron", k, tie_count)

    # strict dominance everywhere: Perron; refine to Pisot / Salem
    u = count_unit_circle_roots(p)
    if u == 0:
        eps3 = Fraction(1, 1 << 40)
        one = Interval(Fraction(1))
        for _ in range(40):
            roots = field.refined_roots(eps3)
            inside = outside = pending = 0
            for e in roots:
                if e.index == li:
                    continue
                m2 = e.box().modulus_squared()
                if m2 < one:
                    inside += 1
                elif m2 > one:
                    outside += 1
                else:
                    pending += 1
            if pending == 0:
                if outside == 0:
                    return PerronClass("Pisot", 1)
                return PerronClass("Perron", 1)
            eps3 = eps3 * eps3
        raise UnresolvedTieError("unit-circle comparisons did not resolve")
    if p.is_palindromic() and d >= 4 and u == d - 2:
        return PerronClass("Salem", 1)
    return PerronClass("Perron", 1)


def _least_perron_power(field: NumberField, tie_count: int) -> int:
    """Least k with lambda^k Perron: all ties must collapse onto lambda^k."""
    d = field.degree
    bound = max(orders_with_phi_at_most(d))
    lam = field.lam()
    for k in range(2, bound + 1):
        ck = power_map_charpoly(field.min_poly, k)
        if _multiplicity_at(field, ck, lam ** k) == tie_count:
            return k
    raise UnresolvedTieError(f"no Perron power found up to {bound}")


# -- Mahler measure ------------------------------------------------------


def mahler_measure(p: IntPolynomial, eps: Fraction = Fraction(1, 10**6)) -> Interval:
    """Certified enclosure of |lc| * prod max(1, |root|), width <= eps.

    Each squarefree factor's exact count of unit-modulus roots is computed
    first, so the refinement loop knows which enclosures contribute exactly
    1 and which must separate from the unit circle.
    """
    if p.is_zero():
        raise ValueError("zero polynomial")
    eps = Fraction(eps)
    factors = [
        (q, mult, count_unit_circle_roots(q))
        for q, mult in p.squarefree_decomposition()
        if q.degree > 0
    ]
    one = Interval(Fraction(1))
    solve_eps = Fraction(1, 1 << 40)
    for _ in range(40):
        product = Interval(Fraction(abs(p.coeffs[-1])))
        ok = True
        for q, mult, u in factors:
            enclosures = solve_squarefree(q, solve_eps)
            undecided = [e for e in enclosures
                         if e.modulus_interval().contains(Fraction(1))]
            if len(undecided) != u:
                ok = False
                break
            contrib = Interval(Fraction(1))
            for e in enclosures:
                m = e.modulus_interval()
                if m.contains(Fraction(1)):
                    continue  # certified on-circle; contributes 1
                if m > one:
                    contrib = contrib * m
            product = product * contrib ** mult
        if ok and product.width <= eps:
            return product
        solve_eps = solve_eps * solve_eps
    raise UnresolvedTieError("mahler measure did not converge")
