"""Certified complex root enclosures for integer polynomials.

Strategy: Aberth-Ehrlich simultaneous iteration produces approximations
(double precision first, escalating mpmath precision as needed), then an
exact a-posteriori bound certifies disks.  For a squarefree polynomial of
degree n and any point z with p'(z) != 0, the disk around z of radius
n*|p(z)/p'(z)| contains at least one root; n pairwise disjoint disks must
then contain exactly one root each.  All certification arithmetic is
exact rational, so the floating point stage only supplies candidates.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np

from . import _kernels
from .intervals import ComplexBox, Interval, sqrt_upper
from .polys import IntPolynomial


class PrecisionError(Exception):
    """Raised when escalation hits the precision budget without certifying."""


class RootEnclosure:
    """One certified root disk of a squarefree polynomial.

    center is exact rational (re, im); the closed disk of the given radius
    contains exactly one root of `poly`.  For real roots the center is on
    the real axis; radius 0 marks an exactly known rational root.
    """

    __slots__ = ("poly", "re", "im", "radius", "is_real", "multiplicity", "conj_index", "index")

    def __init__(self, poly, re, im, radius, is_real, multiplicity=1, conj_index=None, index=0):
        self.poly = poly
        self.re = Fraction(re)
        self.im = Fraction(im)
        self.radius = Fraction(radius)
        self.is_real = is_real
        self.multiplicity = multiplicity
        self.conj_index = conj_index
        self.index = index

    def box(self) -> ComplexBox:
        return ComplexBox(
            Interval(self.re - self.radius, self.re + self.radius),
            Interval(self.im - self.radius, self.im + self.radius),
        )

    def real_interval(self) -> Interval:
        if not self.is_real:
            raise ValueError("not a real root")
        return Interval(self.re - self.radius, self.re + self.radius)

    def modulus_interval(self) -> Interval:
        return self.box().modulus()

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        kind = "real" if self.is_real else "complex"
        return f"RootEnclosure({self.to_complex():.12g}, r<={float(self.radius):.3g}, {kind})"


def _mpf_to_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)
    sign, man, exp, _ = x._mpf_
    # man may be a gmpy2 integer depending on the mpmath backend; force a
    # plain int so downstream arithmetic never leaves stdlib types
    man = int(man)
    exp = int(exp)
    if man == 0:
        return Fraction(0)
    v = Fraction(man << exp) if exp >= 0 else Fraction(man, 1 << -exp)
    return -v if sign else v


def _eval_rational_complex(poly: IntPolynomial, re: Fraction, im: Fraction):
    """Exact Horner evaluation at re + im*i; returns (re, im) Fractions."""
    ar, ai = Fraction(0), Fraction(0)
    for c in reversed(poly.coeffs):
        ar, ai = ar * re - ai * im + c, ar * im + ai * re
    return ar, ai


def _eval_int_complex(coeffs, a, b, den):
    """Exact Horner at (a + b*i)/den for integers a, b, den; returns
    (re, im, scale) with the value equal to (re + im*i)/scale."""
    ar, ai = coeffs[-1], 0
    scale = 1
    for c in reversed(coeffs[:-1]):
        scale *= den
        ar, ai = ar * a - ai * b + c * scale, ar * b + ai * a
    return ar, ai, scale


def _certified_radius(poly: IntPolynomial, dpoly: IntPolynomial, re: Fraction, im: Fraction):
    """Exact upper bound n*|p(z)/p'(z)|, or None when p'(z) = 0.

    Centers come from floats or mpf ladders, so their denominators share
    powers of two; scaled integer Horner keeps the evaluation exact while
    avoiding per-step rational normalization."""
    n = poly.degree
    dre = int(re.denominator)
    dim = int(im.denominator)
    den = dre // math.gcd(dre, dim) * dim
    a = int(re.numerator) * (den // dre)
    b = int(im.numerator) * (den // dim)
    pr, pi, ps = _eval_int_complex(poly.coeffs, a, b, den)
    if pr == 0 and pi == 0:
        return Fraction(0)
    dr, di, ds = _eval_int_complex(dpoly.coeffs, a, b, den)
    if dr == 0 and di == 0:
        return None
    p2 = Fraction(pr * pr + pi * pi, ps * ps)
    d2 = Fraction(dr * dr + di * di, ds * ds)
    r = sqrt_upper(Fraction(n * n) * p2 / d2)
    if r == 0:
        return r
    # round the bound outward to a short dyadic (16 guard bits relative
    # precision) so the disjointness and conjugate-pairing checks
    # downstream stay cheap
    bits = max(64, r.denominator.bit_length() - r.numerator.bit_length() + 16)
    return Fraction(-((-r.numerator << bits) // r.denominator), 1 << bits)


def _initial_guesses(poly: IntPolynomial) -> np.ndarray:
    n = poly.degree
    radius = float(poly.cauchy_root_bound()) * 0.8 + 0.1
    angles = 2.0 * np.pi * (np.arange(n) + 0.25) / n + 0.45
    radii = radius * (0.4 + 0.6 * (np.arange(n) + 1.0) / n)
    return (radii * np.exp(1j * angles)).astype(np.complex128)


def _aberth_mpmath(poly: IntPolynomial, z0: list, prec: int, iters: int = 400):
    """Aberth iteration in mpmath at `prec` bits, warm-started from z0."""
    with mpmath.workprec(prec):
        coeffs = [mpmath.mpf(c) for c in poly.coeffs]
        d = poly.degree
        z = [mpmath.mpc(v) for v in z0]
        tol = mpmath.mpf(2) ** (-prec + 6)
        for _ in range(iters):
            maxcorr = mpmath.mpf(0)
            for i in range(d):
                zi = z[i]
                p = coeffs[d]
                dp = mpmath.mpc(0)
                for k in range(d - 1, -1, -1):
                    dp = dp * zi + p
                    p = p * zi + coeffs[k]
                if p == 0:
                    continue
                if dp == 0:
                    z[i] = zi + mpmath.mpf("1e-7") * (1 + abs(zi))
                    maxcorr = mpmath.mpf(1)
                    continue
                w = p / dp
                s = mpmath.mpc(0)
                for j in range(d):
                    if j != i:
                        dz = zi - z[j]
                        if dz == 0:
                            dz = mpmath.mpf("1e-30")
                        s += 1 / dz
                denom = 1 - w * s
                corr = w if denom == 0 else w / denom
                z[i] = zi - corr
                maxcorr = max(maxcorr, abs(corr))
            if maxcorr < tol * (1 + abs(z[0])):
                break
        return z


def _try_certify(poly: IntPolynomial, centers, eps: Fraction):
    """Certify candidate centers: returns enclosure list or None."""
    n = poly.degree
    dpoly = poly.derivative()
    encs = []
    for re, im in centers:
        r = _certified_radius(poly, dpoly, re, im)
        if r is None or r > eps:
            return None
        encs.append((re, im, r))
    # pairwise disjoint?
    for i in range(n):
        for j in range(i + 1, n):
            dre = encs[i][0] - encs[j][0]
            dim = encs[i][1] - encs[j][1]
            rr = encs[i][2] + encs[j][2]
            if dre * dre + dim * dim <= rr * rr:
                return None
    # conjugate pairing / realness (coefficients are real)
    boxes = [
        ComplexBox(Interval(re - r, re + r), Interval(im - r, im + r)) for re, im, r in encs
    ]
    out = []
    conj = [None] * n
    for i, (re, im, r) in enumerate(encs):
        cbox = boxes[i].conj()
        hits = [j for j in range(n) if cbox.overlaps(boxes[j])]
        if len(hits) != 1:
            return None
        if hits[0] == i:
            # real root: project the center onto the axis (the root stays
            # within the same radius) and try an exact rational snap
            snapped = None
            for dmax in (1, 1000, 10**9):
                cand = Fraction(re).limit_denominator(dmax)
                if abs(cand - re) <= r and poly.eval_fraction(cand) == 0:
                    snapped = cand
                    break
            if snapped is not None:
                out.append(RootEnclosure(poly, snapped, 0, 0, True, index=i))
            else:
                out.append(RootEnclosure(poly, re, 0, r, True, index=i))
        else:
            conj[i] = hits[0]
            out.append(RootEnclosure(poly, re, im, r, False, conj_index=hits[0], index=i))
    # projection onto the real axis moves centers, so disjointness of the
    # final disks must be rechecked; escalation handles any failure
    for i in range(n):
        for j in range(i + 1, n):
            dre = out[i].re - out[j].re
            dim = out[i].im - out[j].im
            rr = out[i].radius + out[j].radius
            if dre * dre + dim * dim <= rr * rr:
                return None
    return out


def solve_squarefree(poly: IntPolynomial, eps: Fraction, warm=None) -> list[RootEnclosure]:
    """All roots of a squarefree polynomial as certified enclosures."""
    poly = poly.primitive()
    n = poly.degree
    if n <= 0:
        return []
    if n == 1:
        r = Fraction(-poly.coeffs[0], poly.coeffs[1])
        return [RootEnclosure(poly, r, 0, 0, True, index=0)]
    eps = Fraction(eps)

    if warm is None:
        z = _initial_guesses(poly)
        coeffs = np.array([float(c) for c in poly.coeffs], dtype=np.complex128)
        if np.all(np.isfinite(coeffs)):
            _kernels.aberth_kernel(coeffs, z, 600, 1e-15)
        centers = [(Fraction(v.real), Fraction(v.imag)) for v in z]
        got = _try_certify(poly, centers, eps)
        if got is not None:
            return _sorted(got)
        warm = [complex(float(re), float(im)) for re, im in centers]

    prec = 106
    while prec <= 4 * 4096:
        z = _aberth_mpmath(poly, warm, prec)
        centers = [(_mpf_to_fraction(v.real), _mpf_to_fraction(v.imag)) for v in z]
        got = _try_certify(poly, centers, eps)
        if got is not None:
            return _sorted(got)
        warm = z
        prec *= 2
    raise PrecisionError(
        f"could not certify roots of {poly.to_text()} at eps~{float(eps):.3g}"
    )


def _sorted(encs: list[RootEnclosure]) -> list[RootEnclosure]:
    out = sorted(encs, key=lambda e: (e.re, e.im))
    for i, e in enumerate(out):
        e.index = i
    # re-derive conjugate partners after sorting
    for i, e in enumerate(out):
        if e.is_real:
            e.conj_index = None
            continue
        cbox = e.box().conj()
        for j, f in enumerate(out):
            if j != i and cbox.overlaps(f.box()):
                e.conj_index = j
                break
    return out


def poly_roots(poly: IntPolynomial, eps: Fraction = Fraction(1, 1 << 40)) -> list[RootEnclosure]:
    """Certified enclosures for all roots of any nonzero polynomial.

    Multiple roots are reduced via squarefree decomposition; each
    enclosure carries the multiplicity of its root in the input.
    """
    if poly.is_zero():
        raise ValueError("zero polynomial has no well-defined roots")
    out = []
    for factor, mult in poly.squarefree_decomposition():
        for enc in solve_squarefree(factor, eps):
            enc.multiplicity = mult
            out.append(enc)
    out.sort(key=lambda e: (e.re, e.im))
    for i, e in enumerate(out):
        e.index = i
    return out


def refine_enclosure(enc: RootEnclosure, eps: Fraction) -> RootEnclosure:
    """Shrink an enclosure below eps; the result encloses the same root."""
    eps = Fraction(eps)
    if enc.radius <= eps:
        return enc
    fresh = solve_squarefree(enc.poly, eps)
    for cand in fresh:
        dre = cand.re - enc.re
        dim = cand.im - enc.im
        rr = enc.radius + cand.radius
        if dre * dre + dim * dim <= rr * rr and cand.is_real == enc.is_real:
            cand.multiplicity = enc.multiplicity
            return cand
    raise PrecisionError("refined enclosure did not match the original disk")
