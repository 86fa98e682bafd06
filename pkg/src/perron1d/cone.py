"""Lambda-invariant rational cones and their nonnegative transition matrices.

A Perron number lam acts on the lattice Z[lam] by multiplication.  Under
the place embeddings this action expands the dominant coordinate faster
than every other one, so the dominance region

    K = {x : |sigma(x)| < v(x) for every non-dominant place sigma}

(v = the dominant real embedding) is an open convex cone with
lam * K contained in K.  This module wedges a rational polyhedral cone
between lam * K and K, certifies the sandwich with exact arithmetic,
enumerates a finite generating set for the lattice points inside the
cone, and writes multiplication by lam as a nonnegative integer matrix
on those generators.  The matrix has the dominant values of the
generators as an exact positive left eigenvector for lam.
"""

from __future__ import annotations

import itertools
import math
import sys
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .field import NumberField, classify
from .intervals import ComplexBox, Interval
from .plmap import charpoly, spectral
from .polys import IntPolynomial

Coords = Tuple[int, ...]

# precision ladder for the certified linear algebra over root enclosures
_EPS_LADDER = (Fraction(1, 1 << 60), Fraction(1, 1 << 140), Fraction(1, 1 << 280))

# slack factor between the float coverage test and the exact certificate
_COVER_SLACK = 1.02

_CIRCLE_SAMPLES = 24


class ConeError(ValueError):
    """A cone or generating set could not be certified."""


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _other_places(field: NumberField) -> List[int]:
    """Non-dominant place indices, one representative per conjugate pair."""
    reps = []
    for enc in field.roots:
        if enc.index == field.lambda_index:
            continue
        if not enc.is_real and enc.conj_index is not None and enc.conj_index < enc.index:
            continue
        reps.append(enc.index)
    return reps


def _primitive(vec: Sequence[int]) -> Coords:
    g = 0
    for x in vec:
        g = math.gcd(g, abs(x))
    if g == 0:
        return tuple(int(x) for x in vec)
    return tuple(int(x) // g for x in vec)


def _kernel_vector(rows: Sequence[Sequence[int]], d: int) -> Optional[Coords]:
    """Primitive integer spanning vector of the kernel of a rank d-1 system."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots: List[int] = []
    r = 0
    for col in range(d):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][col]
        m[r] = [x / inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    if r != d - 1:
        return None
    free = next(c for c in range(d) if c not in pivots)
    vec = [Fraction(0)] * d
    vec[free] = Fraction(1)
    for i, col in enumerate(pivots):
        vec[col] = -m[i][free]
    den = math.lcm(*[f.denominator for f in vec])
    ints = _primitive([int(f * den) for f in vec])
    lead = next(x for x in ints if x != 0)
    if lead < 0:
        ints = tuple(-x for x in ints)
    return ints


def _facet_normals(rays: Sequence[Coords], d: int) -> Tuple[Coords, ...]:
    """Supporting hyperplanes through d-1 rays, oriented nonnegative."""
    normals = set()
    for subset in itertools.combinations(rays, d - 1):
        n = _kernel_vector(subset, d)
        if n is None:
            continue
        dots = [_dot(n, r) for r in rays]
        if all(t >= 0 for t in dots) and any(t > 0 for t in dots):
            normals.add(n)
        elif all(t <= 0 for t in dots) and any(t < 0 for t in dots):
            normals.add(tuple(-a for a in n))
    if not normals:
        raise ConeError("ray set has no supporting facets")
    return tuple(sorted(normals))


def _nonneg_combination(vectors: Sequence[Coords],
                        target: Sequence[int]) -> Optional[Tuple[Fraction, ...]]:
    """Phase-one simplex with Bland's rule, exact over the rationals."""
    d = len(target)
    m = len(vectors)
    tab = []
    basis = []
    for j in range(d):
        sgn = -1 if target[j] < 0 else 1
        row = [Fraction(sgn * v[j]) for v in vectors]
        row += [Fraction(1 if k == j else 0) for k in range(d)]
        row.append(Fraction(sgn * target[j]))
        tab.append(row)
        basis.append(m + j)
    while True:
        entering = None
        for k in range(m + d):
            if k in basis:
                continue
            cost = Fraction(1 if k >= m else 0)
            reduced = cost - sum(tab[j][k] for j in range(d) if basis[j] >= m)
            if reduced < 0:
                entering = k
                break
        if entering is None:
            break
        leaving = None
        best = None
        for j in range(d):
            if tab[j][entering] > 0:
                ratio = tab[j][-1] / tab[j][entering]
                if best is None or ratio < best or (
                        ratio == best and basis[j] < basis[leaving]):
                    best = ratio
                    leaving = j
        if leaving is None:
            return None
        piv = tab[leaving][entering]
        tab[leaving] = [x / piv for x in tab[leaving]]
        for j in range(d):
            if j != leaving and tab[j][entering] != 0:
                f = tab[j][entering]
                tab[j] = [a - f * b for a, b in zip(tab[j], tab[leaving])]
        basis[leaving] = entering
    if sum(tab[j][-1] for j in range(d) if basis[j] >= m) != 0:
        return None
    out = [Fraction(0)] * m
    for j in range(d):
        if basis[j] < m:
            out[basis[j]] = tab[j][-1]
    return tuple(out)


def _box_det(m: List[List[ComplexBox]]) -> ComplexBox:
    n = len(m)
    if n == 1:
        return m[0][0]
    acc = None
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _box_det(minor)
        if j % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _power_boxes(box: ComplexBox, d: int) -> List[ComplexBox]:
    out = [ComplexBox(Interval(Fraction(1), Fraction(1)),
                      Interval(Fraction(0), Fraction(0)))]
    for _ in range(d - 1):
        out.append(out[-1] * box)
    return out


def _solve_transposed(boxes: List[ComplexBox], phi: Sequence[int],
                      d: int) -> Optional[List[ComplexBox]]:
    """Certified solve of sum_p root_p^j psi_p = phi_j by Cramer's rule."""
    powers = [_power_boxes(b, d) for b in boxes]
    mat = [[powers[p][j] for p in range(d)] for j in range(d)]
    det = _box_det(mat)
    if det.contains_zero():
        return None
    inv = det.inverse()
    psi = []
    for p in range(d):
        col = [[mat[j][q] if q != p else ComplexBox(
            Interval(Fraction(phi[j]), Fraction(phi[j])),
            Interval(Fraction(0), Fraction(0))) for q in range(d)]
            for j in range(d)]
        psi.append(_box_det(col) * inv)
    return psi


def _contraction_ratios(field: NumberField,
                        eps: Fraction) -> Optional[Dict[int, Fraction]]:
    """Upper bounds on |sigma(lam)| / lam per non-dominant place, all < 1."""
    roots = field.refined_roots(eps)
    lam_lo = roots[field.lambda_index].real_interval().lo
    if lam_lo <= 0:
        return None
    out = {}
    for p in _other_places(field):
        r = roots[p].modulus_interval().hi / lam_lo
        if r >= 1:
            return None
        out[p] = r
    return out


def _strictly_dominant(field: NumberField, coords: Coords) -> bool:
    """Certify that the dominant value strictly exceeds every other place."""
    elem = field.element([Fraction(c) for c in coords])
    for eps in _EPS_LADDER:
        val = field.real_value(elem, eps)
        if val.lo <= 0:
            if val.hi <= 0:
                return False
            continue
        ok = True
        for p in _other_places(field):
            if field.embed(elem, p, eps).modulus().hi >= val.lo:
                ok = False
                break
        if ok:
            return True
    return False


def _certify_invariance(field: NumberField, facets: Sequence[Coords]) -> None:
    """Prove every facet functional nonnegative on the closure of lam * K."""
    d = field.degree
    reps = _other_places(field)
    for eps in _EPS_LADDER:
        ratios = _contraction_ratios(field, eps)
        if ratios is None:
            continue
        boxes = [r.box() for r in field.refined_roots(eps)]
        ok = True
        for phi in facets:
            psi = _solve_transposed(boxes, phi, d)
            if psi is None:
                ok = False
                break
            low = psi[field.lambda_index].re.lo
            for p in reps:
                weight = 1 if field.roots[p].is_real else 2
                low -= weight * ratios[p] * psi[p].modulus().hi
            if low < 0:
                ok = False
                break
        if ok:
            return
    raise ConeError("invariance certificate failed for the facet functionals")


def _inverse_row_bounds(field: NumberField) -> List[Fraction]:
    """Row sums of |V^-1| for the place matrix V[p][j] = root_p^j."""
    d = field.degree
    for eps in _EPS_LADDER:
        boxes = [r.box() for r in field.refined_roots(eps)]
        powers = [_power_boxes(b, d) for b in boxes]
        mat = [[powers[p][j] for j in range(d)] for p in range(d)]
        det = _box_det(mat)
        det_lo = det.modulus().lo
        if det_lo <= 0:
            continue
        out = []
        for i in range(d):
            total = Fraction(0)
            for p in range(d):
                minor = [[mat[q][j] for j in range(d) if j != i]
                         for q in range(d) if q != p]
                total += _box_det(minor).modulus().hi if minor else Fraction(1)
            out.append(total / det_lo)
        return out
    raise ConeError("place matrix is numerically singular")


def _cross_targets(field: NumberField, reps: Sequence[int],
                   ratios: Dict[int, float]) -> List[Tuple[float, ...]]:
    """Sample points of the lam * K cross-section that the hull must cover."""
    per_place = []
    for p in reps:
        r = ratios[p] * _COVER_SLACK
        if field.roots[p].is_real:
            per_place.append([(-r,), (r,)])
        else:
            per_place.append([(r * math.cos(2 * math.pi * k / _CIRCLE_SAMPLES),
                               r * math.sin(2 * math.pi * k / _CIRCLE_SAMPLES))
                              for k in range(_CIRCLE_SAMPLES)])
    targets = []
    for combo in itertools.product(*per_place):
        targets.append(tuple(itertools.chain.from_iterable(combo)))
    return targets


def _expands(points: List[Tuple[float, ...]],
             cand: Tuple[float, ...]) -> bool:
    """Whether cand lies outside the convex hull of the points."""
    udim = len(cand)
    if udim == 1:
        if not points:
            return True
        lo = min(p[0] for p in points)
        hi = max(p[0] for p in points)
        return not lo <= cand[0] <= hi
    if len(points) < udim + 1:
        return True
    from scipy.spatial import ConvexHull, QhullError
    try:
        hull = ConvexHull(np.array(points, dtype=float))
    except (QhullError, ValueError):
        return True
    vals = np.array(cand) @ hull.equations[:, :-1].T + hull.equations[:, -1]
    return bool(np.any(vals > -1e-12))


def _covers(points: List[Tuple[float, ...]],
            targets: List[Tuple[float, ...]]) -> bool:
    if not points:
        return False
    udim = len(points[0])
    if udim == 1:
        lo = min(p[0] for p in points)
        hi = max(p[0] for p in points)
        return all(lo <= t[0] <= hi for t in targets)
    if len(points) < udim + 1:
        return False
    from scipy.spatial import ConvexHull, QhullError
    try:
        hull = ConvexHull(np.array(points, dtype=float))
    except (QhullError, ValueError):
        return False
    eqs = hull.equations
    arr = np.array(targets, dtype=float)
    vals = arr @ eqs[:, :-1].T + eqs[:, -1]
    return bool(np.all(vals <= -1e-9))


def _search_rays(field: NumberField, tightness: Fraction) -> List[Coords]:
    """Small primitive lattice vectors whose hull swallows lam * K."""
    d = field.degree
    lam_idx = field.lambda_index
    reps = _other_places(field)
    roots_c = [enc.to_complex() for enc in field.roots]
    lam_f = roots_c[lam_idx].real
    ratios = {p: abs(roots_c[p]) / lam_f for p in reps}
    admit = {p: r + float(tightness) * (1.0 - r) for p, r in ratios.items()}
    targets = _cross_targets(field, reps, ratios)
    lam_pow = np.array([lam_f ** j for j in range(d)])
    sig_pow = {p: np.array([roots_c[p] ** j for j in range(d)]) for p in reps}

    for cap in (4, 8, 12):
        axes = [np.arange(-cap, cap + 1)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        v = grid @ lam_pow
        mask = v > 1e-9
        uparts = {}
        for p in reps:
            z = grid @ sig_pow[p]
            mask &= np.abs(z) <= admit[p] * np.maximum(v, 1e-300) * (1 + 1e-12)
            uparts[p] = z
        idx = np.nonzero(mask)[0]
        cands = []
        seen = set()
        for i in idx:
            coords = _primitive(grid[i])
            if coords in seen or all(c == 0 for c in coords):
                continue
            seen.add(coords)
            vv = float(np.dot(coords, lam_pow))
            u: List[float] = []
            for p in reps:
                z = complex(np.dot(coords, sig_pow[p]))
                if field.roots[p].is_real:
                    u.append(z.real / vv)
                else:
                    u.extend((z.real / vv, z.imag / vv))
            cands.append((vv, coords, tuple(u)))
        cands.sort(key=lambda t: (t[0], t[1]))
        sel: List[Tuple[float, Coords, Tuple[float, ...]]] = []
        for item in cands:
            if any(max(abs(a - b) for a, b in zip(item[2], s[2])) < 1e-6
                   for s in sel):
                continue
            # only points outside the current hull can improve coverage
            if not _expands([s[2] for s in sel], item[2]):
                continue
            sel.append(item)
            if len(sel) > 128:
                break
            if len(sel) >= 2 and _covers([s[2] for s in sel], targets):
                for drop in sorted(sel, key=lambda t: -t[0]):
                    trial = [s for s in sel if s is not drop]
                    if _covers([s[2] for s in trial], targets):
                        sel = trial
                return sorted(s[1] for s in sel)
    raise ConeError("no spanning ray set within the search budget")


def _contraction_map(field: NumberField, reps: Sequence[int]) -> np.ndarray:
    """Action of multiplication by lam on the normalized place coordinates."""
    roots_c = [enc.to_complex() for enc in field.roots]
    lam_f = roots_c[field.lambda_index].real
    blocks = []
    for p in reps:
        z = roots_c[p] / lam_f
        if field.roots[p].is_real:
            blocks.append(np.array([[z.real]]))
        else:
            blocks.append(np.array([[z.real, -z.imag], [z.imag, z.real]]))
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    at = 0
    for b in blocks:
        k = b.shape[0]
        out[at:at + k, at:at + k] = b
        at += k
    return out


def _hull_inside(points: List[Tuple[float, ...]], queries: np.ndarray,
                 margin: float = 1e-7) -> bool:
    """Whether every query point sits inside the hull with a margin."""
    if not points:
        return False
    udim = len(points[0])
    if udim == 1:
        lo = min(p[0] for p in points)
        hi = max(p[0] for p in points)
        return all(lo + margin <= q[0] <= hi - margin for q in queries)
    if len(points) < udim + 1:
        return False
    from scipy.spatial import ConvexHull, QhullError
    try:
        hull = ConvexHull(np.array(points, dtype=float))
    except (QhullError, ValueError):
        return False
    vals = queries @ hull.equations[:, :-1].T + hull.equations[:, -1]
    return bool(np.all(vals <= -margin))


def _search_invariant_rays(field: NumberField,
                           tightness: Fraction) -> List[Coords]:
    """Rays whose hull absorbs its own image under multiplication by lam.

    Used when no small ray set swallows the whole image cone: places
    with nearly equal moduli correlate the coordinates of small lattice
    vectors, so the full sandwich needs impractically long rays.  A cone
    that merely maps into itself keeps every later certificate intact.
    """
    d = field.degree
    lam_idx = field.lambda_index
    reps = _other_places(field)
    roots_c = [enc.to_complex() for enc in field.roots]
    lam_f = roots_c[lam_idx].real
    ratios = {p: abs(roots_c[p]) / lam_f for p in reps}
    admit = {p: r + float(tightness) * (1.0 - r) for p, r in ratios.items()}
    kmap = _contraction_map(field, reps)
    lam_pow = np.array([lam_f ** j for j in range(d)])
    sig_pow = {p: np.array([roots_c[p] ** j for j in range(d)]) for p in reps}

    # an image may land exactly on a face of the hull, so the float test
    # tolerates the boundary and the exact simplex below is the authority
    tol = -1e-9

    def absorbs(sel):
        pts = [s[2] for s in sel]
        if len(pts) <= len(pts[0]):
            return False
        return _hull_inside(pts, np.array(pts) @ kmap.T, tol)

    for cap in (10, 16, 22):
        axes = [np.arange(-cap, cap + 1)] * d
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        v = grid @ lam_pow
        mask = v > 1e-9
        for p in reps:
            z = grid @ sig_pow[p]
            mask &= np.abs(z) <= admit[p] * np.maximum(v, 1e-300) * (1 + 1e-12)
        cands = []
        seen = set()
        for i in np.nonzero(mask)[0]:
            coords = _primitive(grid[i])
            if coords in seen or all(c == 0 for c in coords):
                continue
            seen.add(coords)
            vv = float(np.dot(coords, lam_pow))
            u: List[float] = []
            for p in reps:
                z = complex(np.dot(coords, sig_pow[p]))
                if field.roots[p].is_real:
                    u.append(z.real / vv)
                else:
                    u.extend((z.real / vv, z.imag / vv))
            cands.append((vv, coords, tuple(u)))
        if len(cands) <= d:
            continue
        hull_pts = np.array([c[2] for c in cands])
        if hull_pts.shape[1] == 1:
            sel = [min(cands, key=lambda t: t[2][0]),
                   max(cands, key=lambda t: t[2][0])]
        else:
            from scipy.spatial import ConvexHull, QhullError
            try:
                sel = [cands[i] for i in ConvexHull(hull_pts).vertices]
            except (QhullError, ValueError):
                continue
        if not absorbs(sel):
            continue
        # prune, largest dominant value first, while the hull still
        # absorbs the images of the remaining points
        changed = True
        while changed:
            changed = False
            for drop in sorted(sel, key=lambda t: -t[0]):
                trial = [s for s in sel if s is not drop]
                if absorbs(trial):
                    sel = trial
                    changed = True
                    break
        rays = sorted(s[1] for s in sel)
        if not all(_strictly_dominant(field, r) for r in rays):
            continue
        if all(_nonneg_combination(rays, _times_lam(field, r)) is not None
               for r in rays):
            return rays
    raise ConeError("no invariant ray set within the search budget")


def _times_lam(field: NumberField, coords: Coords) -> Coords:
    elem = field.element([Fraction(c) for c in coords]) * field.lam()
    out = []
    for c in elem.coords:
        if c.denominator != 1:
            raise ConeError("multiplication by lam left the lattice")
        out.append(int(c))
    return tuple(out)


class RationalCone:
    """Rational polyhedral cone with lam * cone certified inside the cone."""

    def __init__(self, field: NumberField, rays: Tuple[Coords, ...],
                 facets: Tuple[Coords, ...],
                 lam_combinations: Tuple[Tuple[Fraction, ...], ...],
                 tightness: Fraction, sandwiched: bool = True):
        self.field = field
        self.rays = rays
        self.facets = facets
        # lam * rays[i] == sum_j lam_combinations[i][j] * rays[j], all >= 0
        self.lam_combinations = lam_combinations
        self.tightness = tightness
        # whether the cone also swallows the full image cone lam * K
        self.sandwiched = sandwiched

    def dim(self) -> int:
        return len(self.rays[0])

    def ray_elements(self):
        return [self.field.element([Fraction(c) for c in r]) for r in self.rays]

    def contains(self, coords: Sequence) -> bool:
        """Exact membership for rational coordinate vectors."""
        vec = [Fraction(c) for c in coords]
        return all(_dot(f, vec) >= 0 for f in self.facets)

    def to_json(self) -> dict:
        return {
            "min_poly": self.field.min_poly.to_json(),
            "tightness": str(self.tightness),
            "sandwiched": self.sandwiched,
            "rays": [list(r) for r in self.rays],
            "facets": [list(f) for f in self.facets],
            "lam_combinations": [[str(c) for c in row]
                                 for row in self.lam_combinations],
        }


def build_cone(field: NumberField,
               tightness: Fraction = Fraction(1, 2)) -> RationalCone:
    """Wedge a certified rational cone between lam * K and K.

    tightness in (0, 1) controls how far the rays may lean from the
    image cone toward the dominance boundary; larger values admit
    shorter rays at the cost of a wider cone.
    """
    tightness = Fraction(tightness)
    if not 0 < tightness < 1:
        raise ValueError("tightness must be strictly between 0 and 1")
    cls = classify(field)
    if not cls.is_perron:
        raise ValueError("slope classifies as %s, not Perron" % cls.kind)
    d = field.degree
    if d == 1:
        lam = int(field.lam().coords[0])
        return RationalCone(field, ((1,),), ((1,),),
                            ((Fraction(lam),),), tightness)
    try:
        rays = tuple(_search_rays(field, tightness))
        sandwiched = True
    except ConeError:
        rays = tuple(_search_invariant_rays(field, tightness))
        sandwiched = False
    for ray in rays:
        if not _strictly_dominant(field, ray):
            raise ConeError("ray %r is not certified inside the dominance cone"
                            % (ray,))
    facets = _facet_normals(rays, d)
    for subset in itertools.combinations(facets, d - 1):
        z = _kernel_vector(subset, d)
        if z is None:
            continue
        dots = [_dot(f, z) for f in facets]
        if all(t == 0 for t in dots):
            raise ConeError("facet description admits a line")
        if all(t >= 0 for t in dots):
            extreme = z
        elif all(t <= 0 for t in dots):
            extreme = tuple(-a for a in z)
        else:
            continue
        if _nonneg_combination(rays, extreme) is None:
            raise ConeError("facet description is wider than the ray hull")
    if sandwiched:
        _certify_invariance(field, facets)
    combos = []
    for ray in rays:
        combo = _nonneg_combination(rays, _times_lam(field, ray))
        if combo is None:
            raise ConeError("lam * ray %r escapes the cone" % (ray,))
        combos.append(combo)
    return RationalCone(field, rays, facets, tuple(combos), tightness,
                        sandwiched)


class SemigroupBasis:
    """Finite generating set for the nonzero lattice points of a cone."""

    def __init__(self, cone: RationalCone, generators: Tuple[Coords, ...],
                 value_bound: Fraction, box: Tuple[int, ...], scanned: int):
        self.cone = cone
        self.generators = generators
        # every lattice point of the cone splits into pieces of dominant
        # value at most value_bound, so the scan below the bound is complete
        self.value_bound = value_bound
        self.box = box
        self.scanned = scanned

    def __len__(self) -> int:
        return len(self.generators)

    def elements(self):
        field = self.cone.field
        return [field.element([Fraction(c) for c in g]) for g in self.generators]

    def to_json(self) -> dict:
        return {
            "generators": [list(g) for g in self.generators],
            "value_bound": str(self.value_bound),
            "box": list(self.box),
            "scanned": self.scanned,
        }


def _greedy_generators(points: List[Tuple[float, Coords]],
                       facets: Tuple[Coords, ...]) -> List[Coords]:
    """Minimal generating subset of the scanned points, ascending value."""
    retained: List[Coords] = []
    memo: Dict[Coords, bool] = {}

    def generated(x: Coords) -> bool:
        hit = memo.get(x)
        if hit is not None:
            return hit
        res = False
        for g in reversed(retained):
            y = tuple(a - b for a, b in zip(x, g))
            if all(c == 0 for c in y):
                res = True
                break
            if any(_dot(f, y) < 0 for f in facets):
                continue
            if generated(y):
                res = True
                break
        memo[x] = res
        return res

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 100000))
    try:
        for _, x in points:
            if not generated(x):
                retained.append(x)
                # x is now a one-term sum of retained elements
                memo[x] = True
    finally:
        sys.setrecursionlimit(limit)
    return retained


def semigroup_generators(cone: RationalCone,
                         point_budget: int = 40_000_000) -> SemigroupBasis:
    """Enumerate a complete generating set for the cone lattice points.

    Splitting along d spanning rays reduces any lattice point to pieces
    of dominant value at most the sum of the d largest ray values, so
    scanning below that bound sees every irreducible element.
    """
    field = cone.field
    d = cone.dim()
    if d == 1:
        return SemigroupBasis(cone, ((1,),), Fraction(1), (1,), 1)
    if d > 4:
        raise ConeError("lattice scan above degree four is out of scale")
    eps = _EPS_LADDER[0]
    v_hi = sorted((field.real_value(e, eps).hi for e in cone.ray_elements()),
                  reverse=True)
    bound = sum(v_hi[:d])
    kappa = _inverse_row_bounds(field)
    box = tuple(int(math.floor(k * bound)) + 1 for k in kappa)
    total = 1
    for b in box:
        total *= 2 * b + 1
    if total > point_budget:
        raise ConeError("lattice scan budget exceeded")
    lam_f = field.lam_enclosure.to_complex().real
    lam_pow = np.array([lam_f ** j for j in range(d)])
    facet_arr = np.array(cone.facets, dtype=np.int64)
    bound_f = float(bound) * (1 + 1e-9) + 1e-9
    survivors: List[Tuple[float, Coords]] = []
    axes = [np.arange(-b, b + 1) for b in box[1:]]
    for x0 in range(-box[0], box[0] + 1):
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d - 1)
        full = np.concatenate(
            [np.full((grid.shape[0], 1), x0, dtype=np.int64), grid], axis=1)
        mask = np.all(full @ facet_arr.T >= 0, axis=1)
        v = full @ lam_pow
        # nonzero cone lattice points have dominant value at least 1
        # because the product over all places is a nonzero integer norm
        mask &= (v > 0.5) & (v <= bound_f)
        for row, vv in zip(full[mask], v[mask]):
            survivors.append((float(vv), tuple(int(c) for c in row)))
    confirmed: List[Tuple[float, Coords]] = []
    for vv, coords in survivors:
        val = field.real_value(
            field.element([Fraction(c) for c in coords]), eps)
        if val.lo > bound:
            continue
        confirmed.append((vv, coords))
    confirmed.sort()
    gens = _greedy_generators(confirmed, cone.facets)
    return SemigroupBasis(cone, tuple(gens), bound, box, total)


def decompose(x, basis: SemigroupBasis) -> Tuple[int, ...]:
    """Multiplicities writing x as a nonnegative sum of the generators."""
    field = basis.cone.field
    coords = x.coords if hasattr(x, "coords") else tuple(Fraction(c) for c in x)
    ints = []
    for c in coords:
        c = Fraction(c)
        if c.denominator != 1:
            raise ValueError("element has nonintegral coordinates")
        ints.append(int(c))
    target = tuple(ints)
    if all(c == 0 for c in target):
        return (0,) * len(basis.generators)
    if not basis.cone.contains(target):
        raise ValueError("element is outside the cone")
    gens = basis.generators
    # try large generators first so the greedy path stays short
    order = list(range(len(gens) - 1, -1, -1))
    facets = basis.cone.facets
    failed = set()

    def rec(y: Coords) -> Optional[Dict[int, int]]:
        if y in failed:
            return None
        for i in order:
            g = gens[i]
            z = tuple(a - b for a, b in zip(y, g))
            if all(c == 0 for c in z):
                return {i: 1}
            if any(_dot(f, z) < 0 for f in facets):
                continue
            sub = rec(z)
            if sub is not None:
                sub[i] = sub.get(i, 0) + 1
                return sub
        failed.add(y)
        return None

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 100000))
    try:
        found = rec(target)
    finally:
        sys.setrecursionlimit(limit)
    if found is None:
        raise ValueError("element is not generated by the basis")
    return tuple(found.get(i, 0) for i in range(len(gens)))


class LindMatrix:
    """Multiplication by lam written on a cone generating set."""

    def __init__(self, field: NumberField, basis: SemigroupBasis,
                 matrix: Tuple[Tuple[int, ...], ...], poly: IntPolynomial,
                 rho: Interval, structure: str, period: int):
        self.field = field
        self.basis = basis
        self.matrix = matrix
        self.charpoly = poly
        self.rho = rho
        self.structure = structure
        self.period = period

    def size(self) -> int:
        return len(self.matrix)

    def to_json(self) -> dict:
        return {
            "min_poly": self.field.min_poly.to_json(),
            "matrix": [list(row) for row in self.matrix],
            "generators": [list(g) for g in self.basis.generators],
            "charpoly": self.charpoly.to_json(),
            "rho": {"lo": str(self.rho.lo), "hi": str(self.rho.hi),
                    "float": self.rho.to_float()},
            "structure": self.structure,
            "period": self.period,
        }


def _column_variants(target, basis: SemigroupBasis,
                     cap: int = 6) -> List[Tuple[int, ...]]:
    """A few distinct decompositions of target, for densifying the matrix."""
    gens = basis.generators
    facets = basis.cone.facets
    coords = tuple(int(c) for c in target.coords)
    out = []
    seen = set()
    for first in range(len(gens) - 1, -1, -1):
        z = tuple(a - b for a, b in zip(coords, gens[first]))
        if any(_dot(f, z) < 0 for f in facets):
            continue
        try:
            if all(c == 0 for c in z):
                counts = [0] * len(gens)
            else:
                counts = list(decompose(z, basis))
        except ValueError:
            continue
        counts[first] += 1
        key = tuple(counts)
        if key not in seen:
            seen.add(key)
            out.append(key)
        if len(out) >= cap:
            break
    return out


def lind_matrix(field: NumberField,
                tightness: Fraction = Fraction(1, 2)) -> LindMatrix:
    """Nonnegative integer matrix realizing lam on a cone semigroup.

    The dominant values of the generators form an exact positive
    eigenvector of the transpose, the characteristic polynomial is
    divisible by the minimal polynomial of lam, and the spectral radius
    encloses lam.
    """
    cls = classify(field)
    if not cls.is_perron:
        raise ValueError("slope classifies as %s, not Perron" % cls.kind)
    cone = build_cone(field, tightness)
    basis = semigroup_generators(cone)
    gens = basis.elements()
    lam = field.lam()
    columns = [list(decompose(lam * g, basis)) for g in gens]
    n = len(gens)

    def assemble(cols):
        return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))

    matrix = assemble(columns)
    spec = spectral([list(row) for row in matrix])
    if spec.structure != "mixing":
        # a sparse greedy decomposition can miss edges that other exact
        # decompositions provide; densify column by column
        best = spec
        cols = list(columns)
        for j, g in enumerate(gens):
            variants = _column_variants(lam * g, basis)
            for var in variants:
                if var == tuple(cols[j]):
                    continue
                trial = cols[:j] + [var] + cols[j + 1:]
                s = spectral([list(row) for row in assemble(trial)])
                if (s.structure == "mixing"
                        or (best.structure == "reducible"
                            and s.structure != "reducible")):
                    cols = trial
                    best = s
                    break
            if best.structure == "mixing":
                break
        columns = cols
        matrix = assemble(columns)
        spec = spectral([list(row) for row in matrix])
    for j, g in enumerate(gens):
        acc = field.zero()
        for i in range(n):
            if matrix[i][j]:
                acc = acc + gens[i] * matrix[i][j]
        if acc != lam * g:
            raise ConeError("transpose eigenvector identity failed")
    poly = charpoly([list(row) for row in matrix])
    if not field.min_poly.divides(poly):
        raise ConeError("characteristic polynomial misses the minimal polynomial")
    lam_box = field.lam_enclosure.real_interval()
    if spec.rho.hi < lam_box.lo or spec.rho.lo > lam_box.hi:
        raise ConeError("spectral radius does not enclose lam")
    return LindMatrix(field, basis, matrix, poly, spec.rho,
                      spec.structure, spec.period)
