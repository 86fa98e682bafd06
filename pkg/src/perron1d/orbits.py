"""Exact critical orbits of uniform expanders and their Galois shadows.

Orbits are iterated in the power basis of the defining field with integer
coordinates over a fixed denominator, so cycle detection is exact equality
of lattice points, never a float comparison.  The compiled kernels in
``_kernels`` handle the tent family x -> lam|x| - 1; anything they cannot
certify (near-zero signs, int64 overflow) is redone with python integers
and, for sign ties, certified field arithmetic.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

import numpy as np

from ._kernels import (
    STATUS_CAP,
    STATUS_CYCLE,
    SIGN_GUARD,
    table_for,
    tent_orbit_kernel,
)
from .field import (
    FieldElement,
    NumberField,
    classify,
)
from .intervals import ComplexBox, Interval, sqrt_upper
from .plmap import PLMap, _scalar_sign
from .polys import IntPolynomial, _exact_div
from .roots import PrecisionError, poly_roots, solve_squarefree


class OrbitEscapeError(ValueError):
    """An iterate left the domain: the map was not a valid self-map."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class CloudEscapeError(RuntimeError):
    """Product iteration escaped at an expanding place."""

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


# -- record types --------------------------------------------------------


class OrbitRecord:
    """Forward orbit of one point with exact cycle data.

    status is "finite" or "cap_exhausted".  For finite records `points`
    holds the orbit through its first repeat, so
    points[preperiod + period] == points[preperiod] exactly and no earlier
    repeat exists.  Cap records keep the visited lattice rows internally
    and materialize points on demand through point_at.
    """

    def __init__(self, status, preperiod, period, points, cap,
                 rows=None, qden=1, field=None):
        self.status = status
        self.preperiod = preperiod
        self.period = period
        self.points = points
        self.cap = cap
        self._rows = rows
        self._qden = qden
        self._field = field
        if status == "finite":
            if points[preperiod + period] != points[preperiod]:
                raise AssertionError("cycle closure is not exact")

    @property
    def length(self):
        """Number of distinct points visited."""
        if self.status == "finite":
            return self.preperiod + self.period
        return self.cap + 1

    def cycle(self):
        if self.status != "finite":
            raise ValueError("no cycle: orbit hit the iteration cap")
        return self.points[self.preperiod:self.preperiod + self.period]

    def point_at(self, k):
        if self.points:
            return self.points[k]
        row = self._rows[k]
        q = self._qden
        return self._field.element([Fraction(int(c), q) for c in row])

    def to_json(self):
        doc = {"status": self.status, "cap": self.cap}
        if self.status == "finite":
            doc["preperiod"] = self.preperiod
            doc["period"] = self.period
            doc["points"] = [_point_json(p) for p in self.points]
        else:
            doc["steps"] = self.cap
        return doc

    def __repr__(self):
        if self.status == "finite":
            return f"OrbitRecord(preperiod={self.preperiod}, period={self.period})"
        return f"OrbitRecord(cap_exhausted at {self.cap})"


def _point_json(p):
    if isinstance(p, FieldElement):
        return p.to_json()
    q = Fraction(p)
    return [q.numerator, q.denominator]


class Trajectory:
    """Parallel per-place sample columns over a common step range."""

    def __init__(self, labels, steps, rows, closed_at=None, meta=None):
        self.labels = list(labels)
        self.steps = list(steps)
        self.rows = [tuple(r) for r in rows]
        self.closed_at = closed_at
        self.meta = dict(meta or {})
        for r in self.rows:
            if len(r) != len(self.labels):
                raise ValueError("row width disagrees with labels")
        if len(self.steps) != len(self.rows):
            raise ValueError("steps and rows disagree in length")

    def __len__(self):
        return len(self.rows)

    def column(self, label):
        j = self.labels.index(label)
        return [r[j] for r in self.rows]

    def stats(self):
        """Per-column min/max/mean, rounded for regression pinning."""
        out = {}
        for j, lab in enumerate(self.labels):
            col = [r[j] for r in self.rows]
            out[lab] = {
                "min": round(min(col), 6),
                "max": round(max(col), 6),
                "mean": round(math.fsum(col) / len(col), 6),
            }
        return out

    def occupancy(self, xlabel, ylabel, cells=64):
        """Number of occupied cells on a cells x cells grid, a crude
        area proxy that is stable under tiny float drift."""
        xs = self.column(xlabel)
        ys = self.column(ylabel)
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        dx = (x1 - x0) or 1.0
        dy = (y1 - y0) or 1.0
        grid = set()
        for x, y in zip(xs, ys):
            i = min(cells - 1, int((x - x0) / dx * cells))
            j = min(cells - 1, int((y - y0) / dy * cells))
            grid.add((i, j))
        return len(grid)


# -- tent maps -----------------------------------------------------------


def tent_map(lam):
    """The map x -> lam|x| - 1 on [-1, lam-1], slope constraint 1 < lam <= 2.

    lam may be a NumberField (its distinguished root is used) or an exact
    rational.  The single critical point sits at 0.
    """
    if isinstance(lam, NumberField):
        field = lam
        lv = field.lam()
        one = field.one()
        # self-map needs lam <= 2, expansion needs lam > 1
        if field.sign_of(lv - one) <= 0 or field.sign_of(lv - 2 * one) > 0:
            raise ValueError("tent slope must satisfy 1 < lam <= 2")
        bk = [-one, field.zero(), lv - one]
        vals = [lv - one, -one, lv * lv - lv - one]
        return PLMap(bk, vals, field=field, notes={"tent": True})
    lam = Fraction(lam)
    if not (1 < lam <= 2):
        raise ValueError("tent slope must satisfy 1 < lam <= 2")
    bk = [Fraction(-1), Fraction(0), lam - 1]
    vals = [lam - 1, Fraction(-1), lam * lam - lam - 1]
    return PLMap(bk, vals, notes={"tent": True})


# -- lattice plumbing ----------------------------------------------------


def _den_lcm(*elems):
    q = 1
    for e in elems:
        if isinstance(e, FieldElement):
            q = math.lcm(q, e.denominator())
        else:
            q = math.lcm(q, Fraction(e).denominator)
    return q


def _scaled_coords(elem, q, d):
    """Integer power-basis coordinates of q * elem, length d."""
    if isinstance(elem, FieldElement):
        cs = list(elem.coords)
    else:
        cs = [Fraction(elem)]
    cs = cs + [Fraction(0)] * (d - len(cs))
    out = []
    for c in cs:
        v = c * q
        if v.denominator != 1:
            raise ValueError("denominator does not clear the lattice scale")
        out.append(v.numerator)
    return out


def _field_data(field):
    p = field.min_poly
    d = p.degree
    red = list(p.coeffs[:d])
    enc = field.lam_enclosure
    lam_f = float(enc.re)
    pows = [lam_f ** j for j in range(d)]
    return d, red, pows


def _exact_sign(field, coords, pows=None):
    """Sign of sum coords[j] lam^j; float first, field arithmetic on ties."""
    if all(c == 0 for c in coords):
        return 0
    if pows is None:
        _, _, pows = _field_data(field)
    # non-Pisot fields grow coordinates without bound; shift into float
    # range, the relative guard absorbs the truncation error
    shift = max(abs(c).bit_length() for c in coords) - 53
    if shift > 0:
        coords_f = [c >> shift for c in coords]
    else:
        coords_f = coords
    s = 0.0
    scale = 1.0
    for c, p in zip(coords_f, pows):
        t = c * p
        s += t
        scale += abs(t)
    if abs(s) > SIGN_GUARD * scale:
        return 1 if s > 0 else -1
    return field.sign_of(field.element([Fraction(c) for c in coords]))


# -- orbit engines -------------------------------------------------------


def _orbit_fraction(f, x0, cap):
    seen = {x0: 0}
    points = [x0]
    x = x0
    for step in range(cap):
        try:
            x = f(x)
        except ValueError:
            raise OrbitEscapeError(
                "orbit left the domain",
                {"step": step, "point": points[-1]},
            )
        points.append(x)
        if x in seen:
            mu = seen[x]
            return OrbitRecord("finite", mu, step + 1 - mu, points, cap)
        seen[x] = step + 1
    return OrbitRecord("cap_exhausted", None, None, points, cap)


def _orbit_field_reference(f, x0, cap):
    """Plain FieldElement loop; the slow oracle the fast engines must match."""
    return _orbit_fraction(f, x0, cap)


def _tent_kernel_orbit(field, x0, cap):
    d, red, pows = _field_data(field)
    q = _den_lcm(x0)
    start = _scaled_coords(x0, q, d)
    orbit = np.zeros((cap + 2, d), dtype=np.int64)
    orbit[0] = start
    table = table_for(cap)
    status, steps, pre, per = tent_orbit_kernel(
        np.array(red, dtype=np.int64),
        np.array(pows, dtype=np.float64),
        cap,
        orbit,
        table,
        q,
    )
    return status, steps, pre, per, orbit, q


def _tent_int_orbit(field, x0, cap):
    """Python-int twin of the tent kernel: no overflow, ties resolved
    with certified field arithmetic."""
    d, red, pows = _field_data(field)
    q = _den_lcm(x0)
    cur = tuple(_scaled_coords(x0, q, d))
    seen = {cur: 0}
    rows = [cur]
    for step in range(cap):
        sgn = _exact_sign(field, cur, pows)
        neg = sgn < 0
        top = -cur[d - 1] if neg else cur[d - 1]
        nxt = [0] * d
        for j in range(d - 1, 0, -1):
            prev = -cur[j - 1] if neg else cur[j - 1]
            nxt[j] = prev - top * red[j]
        nxt[0] = -top * red[0] - q
        cur = tuple(nxt)
        rows.append(cur)
        if cur in seen:
            mu = seen[cur]
            pts = [_element_from(field, r, q) for r in rows]
            return OrbitRecord("finite", mu, step + 1 - mu, pts, cap,
                               rows=np.array(rows, dtype=object),
                               qden=q, field=field)
        seen[cur] = step + 1
    return OrbitRecord("cap_exhausted", None, None, [], cap,
                       rows=np.array(rows, dtype=object), qden=q, field=field)


def _element_from(field, row, q):
    return field.element([Fraction(int(c), q) for c in row])


def _orbit_tent_field(f, x0, cap):
    field = f.field
    b0, b1 = f.domain
    x0e = _as_elem(field, x0)
    if field.sign_of(x0e - b0) < 0 or field.sign_of(b1 - x0e) < 0:
        raise OrbitEscapeError("start outside the domain", {"point": x0})
    status, steps, pre, per, orbit, q = _tent_kernel_orbit(field, x0, cap)
    if status == STATUS_CYCLE:
        pts = [_element_from(field, orbit[k], q) for k in range(steps + 1)]
        return OrbitRecord("finite", pre, per, pts, cap,
                           rows=orbit[:steps + 1], qden=q, field=field)
    if status == STATUS_CAP:
        return OrbitRecord("cap_exhausted", None, None, [], cap,
                           rows=orbit[:cap + 1], qden=q, field=field)
    # overflow or an unresolved float sign: redo with python integers
    return _tent_int_orbit(field, x0, cap)


def _lattice_orbit(f, x0, cap):
    """General exact engine for maps with slopes +-lam over a field.

    Points live in (1/q) Z[lam] for a fixed q, so each step is an integer
    shift-reduce plus a translation; breakpoint comparisons fall back to
    certified signs only when a float test is inconclusive.
    """
    field = f.field
    d, red, pows = _field_data(field)
    lam = field.lam()
    n = f.pieces()
    signs = []
    for i in range(n):
        s = f.slope(i)
        if s == lam:
            signs.append(1)
        elif s == -lam:
            signs.append(-1)
        else:
            raise ValueError("lattice engine needs slopes +-lam")
    inter = [f.values[i] - f.slope(i) * f.breakpoints[i] for i in range(n)]
    q = _den_lcm(x0, *f.breakpoints, *inter)
    bks = [tuple(_scaled_coords(b, q, d)) for b in f.breakpoints]
    cks = [tuple(_scaled_coords(c, q, d)) for c in inter]

    def piece_of(coords):
        # first i with coords <= bks[i+1]; exact sign on the difference
        for i in range(n - 1):
            diff = [b - c for b, c in zip(bks[i + 1], coords)]
            if _exact_sign(field, diff, pows) >= 0:
                return i
        return n - 1

    cur = tuple(_scaled_coords(x0, q, d))
    lo = [b - c for b, c in zip(cur, bks[0])]
    hi = [b - c for b, c in zip(bks[-1], cur)]
    if _exact_sign(field, lo, pows) < 0 or _exact_sign(field, hi, pows) < 0:
        raise OrbitEscapeError("start outside the domain", {"point": x0})
    seen = {cur: 0}
    rows = [cur]
    for step in range(cap):
        i = piece_of(cur)
        sg = signs[i]
        top = sg * cur[d - 1]
        nxt = [0] * d
        for j in range(d - 1, 0, -1):
            nxt[j] = sg * cur[j - 1] - top * red[j] + cks[i][j]
        nxt[0] = -top * red[0] + cks[i][0]
        cur = tuple(nxt)
        rows.append(cur)
        if cur in seen:
            mu = seen[cur]
            pts = [_element_from(field, r, q) for r in rows]
            return OrbitRecord("finite", mu, step + 1 - mu, pts, cap,
                               rows=np.array(rows, dtype=object),
                               qden=q, field=field)
        seen[cur] = step + 1
    return OrbitRecord("cap_exhausted", None, None, [], cap,
                       rows=np.array(rows, dtype=object), qden=q, field=field)


def _is_uniform_lattice(f):
    if f.field is None:
        return False
    lam = f.field.lam()
    try:
        return all(f.slope(i) in (lam, -lam) for i in range(f.pieces()))
    except ValueError:
        return False


def _orbit(f, x0, cap):
    if f.field is None:
        return _orbit_fraction(f, x0, cap)
    if f.notes.get("tent"):
        return _orbit_tent_field(f, x0, cap)
    if _is_uniform_lattice(f):
        return _lattice_orbit(f, x0, cap)
    return _orbit_field_reference(f, x0, cap)


def critical_orbits(f, cap=10 ** 6):
    """One OrbitRecord per turning point, in increasing position."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    return [_orbit(f, x, cap) for x, _ in f.turning_points()]


# -- Pisot certificates --------------------------------------------------


class PisotCertificate:
    """Bounds forcing finiteness of the postcritical set.

    place_bounds maps each non-dominant place to a radius its embedded
    orbit can never leave; dominant_bound is the domain radius; scale
    clears denominators so orbit points are lattice vectors; count_bound
    is a certified count of lattice points obeying every radius, hence an
    upper bound for the number of distinct postcritical points.
    """

    def __init__(self, place_bounds, dominant_bound, scale, coord_bound,
                 count_bound):
        self.place_bounds = place_bounds
        self.dominant_bound = dominant_bound
        self.scale = scale
        self.coord_bound = coord_bound
        self.count_bound = count_bound

    def to_json(self):
        return {
            "place_bounds": {str(k): float(v) for k, v in self.place_bounds.items()},
            "dominant_bound": float(self.dominant_bound),
            "scale": self.scale,
            "coord_bound": self.coord_bound,
            "count_bound": self.count_bound,
        }

    def __repr__(self):
        return f"PisotCertificate(count_bound={self.count_bound})"


def _interval_cholesky_pd(g):
    """Certify that the interval matrix g is positive definite."""
    n = len(g)
    l = [[Interval(0) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            s = g[i][j]
            for k in range(j):
                s = s - l[i][k] * l[j][k]
            if i == j:
                if not (s.lo > 0):
                    return False
                l[i][i] = s.sqrt()
            else:
                l[i][j] = s / l[j][j]
    return True


def _upper_abs(box):
    return box.modulus().hi


def pisot_certificate(f):
    """Finiteness certificate for the postcritical set of a lam-expander
    with Pisot slope; rejects anything whose slope is not Pisot."""
    n = f.pieces()
    inter = [f.values[i] - f.slope(i) * f.breakpoints[i] for i in range(n)]
    crits = [x for x, _ in f.turning_points()]
    if f.field is None:
        lam = abs(Fraction(f.slope(0)))
        if lam.denominator != 1 or lam < 2:
            raise ValueError("rational slope is Pisot only for integers >= 2")
        q = _den_lcm(*f.breakpoints, *inter)
        b0, b1 = f.domain
        dom = max(abs(Fraction(b0)), abs(Fraction(b1)))
        count = int((Fraction(b1) - Fraction(b0)) * q) + 1
        return PisotCertificate({}, dom, q, None, count)

    field = f.field
    kind = classify(field)
    if kind.kind != "Pisot":
        raise ValueError(f"slope classifies as {kind.kind}, not Pisot")
    d = field.min_poly.degree
    eps = Fraction(1, 1 << 60)
    q = _den_lcm(*f.breakpoints, *inter)

    lam_idx = field.lambda_index
    place_bounds = {}
    for place in range(d):
        if place == lam_idx:
            continue
        r = _upper_abs(field.embed(field.lam(), place, eps))
        # Pisot certification gives |sigma(lam)| < 1; refuse to divide by
        # a nonpositive gap if the enclosure is too loose
        if not (r < 1):
            raise ValueError("conjugate enclosure not certified inside the disk")
        cmax = max(_upper_abs(field.embed(c, place, eps)) for c in inter)
        basin = cmax / (1 - r)
        start = max(_upper_abs(field.embed(c, place, eps)) for c in crits)
        place_bounds[place] = max(basin, start)
    b0, b1 = f.domain
    dom = max(field.real_value(b0, eps).abs().hi,
              field.real_value(b1, eps).abs().hi)

    # Gram matrix of the power basis under all embeddings, as intervals
    roots = field.refined_roots(eps)
    boxes = [r.box() for r in roots]
    pows = []
    for b in boxes:
        cur = ComplexBox(Interval(1), Interval(0))
        ps = [cur]
        for _ in range(d - 1):
            cur = cur * b
            ps.append(cur)
        pows.append(ps)
    g = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(i + 1):
            s = Interval(0)
            for ps in pows:
                s = s + (ps[i] * ps[j].conj()).re
            g[i][j] = s
            g[j][i] = s
    gf = np.array([[float(g[i][j].mid) for j in range(d)] for i in range(d)])
    t = Fraction(float(np.linalg.eigvalsh(gf)[0])) / 2
    if t <= 0:
        t = Fraction(1, 1 << 20)
    for _ in range(40):
        shifted = [[g[i][j] - (t if i == j else 0) for j in range(d)]
                   for i in range(d)]
        if _interval_cholesky_pd(shifted):
            break
        t = t / 4
    else:
        raise ValueError("could not certify the lattice Gram matrix")

    s_total = Fraction(0)
    for place in range(d):
        bound = dom if place == lam_idx else place_bounds[place]
        s_total += (Fraction(bound) * q) ** 2
    coord = int(sqrt_upper(s_total / t))
    count = (2 * coord + 1) ** d
    return PisotCertificate(place_bounds, dom, q, coord, count)


# -- Galois product clouds -----------------------------------------------


def _piece_scalars(f, sigma, eps=Fraction(1, 1 << 50)):
    field = f.field
    n = f.pieces()
    slopes = [f.slope(i) for i in range(n)]
    inter = [f.values[i] - slopes[i] * f.breakpoints[i] for i in range(n)]
    a = [complex(field.embed(s, sigma, eps).mid_complex()) for s in slopes]
    c = [complex(field.embed(t, sigma, eps).mid_complex()) for t in inter]
    return a, c


def galois_product_cloud(f, sigma, x0, burn_in=15000, n_samples=30000, seed=0):
    """Sample the limit set of the product of f with its sigma shadow.

    The interval coordinate is iterated exactly; the shadow coordinate is
    a double.  Whenever the orbit lands exactly on the critical point both
    one-sided shadow images occur, so a seeded coin picks a side per visit
    and over many returns both branches get sampled.
    """
    field = f.field
    if field is None:
        raise ValueError("cloud needs a map over a number field")
    if sigma == field.lambda_index:
        raise ValueError("sigma must differ from the dominant place")
    d = field.min_poly.degree
    total = burn_in + n_samples
    if d > 8:
        import warnings

        warnings.warn("field degree > 8: shadow cloud may accumulate drift")

    record = _orbit(f, x0, total)
    rows, q = _orbit_rows(record, field, total)
    cyc_start = record.preperiod if record.status == "finite" else None

    def row_at(k):
        if k < len(rows) - 1 or cyc_start is None:
            return rows[k]
        span = record.period
        return rows[cyc_start + (k - cyc_start) % span]

    dd, _, pows = _field_data(field)
    bks = f.breakpoints
    n = f.pieces()
    bk_rows = [tuple(_scaled_coords(b, q, dd)) for b in bks[1:-1]]

    def piece_at(row):
        # None marks an exact hit on an interior breakpoint, where the
        # two one-sided shadow images may differ
        for i, br in enumerate(bk_rows):
            diff = [a - b for a, b in zip(row, br)]
            s = _exact_sign(field, diff, pows)
            if s == 0:
                return None
            if s < 0:
                return i
        return n - 1

    def left_piece_at(row):
        for i, br in enumerate(bk_rows):
            if all(a == b for a, b in zip(row, br)):
                return i
        raise AssertionError("no breakpoint matches the critical hit")

    a_s, c_s = _piece_scalars(f, sigma)
    sig_box = field.embed(field.lam(), sigma, Fraction(1, 1 << 50))
    contraction = _upper_abs(sig_box)
    rng = random.Random(seed)
    z = complex(field.embed(_as_elem(field, x0), sigma,
                            Fraction(1, 1 << 50)).mid_complex())
    escape_radius = 1e9
    out = []
    branch_hits = 0
    for k in range(total):
        row = row_at(k)
        xf = sum(int(c) * p for c, p in zip(row, pows)) / q
        piece = piece_at(row)
        if piece is None:
            # exact critical hit: both one-sided images are legitimate
            branch_hits += 1
            piece = left_piece_at(row) + rng.randint(0, 1)
        z = a_s[piece] * z + c_s[piece]
        if abs(z) > escape_radius:
            raise CloudEscapeError("shadow coordinate escaped", k)
        if k >= burn_in:
            out.append((xf, z.real, z.imag))
    meta = {"seed": seed, "branch_hits": branch_hits,
            "contraction": float(contraction),
            "lam": float(field.lam_enclosure.re)}
    return Trajectory(["x", "re", "im"], range(burn_in, total), out,
                      closed_at=None, meta=meta)


def _as_elem(field, x):
    if isinstance(x, FieldElement):
        return x
    return field.from_rational(Fraction(x))


def _orbit_rows(record, field, total):
    if record._rows is not None:
        return [tuple(int(c) for c in r) for r in record._rows], record._qden
    q = _den_lcm(*record.points)
    d = field.min_poly.degree
    return [tuple(_scaled_coords(p, q, d)) for p in record.points], q


# -- Salem radii walks ---------------------------------------------------


def salem_radii_walk(f, n, x0=None):
    """Per-complex-place radii along the exact orbit of x0 (default: the
    critical point).  closed_at marks the first exact return, if any."""
    field = f.field
    if field is None:
        raise ValueError("radii walk needs a map over a number field")
    if x0 is None:
        x0 = f.turning_points()[0][0]
    record = _orbit(f, x0, n)
    rows, q = _orbit_rows(record, field, n)
    closed = None
    if record.status == "finite":
        closed = record.preperiod + record.period
    eps = Fraction(1, 1 << 50)
    encs = field.refined_roots(eps)
    cols = []
    labels = []
    d = field.min_poly.degree
    arr = np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    for idx, enc in enumerate(encs):
        if enc.is_real or float(enc.im) < 0:
            continue
        z = complex(float(enc.re), float(enc.im))
        powz = np.array([z ** j for j in range(d)], dtype=np.complex128)
        radii = np.abs(arr @ powz) / q
        cols.append(radii)
        labels.append(f"place{idx}")
    if not labels:
        raise ValueError("the field has no complex places")
    rows_out = list(zip(*[c.tolist() for c in cols]))
    return Trajectory(labels, range(len(rows_out)), rows_out,
                      closed_at=closed, meta={"qden": q})


# -- bounded shadow partner ----------------------------------------------


def friendly_b(f, sigma, x, depth=40):
    """Certified enclosures of the unique shadow value that stays bounded
    when paired with x, at an expanding place.

    Returns one box, or the two one-sided boxes when the forward orbit of
    x hits a turning point within depth.  Each backward step shrinks the
    enclosure by the expansion factor, so the radius decays like
    R / |sigma(lam)|^depth plus embedding slop.
    """
    field = f.field
    if field is None:
        raise ValueError("needs a map over a number field")
    eps = Fraction(1, 1 << 50)
    rmod = field.embed(field.lam(), sigma, eps).modulus()
    if not (rmod.lo > 1):
        raise ValueError("place is not expanding")
    n = f.pieces()
    slopes = [f.slope(i) for i in range(n)]
    inter = [f.values[i] - slopes[i] * f.breakpoints[i] for i in range(n)]
    a_box = [field.embed(_as_elem(field, s), sigma, eps) for s in slopes]
    c_box = [field.embed(_as_elem(field, c), sigma, eps) for c in inter]
    cmax = max(_upper_abs(b) for b in c_box)
    radius = cmax / (rmod.lo - 1)

    paths = {tuple(p) for p in (_piece_path(f, x, depth, side)
                                for side in (-1, 1))}
    out = []
    for path in sorted(paths):
        box = ComplexBox.from_disk(Fraction(0), radius)
        for i in reversed(path):
            box = ((box - c_box[i]) / a_box[i]).round_out(80)
        out.append(box)
    return out


def _piece_path(f, x, depth, side):
    """Linear-piece itinerary of x; an exact breakpoint hit is resolved
    to the side a small offset of the given sign would take, with the
    offset's sign carried through the slopes."""
    field = f.field
    pert = side
    path = []
    xs = f.breakpoints
    n = f.pieces()
    for _ in range(depth):
        piece = None
        for i in range(1, n):
            s = _scalar_sign(x - xs[i])
            if s == 0:
                piece = i - 1 if pert < 0 else i
                break
            if s < 0:
                piece = i - 1
                break
        if piece is None:
            piece = n - 1
        path.append(piece)
        pert *= _scalar_sign(f.slope(piece))
        x = f(x)
    return path


# -- postcritically finite tent parameters -------------------------------


class PcfRoots:
    """Admissible kneading closures up to a postcritical length bound."""

    def __init__(self, records, per_period, dropped, max_period):
        self.records = records
        self.per_period = per_period
        self.dropped = dropped
        self.max_period = max_period

    def all_roots(self):
        for rec in self.records:
            for enc in rec["roots"]:
                yield rec, enc

    def __len__(self):
        return len(self.records)


def _kneading_polys(max_period):
    """Candidate closure polynomials: orbit 0 -> y_1 -> ... with
    y_{k+1} = e_k lam y_k - 1, closed by y_L = y_j.  n is the postcritical
    orbit length: L = n for the periodic closure j = 0, else L = n + 1."""
    for n in range(2, max_period + 1):
        for tail in itertools.product((1, -1), repeat=n - 2):
            signs = (-1,) + tail
            ys = _sign_orbit(signs, n)
            yield n, 0, signs, _poly_sub(ys[n], ys[0])
        for tail in itertools.product((1, -1), repeat=n - 1):
            signs = (-1,) + tail
            ys = _sign_orbit(signs, n + 1)
            for j in range(1, n + 1):
                yield n, j, signs, _poly_sub(ys[n + 1], ys[j])


def _sign_orbit(signs, top):
    ys = [[0], [-1]]
    for k in range(1, top):
        e = signs[k - 1]
        prev = ys[-1]
        nxt = [0] + [e * c for c in prev]
        nxt[0] -= 1
        ys.append(nxt)
    return ys


def _poly_sub(a, b):
    m = max(len(a), len(b))
    a = list(a) + [0] * (m - len(a))
    b = list(b) + [0] * (m - len(b))
    out = [x - y for x, y in zip(a, b)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _dyadic_sign(ints, num, bits):
    """Exact sign of the integer polynomial at num / 2**bits."""
    v = ints[-1]
    shift = 0
    for c in reversed(ints[:-1]):
        shift += bits
        v = v * num + (c << shift)
    return (v > 0) - (v < 0)


def _interval_sign(ints, lo, hi, bits):
    """Certified sign of the integer polynomial over [lo, hi] / 2**bits,
    or None when the image interval straddles zero."""
    a = b = ints[-1]
    shift = 0
    for c in reversed(ints[:-1]):
        shift += bits
        p1, p2, p3, p4 = a * lo, a * hi, b * lo, b * hi
        add = c << shift
        a = min(p1, p2, p3, p4) + add
        b = max(p1, p2, p3, p4) + add
    if a > 0:
        return 1
    if b < 0:
        return -1
    return None


class _KneadRoot:
    """A real root of an integer polynomial, pinned either to an exact
    rational or to a dyadic bracket with a sign change.

    Signs of small integer polynomials at the root come from interval
    arithmetic over the bracket, with bisection refinement on demand; a
    root of any divisor of the modulus found in the bracket is the pinned
    root itself, because the bracket isolates it."""

    def __init__(self, poly):
        self.poly = poly
        self.ints = list(poly.coeffs)
        self.exact = None
        self.lo = self.hi = self.bits = self.slo = None

    @classmethod
    def from_exact(cls, poly, value):
        state = cls(poly)
        state.exact = Fraction(value)
        return state

    @classmethod
    def from_bracket(cls, poly, lo, hi, bits, slo):
        state = cls(poly)
        state.lo, state.hi, state.bits, state.slo = lo, hi, bits, slo
        return state

    @classmethod
    def from_enclosure(cls, poly, enc):
        """Bracket the root of a certified isolating enclosure; endpoint
        evaluations are a last resort because enclosure endpoints can be
        long fractions."""
        state = cls(poly)
        iv = enc.real_interval()
        if iv.lo == iv.hi:
            state.exact = iv.lo
            return state
        width = iv.hi - iv.lo
        bits = 48
        while (1 << bits) * width < 8:
            bits += 16
        for _ in range(3):
            if state._grid_bracket(iv, bits):
                return state
            bits += 16
        # the root may sit at (or dyadically close to) an endpoint
        for end in (iv.lo, iv.hi):
            if poly.eval_fraction(end) == 0:
                state.exact = end
                return state
        while not state._grid_bracket(iv, bits):
            bits += 16
        return state

    def _grid_bracket(self, iv, bits):
        """Try to pin the root between dyadic grid points inside iv."""
        scale = 1 << bits
        glo = math.floor(iv.lo * scale) + 1
        ghi = math.ceil(iv.hi * scale) - 1
        if glo > ghi:
            return False
        slo = _dyadic_sign(self.ints, glo, bits)
        shi = _dyadic_sign(self.ints, ghi, bits)
        if slo == 0:
            self.exact = Fraction(glo, scale)
            return True
        if shi == 0:
            self.exact = Fraction(ghi, scale)
            return True
        if slo != shi:
            self.lo, self.hi, self.bits, self.slo = glo, ghi, bits, slo
            return True
        return False

    def _refine(self):
        """One bisection round; may discover the root exactly."""
        if self.hi - self.lo < 4:
            self.lo <<= 4
            self.hi <<= 4
            self.bits += 4
        m = (self.lo + self.hi) // 2
        sm = _dyadic_sign(self.ints, m, self.bits)
        if sm == 0:
            self.exact = Fraction(m, 1 << self.bits)
        elif sm == self.slo:
            self.lo = m
        else:
            self.hi = m

    def compare(self, value):
        """Certified -1/0/+1 comparison of the root with a rational."""
        value = Fraction(value)
        checked_value = False
        for _ in range(400):
            if self.exact is not None:
                return (self.exact > value) - (self.exact < value)
            if Fraction(self.lo, 1 << self.bits) > value:
                return 1
            if Fraction(self.hi, 1 << self.bits) < value:
                return -1
            if not checked_value:
                checked_value = True
                if self.poly.eval_fraction(value) == 0:
                    # the bracket isolates its root, so a bracketed
                    # rational root is the pinned root itself
                    return 0
            self._refine()
        raise PrecisionError("root comparison did not resolve")

    def resolve_sign(self, ints):
        """Sign at the root, or None when the current bracket is too wide."""
        if self.exact is not None:
            v = IntPolynomial(ints).eval_fraction(self.exact)
            return (v > 0) - (v < 0)
        return _interval_sign(ints, self.lo, self.hi, self.bits)

    def force_sign(self, ints):
        """Certified nonzero sign at the root; the caller must have ruled
        out vanishing, which makes the refinement loop terminate."""
        for _ in range(200):
            s = self.resolve_sign(ints)
            if s is not None:
                return s
            for _ in range(12):
                if self.exact is not None:
                    break
                self._refine()
        raise PrecisionError(f"sign of {IntPolynomial(ints).to_text()} "
                             "did not resolve at the pinned root")

    def vanishes(self, q):
        """Exact zero test of q at the root, via gcd with the modulus."""
        g = q.gcd(self.poly)
        if g.degree < 1:
            return False
        if self.exact is not None:
            return g.eval_fraction(self.exact) == 0
        gi = list(g.coeffs)
        a = _dyadic_sign(gi, self.lo, self.bits)
        b = _dyadic_sign(gi, self.hi, self.bits)
        # g divides the modulus, which is nonzero at both bracket ends
        return a != b


def _newton_polish(desc, dp, x):
    """Newton refinement of a float root; None when ill-conditioned."""
    for _ in range(60):
        d = np.polyval(dp, x)
        if abs(d) < 1e-2:
            return None
        step = np.polyval(desc, x) / d
        x -= step
        if abs(step) < 1e-14:
            break
    if abs(np.polyval(dp, x)) < 1e-2:
        return None
    return x


def _float_screen(coeffs, signs, top):
    """Float verdict for one closure candidate.

    Returns (found, serious, pairs, gap_ok): found marks a root in the
    slope window, serious marks a root that survives the itinerary screen
    and needs certified work, pairs collects orbit index pairs whose
    values nearly coincide at a surviving root (candidate earlier
    closures), gap_ok certifies nothing but reports that all float roots
    are well separated.

    Rejection demands a well-conditioned polished root and sign margins
    far above the propagated float error, so a true parameter is never
    lost here; acceptance is never decided here either."""
    desc = coeffs[::-1]
    dp = np.polyder(np.array(desc, dtype=np.float64))
    roots = np.roots(desc)
    gap_ok = True
    for i in range(len(roots)):
        for k in range(i + 1, len(roots)):
            if abs(roots[i] - roots[k]) < 1e-4:
                gap_ok = False
                break
        if not gap_ok:
            break
    found = False
    serious = False
    pairs = set()
    for z in roots:
        if abs(z.imag) > 1e-7 or not (1 - 1e-6 < z.real < 2 + 1e-6):
            continue
        found = True
        x = _newton_polish(desc, dp, z.real)
        if x is None:
            serious = True
            continue
        vals = [0.0, -1.0]
        for k in range(1, top - 1):
            vals.append(signs[k - 1] * x * vals[k] - 1.0)
        reject = False
        for k in range(1, top):
            y = vals[k]
            if abs(y) < 1e-2:
                continue
            if (1 if y > 0 else -1) != signs[k - 1]:
                reject = True
                break
        if reject:
            continue
        serious = True
        for b in range(1, top):
            for a in range(b):
                if abs(vals[a] - vals[b]) < 1e-3:
                    pairs.add((a, b))
    return found, serious, pairs, gap_ok


def _bracket_roots(poly):
    """Pinned roots of poly in the slope window, built from verified
    float roots: each bracket is tiny, dyadic, and certified by an exact
    sign change, then separated from the window ends by exact bisection.

    Returns (states, ok); ok False means some root resisted the cheap
    bracketing and the caller must fall back to certified enclosures.
    A root exactly at 2 is kept, one exactly at 1 is excluded."""
    ints = list(poly.coeffs)
    at_two = _dyadic_sign(ints, 2, 0) == 0
    at_one = _dyadic_sign(ints, 1, 0) == 0
    states = []
    if at_two:
        states.append(_KneadRoot.from_exact(poly, 2))
    desc = ints[::-1]
    dp = np.polyder(np.array(desc, dtype=np.float64))
    xs = []
    for z in np.roots(desc):
        if abs(z.imag) > 1e-7 or not (1 - 1e-6 < z.real < 2 + 1e-6):
            continue
        x = z.real
        if (at_two and abs(x - 2) < 1e-5) or (at_one and abs(x - 1) < 1e-5):
            continue
        xs.append(x)
    xs.sort()
    kept = []
    for x in xs:
        if kept and x - kept[-1] < 1e-8:
            continue
        kept.append(x)
    for x0 in kept:
        x = _newton_polish(desc, dp, x0)
        if x is None:
            return states, False
        state = None
        delta = 2.0 ** -30
        for _ in range(4):
            lo = math.floor((x - delta) * (1 << 48))
            hi = math.ceil((x + delta) * (1 << 48))
            slo = _dyadic_sign(ints, lo, 48)
            shi = _dyadic_sign(ints, hi, 48)
            if slo == 0:
                state = _KneadRoot.from_exact(poly, Fraction(lo, 1 << 48))
                break
            if shi == 0:
                state = _KneadRoot.from_exact(poly, Fraction(hi, 1 << 48))
                break
            if slo != shi:
                state = _KneadRoot.from_bracket(poly, lo, hi, 48, slo)
                break
            delta *= 8.0
        if state is None:
            return states, False
        if state.compare(1) <= 0 or state.compare(2) > 0:
            continue
        states.append(state)
    return states, True


def _exact_itinerary(state, ys, signs, top):
    """Certified sign checks of the orbit polynomials at the pinned root;
    None flags a tie (the orbit lands exactly on the critical point)."""
    for k in range(1, top):
        ints = list(ys[k])
        while ints and ints[-1] == 0:
            ints.pop()
        if not ints:
            return None
        s = state.resolve_sign(ints)
        if s is None or s == 0:
            if state.vanishes(IntPolynomial(ints)):
                return None
            s = state.force_sign(ints)
        if s != signs[k - 1]:
            return False
    return True


_GCD_PRIME = (1 << 31) - 1


def _shares_factor_mod(a, b, p=_GCD_PRIME):
    """False only when gcd(a, b) is certainly constant: a nonconstant gcd
    over Z stays nonconstant mod p as long as the leading coefficients do
    not vanish mod p, so a constant gcd mod p rules it out exactly."""
    fa = [c % p for c in a]
    fb = [c % p for c in b]
    while fa and fa[-1] == 0:
        fa.pop()
    while fb and fb[-1] == 0:
        fb.pop()
    if len(fa) != len(a) or len(fb) != len(b):
        return True
    while fb:
        if len(fb) == 1:
            return False
        inv = pow(fb[-1], p - 2, p)
        while len(fa) >= len(fb):
            c = fa[-1] * inv % p
            off = len(fa) - len(fb)
            for i in range(len(fb)):
                fa[i + off] = (fa[i + off] - c * fb[i]) % p
            while fa and fa[-1] == 0:
                fa.pop()
        fa, fb = fb, fa
    return True


def _enc_in_window(sq, enc):
    """Is this certified enclosure a real root in (1, 2]?"""
    if not enc.is_real:
        return False
    iv = enc.real_interval()
    if not (iv.lo > 1):
        return False
    if iv.hi > 2:
        # the enclosure may straddle 2; keep it only when the root is
        # exactly 2
        return iv.lo <= 2 and sq.eval_fraction(Fraction(2)) == 0
    return True


def _certified_kernel(kernel, cache):
    """Certified enclosures of the kernel roots, retrying through the
    squarefree part if the optimistic kernel still had a repeated factor."""
    key = tuple(kernel.coeffs)
    if key not in cache:
        eps = Fraction(1, 1 << 40)
        try:
            cache[key] = (kernel, solve_squarefree(kernel, eps), {})
        except PrecisionError:
            sq = kernel.squarefree_part()
            cache[key] = (sq, solve_squarefree(sq, eps), {})
    return cache[key]


def _enc_admissible(sq, encs, enc_states, ys, signs, top):
    """Run the exact itinerary at every in-window enclosure root."""
    admissible = []
    saw_tie = False
    in_range = 0
    for idx, enc in enumerate(encs):
        if not _enc_in_window(sq, enc):
            continue
        in_range += 1
        if idx not in enc_states:
            enc_states[idx] = _KneadRoot.from_enclosure(sq, enc)
        ok = _exact_itinerary(enc_states[idx], ys, signs, top)
        if ok is None:
            saw_tie = True
        elif ok:
            admissible.append(enc)
    return admissible, saw_tie, in_range


def pcf_tent_roots(max_period):
    """Tent slopes in (1, 2] whose critical orbit closes, enumerated by
    sign sequence and certified by exact arithmetic at each root.

    Only minimal closures are recorded: when the orbit of a candidate root
    already repeats with a shorter prefix, the corresponding factor is
    removed by an exact gcd, so every parameter appears once, at its true
    postcritical length (bucket non_minimal).  A float screen discards
    candidates whose roots confidently fail their own itinerary; anything
    accepted goes through certified enclosures, integer interval
    arithmetic at the root, and exact gcd tie tests, never through floats.
    """
    if max_period < 2:
        raise ValueError("max_period must be at least 2")
    records = []
    per_period = {}
    dropped = {"no_root_in_range": 0, "itinerary_mismatch": 0,
               "sign_tie": 0, "non_minimal": 0}
    roots_cache = {}
    bracket_cache = {}
    for n, j, signs, coeffs in _kneading_polys(max_period):
        if len(coeffs) < 2:
            continue
        if coeffs[-1] < 0:
            coeffs = [-c for c in coeffs]
        top = n if j == 0 else n + 1
        found, serious, pairs, gap_ok = _float_screen(coeffs, signs, top)
        if not found:
            dropped["no_root_in_range"] += 1
            continue
        if not serious:
            dropped["itinerary_mismatch"] += 1
            continue
        ys = _sign_orbit(signs, top)
        poly = IntPolynomial(coeffs).primitive()
        kernel = poly if gap_ok else poly.squarefree_part()
        trimmed = False
        for a, b in sorted(pairs):
            q = IntPolynomial(_poly_sub(ys[b], ys[a]))
            while _shares_factor_mod(kernel.coeffs, q.coeffs):
                g = kernel.gcd(q)
                if g.degree < 1:
                    break
                kernel = _exact_div(kernel, g)
                trimmed = True
                if kernel.degree < 1:
                    break
            if kernel.degree < 1:
                break
        admissible = []
        saw_tie = False
        in_range = 0
        if kernel.degree >= 1:
            key = tuple(kernel.coeffs)
            if key not in bracket_cache:
                bracket_cache[key] = _bracket_roots(kernel)
            states, cheap_ok = bracket_cache[key]
            if cheap_ok:
                in_range = len(states)
                hit = False
                for state in states:
                    ok = _exact_itinerary(state, ys, signs, top)
                    if ok is None:
                        saw_tie = True
                    elif ok:
                        hit = True
                if hit:
                    kernel, encs, enc_states = _certified_kernel(
                        kernel, roots_cache)
                    admissible, tie2, in_range = _enc_admissible(
                        kernel, encs, enc_states, ys, signs, top)
                    saw_tie = saw_tie or tie2
                    if not admissible:
                        raise AssertionError(
                            "bracket and enclosure itineraries disagree")
            else:
                kernel, encs, enc_states = _certified_kernel(
                    kernel, roots_cache)
                admissible, saw_tie, in_range = _enc_admissible(
                    kernel, encs, enc_states, ys, signs, top)
        if admissible:
            records.append({
                "n": n,
                "closure": j,
                "signs": signs,
                "poly": poly,
                "squarefree": kernel,
                "roots": encs,
                "admissible": admissible,
            })
            per_period[n] = per_period.get(n, 0) + len(admissible)
        elif saw_tie:
            dropped["sign_tie"] += 1
        elif in_range:
            dropped["itinerary_mismatch"] += 1
        elif trimmed:
            dropped["non_minimal"] += 1
        else:
            dropped["no_root_in_range"] += 1
    return PcfRoots(records, per_period, dropped, max_period)


# -- emitters ------------------------------------------------------------


def write_orbit_csv(record, fh):
    """step, then exact coordinates as num/den pairs flattened."""
    pts = record.points or [record.point_at(k)
                            for k in range(record.length)]
    width = 1
    for p in pts:
        if isinstance(p, FieldElement):
            width = len(p.coords)
            break
    heads = ["step"]
    for i in range(width):
        heads += [f"c{i}_num", f"c{i}_den"]
    fh.write(",".join(heads) + "\n")
    for k, p in enumerate(pts):
        cs = list(p.coords) if isinstance(p, FieldElement) else [Fraction(p)]
        cs = cs + [Fraction(0)] * (width - len(cs))
        cells = [str(k)]
        for c in cs:
            cells += [str(c.numerator), str(c.denominator)]
        fh.write(",".join(cells) + "\n")


def write_trajectory_csv(traj, fh):
    fh.write(",".join(["step"] + traj.labels) + "\n")
    for step, row in zip(traj.steps, traj.rows):
        fh.write(",".join([str(step)] + [repr(v) for v in row]) + "\n")


def write_root_cloud_csv(result, fh):
    fh.write("re,im,poly,period\n")
    for pid, rec in enumerate(result.records):
        for enc in rec["roots"]:
            fh.write(f"{float(enc.re)!r},{float(enc.im)!r},{pid},{rec['n']}\n")
