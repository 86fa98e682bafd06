"""Piecewise-linear interval maps and their crossing matrices.

A map is stored by its breakpoints and values with exact scalars, either
Fraction or FieldElement.  The crossing matrix of a map relative to an
invariant vertex set counts, in column j, how often the image of the j-th
gap sweeps across each gap; together with the vertex permutation phi this
data determines the map up to the zigzag order, and conversely every
matrix/phi pair passing the parity and block tests is realized by a map
with constant absolute slope equal to the spectral radius.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .field import FieldElement, NumberField, ReducibleModulusError
from .intervals import Interval, eval_poly_box
from .polys import IntPolynomial
from .roots import poly_roots


class IncidenceError(ValueError):
    """Vertex data does not describe the map; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness or {}


class RealizationError(ValueError):
    pass


# -- scalar helpers (Fraction or FieldElement, never mixed) --------------


def _scalar_sign(x):
    if isinstance(x, FieldElement):
        return x.field.sign_of(x)
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _scalar_json(x):
    if isinstance(x, FieldElement):
        return x.to_json()
    q = Fraction(x)
    return [q.numerator, q.denominator]


# -- PL maps -------------------------------------------------------------


class PLMap:
    """Continuous piecewise-affine self map given by breakpoints and values."""

    def __init__(self, breakpoints, values, field=None, notes=None):
        if len(breakpoints) != len(values):
            raise ValueError("breakpoints and values must have equal length")
        if len(breakpoints) < 2:
            raise ValueError("need at least two breakpoints")
        self.breakpoints = list(breakpoints)
        self.values = list(values)
        self.field = field
        self.notes = dict(notes or {})
        for a, b in zip(self.breakpoints, self.breakpoints[1:]):
            if _scalar_sign(b - a) <= 0:
                raise ValueError("breakpoints must be strictly increasing")
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        for v in self.values:
            if _scalar_sign(v - lo) < 0 or _scalar_sign(hi - v) < 0:
                raise ValueError("values must stay inside the domain interval")
        self._dirs = [_scalar_sign(b - a) for a, b in zip(self.values, self.values[1:])]
        self.collinear = self._has_collinear()

    def _has_collinear(self):
        for i in range(1, len(self.breakpoints) - 1):
            s0 = self.slope(i - 1)
            s1 = self.slope(i)
            if _scalar_sign(s0 - s1) == 0:
                return True
        return False

    @property
    def domain(self):
        return (self.breakpoints[0], self.breakpoints[-1])

    def pieces(self):
        return len(self.breakpoints) - 1

    def slope(self, i):
        dx = self.breakpoints[i + 1] - self.breakpoints[i]
        dy = self.values[i + 1] - self.values[i]
        return dy / dx

    def __call__(self, x):
        xs = self.breakpoints
        if _scalar_sign(x - xs[0]) < 0 or _scalar_sign(xs[-1] - x) < 0:
            raise ValueError("argument outside the domain")
        lo, hi = 0, len(xs) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _scalar_sign(x - xs[mid]) >= 0:
                lo = mid
            else:
                hi = mid
        if _scalar_sign(x - xs[lo]) == 0:
            return self.values[lo]
        t = (x - xs[lo]) / (xs[lo + 1] - xs[lo])
        return self.values[lo] + t * (self.values[lo + 1] - self.values[lo])

    def turning_points(self):
        """Breakpoints where the running direction reverses, with values.

        Zero-slope pieces do not reset the direction, so a flat shelf
        between two rising pieces is not a turn.
        """
        out = []
        last = 0
        for i, d in enumerate(self._dirs):
            if d == 0:
                continue
            if last != 0 and d != last:
                out.append((self.breakpoints[i], self.values[i]))
            last = d
        return out

    def iterate(self, x, k):
        for _ in range(k):
            x = self(x)
        return x

    def to_json(self):
        doc = {
            "breakpoints": [_scalar_json(x) for x in self.breakpoints],
            "values": [_scalar_json(v) for v in self.values],
            "scalar": "field" if self.field is not None else "rational",
            "collinear": self.collinear,
        }
        if self.field is not None:
            doc["field"] = {"min_poly": self.field.min_poly.to_json()}
        if "vertices" in self.notes:
            doc["vertices"] = [_scalar_json(x) for x in self.notes["vertices"]]
        if self.notes.get("collapsed_intervals"):
            doc["collapsed_intervals"] = list(self.notes["collapsed_intervals"])
        if "rho" in self.notes:
            rho = self.notes["rho"]
            doc["rho"] = {"lo": str(rho.lo), "hi": str(rho.hi)}
        return doc


# -- crossing matrices ---------------------------------------------------


class ExtendedIncidenceMatrix:
    """Nonnegative integer matrix plus the vertex map phi.

    Column j records how many times the image of the j-th gap covers each
    gap; phi(i) is the index of the image of the i-th vertex.
    """

    def __init__(self, matrix, phi):
        rows = tuple(tuple(int(x) for x in row) for row in matrix)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if any(x < 0 for r in rows for x in r):
            raise ValueError("entries must be nonnegative")
        phi = tuple(int(v) for v in phi)
        if len(phi) != n + 1 or any(not 0 <= v <= n for v in phi):
            raise ValueError("phi must map {0..n} into {0..n}")
        self.matrix = rows
        self.phi = phi
        self.n = n

    def column(self, j):
        """1-based column j as a 1-based-friendly list (index 0 unused)."""
        return [0] + [self.matrix[i][j - 1] for i in range(self.n)]

    def __eq__(self, other):
        return (
            isinstance(other, ExtendedIncidenceMatrix)
            and self.matrix == other.matrix
            and self.phi == other.phi
        )

    def __hash__(self):
        return hash((self.matrix, self.phi))

    def __repr__(self):
        return f"ExtendedIncidenceMatrix({[list(r) for r in self.matrix]}, phi={list(self.phi)})"

    def to_json(self):
        return {"matrix": [list(r) for r in self.matrix], "phi": list(self.phi)}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["matrix"], doc["phi"])


def _rows_of(matrix):
    if isinstance(matrix, ExtendedIncidenceMatrix):
        return [list(r) for r in matrix.matrix]
    rows = [list(r) for r in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    for r in rows:
        for x in r:
            if int(x) != x or x < 0:
                raise ValueError("entries must be nonnegative integers")
    return [[int(x) for x in r] for r in rows]


def _column_ok(col, p, q):
    """Can a zigzag from vertex p to vertex q cross the gaps `col` times?

    col is 1-based (col[0] ignored).  Equivalent to the existence of an
    Euler walk from p to q in the path multigraph with col[i] copies of
    the edge {i-1, i}: support consecutive and containing both endpoints,
    odd entries exactly strictly between min(p,q) and max(p,q) inclusive
    of the upper index.
    """
    n = len(col) - 1
    nz = [i for i in range(1, n + 1) if col[i] > 0]
    if not nz:
        return False
    b, t = nz[0] - 1, nz[-1]
    if any(col[i] == 0 for i in range(nz[0], nz[-1] + 1)):
        return False
    lo, hi = min(p, q), max(p, q)
    if not (b <= lo and hi <= t):
        return False
    for i in range(1, n + 1):
        if (col[i] % 2 == 1) != (lo < i <= hi):
            return False
    return True


def is_extended_incidence(matrix):
    """Lexicographically least phi realizing the matrix, or None.

    Feasible (phi(j-1), phi(j)) pairs per column form a chain; a backward
    reachability pass followed by a greedy forward pass gives the least
    witness without backtracking.
    """
    rows = _rows_of(matrix)
    n = len(rows)
    if n == 0:
        return None
    verts = range(n + 1)
    cols = [[0] + [rows[i][j] for i in range(n)] for j in range(n)]
    pairs = []
    for col in cols:
        ok = {(p, q) for p in verts for q in verts if _column_ok(col, p, q)}
        if not ok:
            return None
        pairs.append(ok)
    feas = [set(verts)]
    for ok in reversed(pairs):
        nxt = feas[0]
        feas.insert(0, {p for p in verts if any((p, q) in ok for q in nxt)})
    if not feas[0]:
        return None
    phi = [min(feas[0])]
    for j in range(n):
        phi.append(min(q for q in feas[j + 1] if (phi[j], q) in pairs[j]))
    return tuple(phi)


# -- zigzag construction -------------------------------------------------


def _walk_feasible(counts, here, target):
    """Euler walk from `here` to `target` using every remaining crossing."""
    n = len(counts) - 1
    nz = [i for i in range(1, n + 1) if counts[i] > 0]
    if not nz:
        return here == target
    a, z = nz[0] - 1, nz[-1]
    if any(counts[i] == 0 for i in range(nz[0], nz[-1] + 1)):
        return False
    if not (a <= here <= z and a <= target <= z):
        return False
    odd = set()
    for v in range(0, n + 1):
        left = counts[v] if v >= 1 else 0
        right = counts[v + 1] if v + 1 <= n else 0
        if (left + right) % 2 == 1:
            odd.add(v)
    if here == target:
        return not odd
    return odd == {here, target}


def _euler_walk(counts, p, q):
    """Vertex sequence of a crossing-exact walk, merged into monotone legs.

    Steps prefer to keep the current direction (initially downward) and a
    step is only taken when the remainder stays completable, so the walk
    is deterministic and never backtracks.
    """
    c = list(counts)
    if not _walk_feasible(c, p, q):
        raise RealizationError(f"no walk from {p} to {q} with counts {counts[1:]}")
    n = len(c) - 1
    path = [p]
    here = p
    direction = -1
    while any(c[i] > 0 for i in range(1, n + 1)):
        moved = False
        for d in (direction, -direction):
            edge = here if d < 0 else here + 1
            nxt = here + d
            if not (0 <= nxt <= n) or edge < 1 or edge > n or c[edge] == 0:
                continue
            c[edge] -= 1
            if _walk_feasible(c, nxt, q):
                here = nxt
                if d == direction and len(path) > 1:
                    path[-1] = here
                else:
                    path.append(here)
                direction = d
                moved = True
                break
            c[edge] += 1
        if not moved:
            raise RealizationError("walk construction stalled")
    return path


# -- exact spectral data -------------------------------------------------


def _int_det(rows):
    """Bareiss fraction-free determinant of an integer matrix."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
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
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def charpoly(matrix):
    """det(x I - A) as an IntPolynomial, by interpolation at 0..n."""
    rows = _rows_of(matrix)
    n = len(rows)
    xs = list(range(n + 1))
    ys = []
    for k in xs:
        m = [[(k if i == j else 0) - rows[i][j] for j in range(n)] for i in range(n)]
        ys.append(_int_det(m))
    coeffs = [Fraction(0)] * (n + 1)
    for i, xi in enumerate(xs):
        num = [Fraction(1)]
        den = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            num = [a * (-xj) + b for a, b in zip(num + [Fraction(0)], [Fraction(0)] + num)]
            den *= xi - xj
        w = Fraction(ys[i]) / den
        for t, a in enumerate(num):
            coeffs[t] += a * w
    ints = []
    for a in coeffs:
        if a.denominator != 1:
            raise RealizationError("characteristic polynomial interpolation failed")
        ints.append(a.numerator)
    return IntPolynomial(ints)


_FIELD_CACHE = {}


def _field_for(poly, rho_enc):
    key = poly.coeffs
    fld = _FIELD_CACHE.get(key)
    if fld is None:
        idx = _matching_root(poly, rho_enc)
        fld = NumberField.make(poly, which_root=idx)
        _FIELD_CACHE[key] = fld
    return fld


def _matching_root(poly, rho_enc):
    target = rho_enc.real_interval()
    hits = [
        e.index for e in poly_roots(poly)
        if e.is_real and e.real_interval().overlaps(target)
    ]
    if len(hits) != 1:
        raise RealizationError("could not re-identify the leading eigenvalue")
    return hits[0]


def _split_modulus(fld, factor, rho_enc):
    """After a zero divisor, restart in whichever factor kills the eigenvalue."""
    if factor.leading() < 0:
        factor = IntPolynomial([-c for c in factor.coeffs])
    # primitive integer divisor of a monic integer polynomial is monic
    if not factor.is_monic():
        raise RealizationError("reported factor is not monic")
    quo, rem = fld.min_poly.divmod_exact(factor)
    if not rem.is_zero():
        raise RealizationError("reported factor does not divide the modulus")
    lam = fld.lam_enclosure
    eps = max(lam.radius, Fraction(1, 1 << 20))
    for _ in range(80):
        off = [c for c in (factor, quo)
               if not eval_poly_box(c, lam.box()).contains_zero()]
        keep = [c for c in (factor, quo) if c not in off]
        if len(keep) == 1:
            return _field_for(keep[0], lam)
        eps = eps * eps if eps < 1 else Fraction(1, 1 << 40)
        lam = fld.refined_roots(eps)[fld.lambda_index]
    raise RealizationError("could not localize the eigenvalue after a split")


def _kernel_basis(m, zero, one):
    """Basis of the kernel of a square matrix over an exact field."""
    n = len(m)
    m = [row[:] for row in m]
    pivots = []
    r = 0
    for c in range(n):
        pivot = None
        for i in range(r, n):
            if m[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = one / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(n):
            if i != r:
                f = m[i][c]
                if not (f == 0):
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        vec = [zero] * n
        vec[fc] = one
        for rr, pc in enumerate(pivots):
            vec[pc] = -m[rr][fc]
        basis.append(vec)
    return basis


def _nonnegative_eigenvector(basis):
    """A nonnegative nonzero kernel vector, or None.

    Each basis vector is sign-normalized at its first nonzero entry; their
    sum works whenever the one-dimensional pieces are individually signed,
    which covers every matrix produced by the crossing tests.
    """
    fixed = []
    for vec in basis:
        s = 0
        for x in vec:
            s = _scalar_sign(x)
            if s != 0:
                break
        if s < 0:
            vec = [-x for x in vec]
        signs = [_scalar_sign(x) for x in vec]
        if any(s < 0 for s in signs):
            continue
        fixed.append(vec)
    if not fixed:
        return None
    out = fixed[0]
    for vec in fixed[1:]:
        out = [a + b for a, b in zip(out, vec)]
    return out


def _strip_integer_roots(sf, rows):
    """Remove x - k factors; integer eigenvalues never carry the radius here.

    Rational eigenvalues of a monic integer matrix polynomial are integers
    bounded by the max row sum, so a short scan finds them all; dropping
    them shrinks the working modulus and avoids most zero-divisor splits.
    """
    bound = max(sum(r) for r in rows) + 1
    for k in range(-bound, bound + 1):
        while sf.degree > 1 and sf(k) == 0:
            q, _ = sf.divmod_exact(IntPolynomial([-k, 1]))
            sf = q
    return sf


def _build_map(rows, phi, n, rho, field, zero):
    """Eigenvector lengths, collapse, and the zigzag legs, over one scalar type."""
    mat = []
    for i in range(n):
        row = []
        for j in range(n):
            x = Fraction(rows[j][i]) if field is None else field.from_rational(rows[j][i])
            row.append(x)
        mat.append(row)
    one = Fraction(1) if field is None else field.one()
    for i in range(n):
        mat[i][i] = mat[i][i] - rho
    basis = _kernel_basis(mat, zero, one)
    vec = _nonnegative_eigenvector(basis)
    if vec is None:
        raise RealizationError("no nonnegative leading eigenvector found")
    total = zero
    for x in vec:
        total = total + x
    lengths = [x / total for x in vec]

    dropped = [j + 1 for j in range(n) if lengths[j] == 0]
    keep = [j for j in range(n) if j + 1 not in dropped]
    # vertex i of the original data sits at the sum of lengths before it
    vertex_pos = [zero]
    for j in range(n):
        vertex_pos.append(vertex_pos[-1] + lengths[j])
    remap = []
    seen = {}
    for i in range(n + 1):
        key = vertex_pos[i]
        if key not in seen:
            seen[key] = len(seen)
        remap.append(seen[key])
    new_phi = [0] * (len(keep) + 1)
    for i in range(n + 1):
        new_phi[remap[i]] = remap[phi[i]]
    verts = list(seen)  # insertion order ascends with position

    xs = [verts[0]]
    ys = [verts[new_phi[0]]]
    for jj, j in enumerate(keep):
        col = [0] + [rows[i][j] for i in keep]
        walk = _euler_walk(col, new_phi[jj], new_phi[jj + 1])
        x = xs[-1]
        for a, b in zip(walk, walk[1:]):
            span = verts[b] - verts[a]
            if _scalar_sign(span) < 0:
                span = -span
            x = x + span / rho
            xs.append(x)
            ys.append(verts[b])
        if (x - verts[jj + 1]) != 0:
            raise RealizationError("leg widths do not close up")
        xs[-1] = verts[jj + 1]
    # exercise every gap inverse now so later slope and crossing queries
    # cannot run into a fresh modulus split
    if field is not None:
        for a, b in zip(xs, xs[1:]):
            (b - a).inverse()
    return xs, ys, verts, new_phi, lengths, keep, dropped


def realize_pl_map(matrix, phi=None):
    """Constant-slope map on [0, 1] with the given crossing data.

    Gap widths come from the exact leading eigenvector of the transpose.
    Zero widths (reducible case) collapse; the dropped gap indices are
    reported in notes["collapsed_intervals"] and the returned map realizes
    the collapsed data, which is the image of the semiconjugacy.
    """
    rows = _rows_of(matrix)
    n = len(rows)
    if phi is None:
        phi = is_extended_incidence(rows)
        if phi is None:
            raise RealizationError("matrix admits no vertex map")
    phi = tuple(int(v) for v in phi)
    if len(phi) != n + 1 or any(not 0 <= v <= n for v in phi):
        raise RealizationError("phi must map {0..n} into {0..n}")
    cols = [[0] + [rows[i][j] for i in range(n)] for j in range(n)]
    for j, col in enumerate(cols):
        if not _column_ok(col, phi[j], phi[j + 1]):
            raise RealizationError(f"column {j + 1} is not realizable with this phi")

    cp = charpoly(rows)
    sf = cp.squarefree_part()
    encs = [e for e in poly_roots(sf) if e.is_real and e.real_interval().sign() == 1]
    if not encs:
        raise RealizationError("no positive leading eigenvalue")
    rho_enc = max(encs, key=lambda e: e.re)

    if rho_enc.radius == 0:
        field = None
        rho = Fraction(rho_enc.re)
        built = _build_map(rows, phi, n, rho, None, Fraction(0))
    else:
        minp = _strip_integer_roots(sf, rows)
        while True:
            field = _field_for(minp, rho_enc)
            rho_enc = field.lam_enclosure
            try:
                built = _build_map(rows, phi, n, field.lam(), field, field.zero())
                break
            except ReducibleModulusError as err:
                new_field = _split_modulus(field, err.factor, rho_enc)
                minp = new_field.min_poly
                rho_enc = new_field.lam_enclosure

    xs, ys, verts, new_phi, lengths, keep, dropped = built
    notes = {
        "vertices": verts,
        "phi": tuple(new_phi),
        "lengths": [lengths[j] for j in keep],
        "rho": rho_enc.real_interval(),
        "collapsed_intervals": dropped,
        "char_poly": cp,
    }
    return PLMap(xs, ys, field=field, notes=notes)


# -- crossing data of a given map ----------------------------------------


def incidence_of(f, vertices):
    """Crossing matrix and phi of f relative to the vertex list.

    The list must be strictly increasing, span the domain, be forward
    invariant, and contain every turning value; otherwise IncidenceError
    reports a witness.
    """
    V = list(vertices)
    if len(V) < 2:
        raise IncidenceError("need at least two vertices")
    for a, b in zip(V, V[1:]):
        if _scalar_sign(b - a) <= 0:
            raise IncidenceError("vertices must be strictly increasing")
    d0, d1 = f.domain
    if (V[0] - d0) != 0 or (V[-1] - d1) != 0:
        raise IncidenceError("vertices must span the domain")

    def index_of(value):
        for i, v in enumerate(V):
            if (value - v) == 0:
                return i
        return None

    phi = []
    for i, v in enumerate(V):
        img = f(v)
        k = index_of(img)
        if k is None:
            raise IncidenceError(
                "vertex set is not forward invariant",
                witness={"vertex": i, "image": img},
            )
        phi.append(k)
    turns = f.turning_points()
    for x, y in turns:
        if index_of(y) is None:
            raise IncidenceError(
                "turning value outside the vertex set",
                witness={"point": x, "value": y},
            )

    n = len(V) - 1
    matrix = [[0] * n for _ in range(n)]
    turn_xs = [x for x, _ in turns]
    for j in range(n):
        legs = [V[j]]
        for x in turn_xs:
            if _scalar_sign(x - V[j]) > 0 and _scalar_sign(V[j + 1] - x) > 0:
                legs.append(x)
        legs.append(V[j + 1])
        for a, b in zip(legs, legs[1:]):
            ia = index_of(f(a))
            ib = index_of(f(b))
            if ia is None or ib is None:
                raise IncidenceError(
                    "leg endpoint value outside the vertex set",
                    witness={"interval": j + 1},
                )
            for row in range(min(ia, ib) + 1, max(ia, ib) + 1):
                matrix[row - 1][j] += 1
    return ExtendedIncidenceMatrix(matrix, phi)


# -- spectral radius with certificates -----------------------------------


class SpectralResult:
    def __init__(self, rho, right, left, structure, period, iterations):
        self.rho = rho
        self.right = tuple(right)
        self.left = tuple(left)
        self.structure = structure
        self.period = period
        self.iterations = iterations

    def __repr__(self):
        return (
            f"SpectralResult(rho~{self.rho.to_float():.6g}, {self.structure})"
        )

    def to_json(self):
        return {
            "rho": {"lo": str(self.rho.lo), "hi": str(self.rho.hi),
                    "float": self.rho.to_float()},
            "right": [[q.numerator, q.denominator] for q in self.right],
            "left": [[q.numerator, q.denominator] for q in self.left],
            "structure": self.structure,
            "period": self.period,
            "iterations": self.iterations,
        }


def _reachability(rows):
    n = len(rows)
    reach = [[rows[i][j] > 0 for j in range(n)] for i in range(n)]
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return reach


def _components(rows):
    n = len(rows)
    reach = _reachability(rows)
    comp = [-1] * n
    comps = []
    for i in range(n):
        if comp[i] >= 0:
            continue
        members = [j for j in range(n) if
                   (i == j) or (reach[i][j] and reach[j][i])]
        for j in members:
            comp[j] = len(comps)
        comps.append(members)
    return comps


def _period_of(rows, members):
    """gcd of cycle lengths inside one strongly connected piece."""
    level = {members[0]: 0}
    queue = [members[0]]
    g = 0
    while queue:
        u = queue.pop()
        for v in members:
            if rows[v][u] > 0:  # u covers v, edge u -> v
                if v in level:
                    g = math.gcd(g, abs(level[u] + 1 - level[v]))
                else:
                    level[v] = level[u] + 1
                    queue.append(v)
    return g


def _matvec(rows, v):
    return [sum(r * x for r, x in zip(row, v)) for row in rows]


def _cw_bracket(rows, eps, max_steps):
    """Collatz-Wielandt bracket for one strongly connected block.

    Iterating I + A keeps every class aperiodic, so the quotient bounds
    tighten geometrically; intersecting successive brackets never loses
    the radius.
    """
    n = len(rows)
    bump = [[rows[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    v = [1] * n
    for _ in range(n):
        v = _matvec(bump, v)
    lo_best, hi_best = None, None
    steps = n
    chunk = max(n, 4)
    while True:
        av = _matvec(rows, v)
        ratios = [Fraction(a, b) for a, b in zip(av, v)]
        lo, hi = min(ratios), max(ratios)
        lo_best = lo if lo_best is None else max(lo_best, lo)
        hi_best = hi if hi_best is None else min(hi_best, hi)
        if hi_best - lo_best <= eps or steps >= max_steps:
            return Interval(lo_best, hi_best), v, steps
        for _ in range(chunk):
            v = _matvec(bump, v)
        steps += chunk
        chunk *= 2
        g = 0
        for x in v:
            g = math.gcd(g, x)
        if g > 1:
            v = [x // g for x in v]


def spectral(matrix, eps=Fraction(1, 1 << 40), max_steps=1 << 15):
    """Certified spectral radius plus mixing structure.

    rho is bracketed per strongly connected block and the blockwise
    maximum is exact.  The returned vectors are the positive iterates
    used for the bracket, so min and max of (A v)_i / v_i enclose rho.
    """
    rows = _rows_of(matrix)
    n = len(rows)
    if n == 0:
        raise ValueError("matrix must be nonempty")
    eps = Fraction(eps)
    comps = _components(rows)
    lo = Fraction(0)
    hi = Fraction(0)
    total_steps = 0
    for members in comps:
        if len(members) == 1 and rows[members[0]][members[0]] == 0:
            continue
        sub = [[rows[i][j] for j in members] for i in members]
        bracket, _, steps = _cw_bracket(sub, eps, max_steps)
        lo = max(lo, bracket.lo)
        hi = max(hi, bracket.hi)
        total_steps += steps
    if hi < lo:
        hi = lo
    rho = Interval(lo, hi)

    if len(comps) == 1 and (n > 1 or rows[0][0] > 0):
        structure = "ergodic"
        period = _period_of(rows, comps[0])
        if period == 1:
            structure = "mixing"
    else:
        structure = "reducible"
        period = None

    bump = [[rows[i][j] + (1 if i == j else 0) for j in range(n)] for i in range(n)]
    v = [1] * n
    u = [1] * n
    bump_t = [[bump[j][i] for j in range(n)] for i in range(n)]
    for _ in range(max(2 * n, 16)):
        v = _matvec(bump, v)
        u = _matvec(bump_t, u)
    sv = sum(v)
    su = sum(u)
    right = [Fraction(x, sv) for x in v]
    left = [Fraction(x, su) for x in u]
    return SpectralResult(rho, right, left, structure, period, total_steps)


# -- lap counts of iterates ----------------------------------------------


class LapEntropyResult:
    """Sequence of (n, lap count of f^n, log(count)/n) rows.

    The third column has a Theta(1/n) bias; log of the quotient of
    successive counts converges geometrically and tests derive it from
    the exact counts.  `complete` is False when the state budget stopped
    the run early.
    """

    def __init__(self, rows, complete):
        self.rows = list(rows)
        self.complete = complete

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    @property
    def laps(self):
        return [c for _, c, _ in self.rows]

    def rate(self):
        """log of the last successive lap quotient; the sharp estimate."""
        if len(self.rows) < 2:
            return None
        return math.log(Fraction(self.rows[-1][1], self.rows[-2][1]))

    def to_json(self):
        return {
            "rows": [[n, c, est] for n, c, est in self.rows],
            "complete": self.complete,
            "rate": self.rate(),
        }


def lap_entropy_estimate(f, n_max=30, max_states=200000):
    """Lap counts of f, f^2, ..., f^n_max with entropy estimates.

    Branch images are pushed through f as a multiset of value intervals,
    so no symbolic composition is built.  Stops early if the number of
    distinct intervals exceeds max_states.
    """
    turns = f.turning_points()
    turn_xs = [x for x, _ in turns]

    def split(a, b):
        cuts = [a]
        for x in turn_xs:
            if _scalar_sign(x - a) > 0 and _scalar_sign(b - x) > 0:
                cuts.append(x)
        cuts.append(b)
        out = []
        for p, q in zip(cuts, cuts[1:]):
            ya, yb = f(p), f(q)
            if _scalar_sign(yb - ya) < 0:
                ya, yb = yb, ya
            out.append((ya, yb))
        return out

    d0, d1 = f.domain
    states = {}
    for iv in split(d0, d1):
        states[iv] = states.get(iv, 0) + 1
    laps = [sum(states.values())]
    complete = True
    for _ in range(1, n_max):
        nxt = {}
        for (a, b), cnt in states.items():
            for iv in split(a, b):
                nxt[iv] = nxt.get(iv, 0) + cnt
        states = nxt
        laps.append(sum(states.values()))
        if len(states) > max_states:
            complete = False
            break
    rows = [(k + 1, c, math.log(c) / (k + 1)) for k, c in enumerate(laps)]
    return LapEntropyResult(rows, complete)
