"""Expanding models built on a semigroup basis: power matrices, circle
maps of uniform slope, and truncated period-doubling blowups.

Everything here is certified in exact arithmetic.  Matrix columns are
checked against the field identity they encode, circle maps carry an
exact per-column length identity, and the blowup truncation reports a
rational upper bound for the length it leaves out.
"""

import heapq
from fractions import Fraction

from .polys import IntPolynomial
from .field import make_field, classify, mahler_measure
from .cone import build_cone, semigroup_generators, decompose
from .plmap import (
    PLMap,
    ExtendedIncidenceMatrix,
    is_extended_incidence,
    charpoly,
    spectral,
    realize_pl_map,
    _euler_walk,
)


class BuildError(ValueError):
    pass


# -- period-doubling base maps -------------------------------------------


def _doubling_word(n):
    """Kneading word of the unimodal map whose critical point has period 2**n."""
    word = "RC"
    for _ in range(n - 1):
        head = word[:-1]
        step = "L" if head.count("R") % 2 == 1 else "R"
        word = head + step + head + "C"
    return word


def _orbit_order(word):
    """Sort the cyclic shifts of a kneading word in unimodal order.

    Returns the permutation sigma on sorted positions (the successor map)
    and the position of the critical point itself.
    """
    p = len(word)
    rank = {"L": 0, "C": 1, "R": 2}

    def less(t, u):
        par = 1
        for m in range(2 * p):
            a, b = word[(t + m) % p], word[(u + m) % p]
            if a != b:
                return (rank[a] < rank[b]) if par == 1 else (rank[a] > rank[b])
            if a == "R":
                par = -par
        return False

    rots = list(range(p))
    for i in range(1, p):
        j = i
        while j > 0 and less(rots[j], rots[j - 1]):
            rots[j], rots[j - 1] = rots[j - 1], rots[j]
            j -= 1
    pos = {t: i for i, t in enumerate(rots)}
    sigma = [pos[(rots[i] + 1) % p] for i in range(p)]
    return sigma, pos[p - 1]


class DoublingBase:
    """Entropy-zero unimodal orbit model with critical period 2**n."""

    def __init__(self, n):
        if n < 0:
            raise BuildError("n must be nonnegative")
        self.n = n
        self.period = 2 ** n
        if n == 0:
            self.sigma = (0,)
            self.c_pos = 0
            self.markov = ()
            return
        sigma, c_pos = _orbit_order(_doubling_word(n))
        p = self.period
        # the orbit must be a single cycle and the connect-the-dots map
        # through it must be unimodal with the turn at the critical point
        seen, j = set(), 0
        for _ in range(p):
            seen.add(j)
            j = sigma[j]
        if len(seen) != p:
            raise BuildError("orbit permutation is not a single cycle")
        for j in range(p - 1):
            ok = sigma[j] < sigma[j + 1] if j < c_pos else sigma[j] > sigma[j + 1]
            if not ok:
                raise BuildError("orbit order is not unimodal")
        self.sigma = tuple(sigma)
        self.c_pos = c_pos
        lo = [min(sigma[j], sigma[j + 1]) for j in range(p - 1)]
        hi = [max(sigma[j], sigma[j + 1]) for j in range(p - 1)]
        self.markov = tuple(
            tuple(1 if lo[a] <= b < hi[a] else 0 for a in range(p - 1))
            for b in range(p - 1)
        )

    def orbit_points(self):
        p = self.period
        if p == 1:
            return [Fraction(0)]
        return [Fraction(j, p - 1) for j in range(p)]

    def orbit_map(self):
        """The connect-the-dots model map on [0, 1]."""
        if self.n == 0:
            raise BuildError("the period-one orbit spans no interval")
        xs = self.orbit_points()
        return PLMap(xs, [xs[self.sigma[j]] for j in range(self.period)])

    def entropy_certificate(self):
        """Mahler measure of the orbit Markov polynomial; 1.0 means entropy 0."""
        if self.n == 0:
            return 1.0
        return mahler_measure(charpoly([list(r) for r in self.markov])).to_float()

    def to_json(self):
        return {
            "n": self.n,
            "period": self.period,
            "sigma": list(self.sigma),
            "critical_position": self.c_pos,
            "mahler": self.entropy_certificate(),
        }


def doubling_base(n):
    return DoublingBase(n)


# -- generator sequences --------------------------------------------------


def _parity(coords):
    return tuple(int(c) % 2 for c in coords)


class GeneratorSequence:
    """Ordered generator picks whose partial sums walk every parity class.

    The sum T of the whole sequence is even, every basis generator is
    used at least once, and the partial sums meet all 2**d classes of
    the coordinate lattice mod 2.
    """

    def __init__(self, basis, entries):
        self.basis = basis
        self.entries = tuple(int(e) for e in entries)
        gens = basis.generators
        d = len(gens[0])
        if any(not 0 <= e < len(gens) for e in self.entries):
            raise BuildError("sequence entry is out of range")
        if not set(range(len(gens))) <= set(self.entries):
            raise BuildError("sequence must use every generator at least once")
        partial = [(0,) * d]
        for e in self.entries:
            partial.append(tuple(a + b for a, b in zip(partial[-1], gens[e])))
        self.partials = tuple(partial)
        self.T = partial[-1]
        if _parity(self.T) != (0,) * d:
            raise BuildError("sequence sum must be even")
        cover = {}
        for j, p in enumerate(partial):
            cover.setdefault(_parity(p), j)
        if len(cover) != 2 ** d:
            raise BuildError("partial sums must cover every parity class")
        self.parity_cover = cover

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        return {
            "entries": list(self.entries),
            "total": list(self.T),
            "parity_cover": {"".join(map(str, k)): v
                             for k, v in sorted(self.parity_cover.items())},
        }


def _gen_values(basis):
    field = basis.cone.field
    eps = Fraction(1, 2 ** 40)
    out = []
    for g in basis.generators:
        el = field.element([Fraction(c) for c in g])
        out.append(float(field.real_value(el, eps).lo))
    return out


def _parity_path(basis, values, start, accept):
    """Cheapest generator word moving the parity class from start into accept."""
    gens = basis.generators
    dist = {start: (0.0, None, None)}
    heap = [(0.0, start)]
    while heap:
        dv, c = heapq.heappop(heap)
        if dv > dist[c][0]:
            continue
        if accept(c) and c != start:
            path, cur = [], c
            while dist[cur][1] is not None:
                path.append(dist[cur][2])
                cur = dist[cur][1]
            return list(reversed(path))
        for i, g in enumerate(gens):
            nc = tuple((a + b) % 2 for a, b in zip(c, g))
            nd = dv + values[i]
            if nc not in dist or nd < dist[nc][0] - 1e-12:
                dist[nc] = (nd, c, i)
                heapq.heappush(heap, (nd, nc))
    return None


def generator_sequence(basis):
    """Deterministic sequence: every generator once, then the cheapest
    extensions that cover the parity classes and return the sum to 0."""
    gens = basis.generators
    d = len(gens[0])
    values = _gen_values(basis)
    entries = list(range(len(gens)))

    def partials(entries):
        out = [(0,) * d]
        for e in entries:
            out.append(tuple(a + b for a, b in zip(out[-1], gens[e])))
        return out

    P = partials(entries)
    seen = {_parity(p) for p in P}
    while len(seen) < 2 ** d:
        path = _parity_path(basis, values, _parity(P[-1]), lambda c: c not in seen)
        if path is None:
            raise BuildError("generator parities do not span the classes")
        entries.extend(path)
        P = partials(entries)
        seen = {_parity(p) for p in P}
    if _parity(P[-1]) != (0,) * d:
        path = _parity_path(basis, values, _parity(P[-1]),
                            lambda c: c == (0,) * d)
        if path is None:
            raise BuildError("generator parities do not span the classes")
        entries.extend(path)
    return GeneratorSequence(basis, entries)


# -- the power matrix -----------------------------------------------------


class _PowerData:
    """Internal record of one successful power construction."""

    def __init__(self, field, basis, seq, N, lamN, rows, phi, vertex_elements):
        self.field = field
        self.basis = basis
        self.seq = seq
        self.N = N
        self.lamN = lamN
        self.rows = rows
        self.phi = phi
        self.vertex_elements = vertex_elements

    def matrix(self):
        return ExtendedIncidenceMatrix([list(r) for r in self.rows], self.phi)


def _lam_power(field, N):
    out = field.one()
    lam = field.lam()
    for _ in range(N):
        out = out * lam
    return out


def _columns_at_power(field, basis, seq, lamN, extra_targets=None):
    """The parity-recipe columns for lam**N, or None when decompose fails.

    Each image walks from vertex q[i-1] to q[i], crosses every gap at
    least twice, crosses the gaps between the endpoints an odd number of
    times, and satisfies sum(counts * gap) == lam**N * gap exactly.
    """
    gens = basis.generators
    elem = lambda c: field.element([Fraction(x) for x in c])
    gen_els = [elem(g) for g in gens]
    P = seq.partials
    P_els = [elem(p) for p in P]
    T_el = P_els[-1]
    k = len(seq)
    q = []
    for i in range(k + 1):
        target = _parity((lamN * P_els[i]).coords)
        q.append(min(j for j in range(k + 1) if _parity(P[j]) == target))
    first_gap = {}
    for j, e in enumerate(seq.entries):
        first_gap.setdefault(e, j)
    rows = [[0] * k for _ in range(k)]
    for i in range(1, k + 1):
        a, b = q[i - 1], q[i]
        lo, hi = min(a, b), max(a, b)
        D = P_els[hi] - P_els[lo]
        g_i = gen_els[seq.entries[i - 1]]
        rest = lamN * g_i - D - T_el - T_el
        half = [Fraction(c, 2) for c in rest.coords]
        if any(c.denominator != 1 for c in half):
            return None
        extra = (extra_targets or {}).get(i - 1)
        alpha_coords = [int(c) for c in half]
        expected = lamN * g_i
        if extra is not None:
            alpha_coords = [a2 - b2 for a2, b2 in zip(alpha_coords, extra)]
            extra_el = elem(extra)
            expected = expected - extra_el - extra_el
        try:
            mult = decompose(alpha_coords, basis)
        except ValueError:
            return None
        counts = [2] * k
        for j in range(lo, hi):
            counts[j] += 1
        for t, m in enumerate(mult):
            if m:
                counts[first_gap[t]] += 2 * m
        total = field.zero()
        for j in range(k):
            total = total + gen_els[seq.entries[j]] * counts[j]
        if not total == expected:
            raise BuildError("column identity failed")
        for j in range(k):
            rows[j][i - 1] = counts[j]
    return rows, tuple(q), P_els


def _power_data(field, basis, seq, min_power=1, budget=64):
    cone = basis.cone
    elem = lambda c: field.element([Fraction(x) for x in c])
    T_el = elem(seq.T)
    three_T = T_el + T_el + T_el
    gen_els = [elem(g) for g in basis.generators]
    lam = field.lam()
    N = min_power - 1
    pow_els = [g * _lam_power(field, max(N, 0)) for g in gen_els]
    while True:
        N += 1
        if N > min_power + budget:
            raise BuildError("no power satisfies the containment "
                             "within the search budget")
        pow_els = [e * lam for e in pow_els]
        if not all(cone.contains((e - three_T).coords) for e in pow_els):
            continue
        lamN = _lam_power(field, N)
        built = _columns_at_power(field, basis, seq, lamN)
        if built is None:
            continue
        rows, q, P_els = built
        return _PowerData(field, basis, seq, N, lamN,
                          tuple(tuple(r) for r in rows), q, P_els)


def _power_min_poly(field, lamN):
    """Minimal polynomial of lam**N via its multiplication matrix."""
    d = field.degree
    cols = []
    for j in range(d):
        unit = field.element([Fraction(1 if t == j else 0) for t in range(d)])
        cols.append((lamN * unit).coords)
    mult = [[int(cols[j][i]) for j in range(d)] for i in range(d)]
    return charpoly(mult).squarefree_part()


def power_expander_matrix(field, basis, seq, min_power=1, budget=64):
    """Smallest N with lam**N * basis contained past 3T, and the matrix
    of the parity-recipe interval map for that power.

    The result passes is_extended_incidence, its characteristic
    polynomial is divisible by the minimal polynomial of lam**N, and its
    spectral radius encloses lam**N.
    """
    data = _power_data(field, basis, seq, min_power=min_power, budget=budget)
    matrix = data.matrix()
    if is_extended_incidence([list(r) for r in data.rows]) is None:
        raise BuildError("power matrix failed the incidence test")
    if not _power_min_poly(field, data.lamN).divides(charpoly([list(r) for r in data.rows])):
        raise BuildError("characteristic polynomial lost the power root")
    sp = spectral([list(r) for r in data.rows])
    enc = field.real_value(data.lamN, Fraction(1, 2 ** 80))
    if sp.rho.hi < enc.lo or enc.hi < sp.rho.lo:
        raise BuildError("spectral radius moved away from the power")
    return data.N, matrix


# -- the circle map -------------------------------------------------------


class CircleExpander:
    """Circle map of uniform slope lam on N levels of k intervals.

    Interval (i, j) has length lam**i * gap_j.  Levels below the top
    rotate up one step; the top level plays the power map back onto
    level zero.  When the mixing tweak is on, the last column also
    strays across interval (1, 0), which makes the incidence matrix
    primitive.
    """

    def __init__(self, field, basis, seq, N, rows, implant, mixing, spectral_result):
        self.field = field
        self.basis = basis
        self.seq = seq
        self.N = N
        self.k = len(seq)
        self.rows = rows
        self.implant = implant
        self.mixing = mixing
        self.spectral = spectral_result

    def size(self):
        return self.N * self.k

    def length_element(self, i, j):
        g = self.basis.generators[self.seq.entries[j]]
        el = self.field.element([Fraction(c) for c in g])
        return el * _lam_power(self.field, i)

    def verify_slopes(self):
        """Exact identity: each column's covered length is lam times its own."""
        lam = self.field.lam()
        lengths = [self.length_element(i, j)
                   for i in range(self.N) for j in range(self.k)]
        for col in range(self.size()):
            total = self.field.zero()
            for row in range(self.size()):
                c = self.rows[row][col]
                if c:
                    total = total + lengths[row] * c
            if not total == lengths[col] * lam:
                return False
        return True

    def to_json(self):
        return {
            "N": self.N,
            "k": self.k,
            "mixing": self.mixing,
            "structure": self.spectral.structure,
            "period": self.spectral.period,
            "rho": [float(self.spectral.rho.lo), float(self.spectral.rho.hi)],
            "matrix": [list(r) for r in self.rows],
            "sequence": self.seq.to_json(),
        }


def circle_expander(field, basis, seq=None, mixing=False, budget=8):
    """N*k circle model: N-1 rotation levels over the power-map level.

    With mixing=True the top-level column for the last gap is rebuilt to
    stray across interval (1, 0) twice; the spectral structure of the
    result is then certified to be mixing.
    """
    if seq is None:
        seq = generator_sequence(basis)
    k = len(seq)
    min_power = 1
    for _ in range(budget + 1):
        data = _power_data(field, basis, seq, min_power=min_power)
        N = data.N
        extra = None
        if mixing:
            # stray across (1, 0): the crossed length lam * gap_0 is taken
            # out of the power column for the last gap
            g0 = basis.generators[seq.entries[0]]
            g0_el = field.element([Fraction(c) for c in g0])
            stray = (g0_el * field.lam()).coords
            if any(Fraction(c).denominator != 1 for c in stray):
                raise BuildError("multiplication by lam left the lattice")
            extra = {k - 1: tuple(int(c) for c in stray)}
        built = _columns_at_power(field, basis, seq, data.lamN,
                                  extra_targets=extra)
        if built is None:
            min_power = N + 1
            continue
        rows, q, _ = built
        size = N * k
        big = [[0] * size for _ in range(size)]
        for i in range(N - 1):
            for j in range(k):
                big[(i + 1) * k + j][i * k + j] = 1
        for j in range(k):
            for jp in range(k):
                big[jp][(N - 1) * k + j] = rows[jp][j]
        if mixing:
            big[k][(N - 1) * k + (k - 1)] += 2
        sp = spectral(big)
        out = CircleExpander(field, basis, seq, N,
                             tuple(tuple(r) for r in big),
                             ExtendedIncidenceMatrix([list(r) for r in rows], q),
                             mixing, sp)
        if not out.verify_slopes():
            raise BuildError("slope identity failed on the circle")
        enc = field.real_value(field.lam(), Fraction(1, 2 ** 80))
        if sp.rho.hi < enc.lo or enc.hi < sp.rho.lo:
            raise BuildError("spectral radius moved away from the slope")
        if mixing and sp.structure != "mixing":
            min_power = N + 1
            continue
        return out
    raise BuildError("no mixing tweak within the search budget")


# -- the period-doubling blowup ------------------------------------------


def _contains_power(field, basis, seq, N):
    elem = lambda c: field.element([Fraction(x) for x in c])
    T_el = elem(seq.T)
    three_T = T_el + T_el + T_el
    lamN = _lam_power(field, N)
    cone = basis.cone
    return all(cone.contains((elem(g) * lamN - three_T).coords)
               for g in basis.generators)


_TAIL_HEAD = 40
_TAIL_WINDOW = 32


class BlowupModel:
    """Finite truncation of the orbit blowup of a period-doubling map.

    Orbit preimages of the critical point down to the cutoff level are
    blown into intervals of length lam**(-level); the critical interval
    carries the implanted power map.  In the exact metric every
    represented piece has slope of modulus lam; tail_bound is a rational
    upper bound for the length of everything below the cutoff.
    """

    def __init__(self, field, base, depth, data, reduction=None,
                 degenerate=False):
        self.field = field
        self.base = base
        self.n = base.n
        self.depth = depth
        self.data = data
        self.reduction = reduction
        self.degenerate = degenerate
        self.implant = data.matrix()
        self.implant_field = data.field
        self.seq = data.seq
        if degenerate:
            self.levels_max = 1
            self.points = (Fraction(0),)
            self.level = {Fraction(0): 1}
            self.parent = {}
            self.direction = {Fraction(0): 1}
            self.p_counts = (1,)
            self.tail_bound = Fraction(0)
            self.critical = Fraction(0)
            self.c1 = Fraction(0)
            return
        period = base.period
        if reduction is None:
            if data.N != period:
                raise BuildError("implant power must equal the critical period")
        else:
            if data.N * reduction["k"] != period:
                raise BuildError("implant power must equal the critical period")
        self.levels_max = period + depth
        self._grow_tree()
        self._certify_tail()

    def _grow_tree(self):
        base = self.base
        p = base.period
        xs = base.orbit_points()
        ys = [xs[base.sigma[j]] for j in range(p)]
        segs = [(xs[j], xs[j + 1], ys[j], ys[j + 1]) for j in range(p - 1)]
        c = xs[base.c_pos]

        def preimages(y):
            out = set()
            for x0, x1, y0, y1 in segs:
                t = (y - y0) / (y1 - y0)
                if 0 <= t <= 1:
                    out.add(x0 + t * (x1 - x0))
            return out

        cutoff = self.levels_max + _TAIL_HEAD
        level = {c: 1}
        parent = {}
        frontier = [c]
        counts = [1]
        for m in range(2, cutoff + 1):
            new = []
            for y in frontier:
                for x in sorted(preimages(y)):
                    if x not in level:
                        level[x] = m
                        parent[x] = y
                        new.append(x)
            frontier = new
            counts.append(len(new))
        direction = {}
        for x in level:
            if x == c:
                direction[x] = 1
            else:
                direction[x] = direction[parent[x]] * (1 if x < c else -1)
        self.critical = c
        self.c1 = xs[base.sigma[base.c_pos]]
        if level[self.c1] != p:
            raise BuildError("critical image level broke the cycle")
        self.level = level
        self.parent = parent
        self.direction = direction
        self.p_counts = tuple(counts)
        self.points = tuple(sorted(x for x in level
                                   if level[x] <= self.levels_max))

    def _certify_tail(self):
        """Upper bound on the unrepresented length, all in rational arithmetic.

        Levels up to levels_max + head window use the exact branch counts;
        beyond that each count is dominated by the Markov path count of
        the base map, whose subexponential growth closes the sum.
        """
        field = self.field
        lam_lo = field.real_value(field.lam(), Fraction(1, 2 ** 50)).lo
        if lam_lo <= 1:
            raise BuildError("slope enclosure fell below one")
        inv = Fraction(1) / lam_lo
        head = Fraction(0)
        for m in range(self.levels_max + 1, len(self.p_counts) + 1):
            head += self.p_counts[m - 1] * inv ** m
        p = self.base.period
        size = p - 1
        vec = [1] * size
        norms = [size]
        s0 = len(self.p_counts) - 1
        w = None
        for cand in (_TAIL_WINDOW, 2 * _TAIL_WINDOW, 4 * _TAIL_WINDOW,
                     8 * _TAIL_WINDOW):
            while len(norms) <= s0 + cand:
                vec = [sum(self.base.markov[i][j] * vec[j] for j in range(size))
                       for i in range(size)]
                norms.append(sum(vec))
            if norms[cand] * inv ** cand < 1:
                w = cand
                break
        if w is None:
            raise BuildError("path growth envelope failed to contract")
        ratio = norms[w] * inv ** w
        block = Fraction(0)
        for rshift in range(w):
            block += norms[s0 + rshift] * inv ** (s0 + rshift + 2)
        self.tail_bound = head + block / (1 - ratio)

    def tail_at(self, depth):
        """Certified tail for a shallower cutoff, from the same exact counts."""
        if self.degenerate:
            return Fraction(0)
        cut = self.base.period + depth
        if not self.base.period <= cut <= self.levels_max:
            raise BuildError("depth is outside the computed range")
        field = self.field
        lam_lo = field.real_value(field.lam(), Fraction(1, 2 ** 50)).lo
        inv = Fraction(1) / lam_lo
        extra = Fraction(0)
        for m in range(cut + 1, self.levels_max + 1):
            extra += self.p_counts[m - 1] * inv ** m
        return extra + self.tail_bound

    def interchange(self):
        """The two orbit halves swapped by the base map, as hull pairs."""
        if self.degenerate or self.n == 0:
            return None
        base = self.base
        p = base.period
        left = set(range(p // 2))
        for j in range(p):
            if (j in left) == (base.sigma[j] in left):
                raise BuildError("orbit halves are not interchanged")
        xs = base.orbit_points()
        return ((xs[0], xs[p // 2 - 1]), (xs[p // 2], xs[p - 1]))

    def verify(self):
        """Structural slope certificate for the exact model metric."""
        if self.degenerate:
            return True
        for x in self.points:
            if x == self.critical:
                continue
            if self.level[self.parent[x]] != self.level[x] - 1:
                return False
        period = self.base.period
        power = self.data.N if self.reduction is None \
            else self.data.N * self.reduction["k"]
        if power != period:
            return False
        if self.base.entropy_certificate() != 1.0:
            return False
        if self.n >= 1:
            self.interchange()
        return True

    def _subgap_lengths(self):
        """Gap lengths of the implant, as elements of the slope field."""
        field = self.field
        data = self.data
        if self.reduction is None:
            gens = [field.element([Fraction(x) for x in g])
                    for g in data.basis.generators]
            return [gens[e] for e in data.seq.entries]
        step = _lam_power(field, self.reduction["k"])
        out = []
        for e in data.seq.entries:
            acc = field.zero()
            p = field.one()
            for c in data.basis.generators[e]:
                acc = acc + p * c
                p = p * step
            out.append(acc)
        return out

    def refined_incidence(self):
        """Incidence of the truncation on per-gap subintervals.

        Each blown interval carries one subinterval per implant gap, in
        image order, so a noncritical interval sends subgap j to subgap j
        of its parent and the critical interval spends the implant
        columns on the cycle target.
        """
        if self.degenerate:
            return [list(r) for r in self.data.rows]
        k = len(self.data.seq)
        idx = {x: i for i, x in enumerate(self.points)}
        size = len(self.points) * k
        rows = [[0] * size for _ in range(size)]
        ci = idx[self.critical]
        c1i = idx[self.c1]
        for x in self.points:
            xi = idx[x]
            if x == self.critical:
                for j in range(k):
                    for jp in range(k):
                        rows[c1i * k + jp][ci * k + j] = self.data.rows[jp][j]
            else:
                pi = idx[self.parent[x]]
                for j in range(k):
                    rows[pi * k + j][xi * k + j] = 1
        return rows

    def verify_expansion(self):
        """Exact eigen identity for the refined incidence.

        Assigning each subgap the length lam ** -level times its implant
        gap makes a strictly positive eigenvector: noncritical columns
        climb one level, and the critical column is the implant identity
        at lam ** period. A nonnegative matrix with a positive
        eigenvector has that eigenvalue as its spectral radius, so the
        expansion constant of the exact model is lam itself.
        """
        field = self.field
        if self.degenerate:
            factor = self.data.lamN
        else:
            factor = _lam_power(field, self.base.period)
            for x in self.points:
                if x != self.critical and \
                        self.level[self.parent[x]] != self.level[x] - 1:
                    raise BuildError("blowup certificate failed")
        g = self._subgap_lengths()
        k = len(g)
        for c in range(k):
            total = field.zero()
            for j in range(k):
                total = total + g[j] * self.data.rows[j][c]
            if not total == factor * g[c]:
                raise BuildError("blowup certificate failed")
        return True

    def truncation_map(self):
        """Rational PL realization of the represented part.

        The metric is an approximation, so slopes are only close to lam,
        but the crossing combinatorics match the model, which is what
        lap counting consumes.
        """
        if self.degenerate:
            return realize_pl_map([list(r) for r in self.data.rows],
                                  self.data.phi)
        f_i = self.implant_field
        eps = Fraction(1, 2 ** 60)
        mids = []
        for el in self.data.vertex_elements:
            iv = f_i.real_value(el, eps)
            mids.append((iv.lo + iv.hi) / 2)
        total = mids[-1]
        v = [m / total for m in mids]
        if any(b <= a for a, b in zip(v, v[1:])):
            raise BuildError("vertex approximations collided")
        lam_mid = self.field.real_value(self.field.lam(), Fraction(1, 2 ** 40))
        lam_f = float((lam_mid.lo + lam_mid.hi) / 2)
        r = Fraction(round(2 ** 24 / lam_f), 2 ** 24)
        pts = self.points
        unit = {x: r ** self.level[x] / 2 for x in pts}
        scale = None
        for x, y in zip(pts, pts[1:]):
            allowed = (y - x) / (unit[x] + unit[y])
            if scale is None or allowed < scale:
                scale = allowed
        scale = (scale if scale is not None else Fraction(1)) / 2
        half = {x: scale * unit[x] for x in pts}
        c = self.critical
        c1 = self.c1
        dL, dR = c1 - half[c1], c1 + half[c1]
        o1 = self.direction[c1]

        def image_pos(vertex):
            t = v[vertex]
            return dL + t * (dR - dL) if o1 > 0 else dR - t * (dR - dL)

        k = len(self.seq)
        phi = self.implant.phi
        breaks, vals = [], []
        for x in pts:
            if x == c:
                cL = c - half[c]
                width = 2 * half[c]
                for col in range(1, k + 1):
                    path = _euler_walk(self.implant.column(col),
                                       phi[col - 1], phi[col])
                    widths = [abs(v[path[t + 1]] - v[path[t]])
                              for t in range(len(path) - 1)]
                    tot = sum(widths)
                    x0 = cL + v[col - 1] * width
                    span = (v[col] - v[col - 1]) * width
                    if col == 1:
                        breaks.append(x0)
                        vals.append(image_pos(path[0]))
                    acc = Fraction(0)
                    for t in range(len(path) - 1):
                        acc += widths[t]
                        breaks.append(x0 + span * acc / tot)
                        vals.append(image_pos(path[t + 1]))
            else:
                qx = self.parent[x]
                lo_v, hi_v = qx - half[qx], qx + half[qx]
                if self.direction[x] < 0:
                    lo_v, hi_v = hi_v, lo_v
                breaks.extend([x - half[x], x + half[x]])
                vals.extend([lo_v, hi_v])
        if any(b2 <= a2 for a2, b2 in zip(breaks, breaks[1:])):
            raise BuildError("blown intervals overlapped")
        return PLMap(breaks, vals)

    def to_json(self):
        out = {
            "base": self.base.to_json(),
            "depth": self.depth,
            "degenerate": self.degenerate,
            "implant_power": self.data.N,
            "levels": self.levels_max,
            "intervals": len(self.points),
            "interval_counts": list(self.p_counts[:self.levels_max]),
            "tail_bound": float(self.tail_bound),
            "sequence": self.seq.to_json(),
        }
        if self.reduction is not None:
            out["reduction"] = {"k": self.reduction["k"],
                                "power_poly": self.reduction["poly"].to_json()}
        return out


def interval_blowup_expander(field, basis, depth, n=None, budget=12):
    """Blowup model for a Perron slope: base with critical period 2**n,
    power map implanted on the critical interval, truncation past
    2**n + depth levels certified by tail_bound.

    n defaults to the smallest value whose power 2**n satisfies the
    containment; n = 0 asks for the degenerate model, which is the
    implanted map on the whole interval.
    """
    if depth < 1:
        raise BuildError("depth must be at least 1")
    seq = generator_sequence(basis)
    if n is None:
        n = 0
        while n <= budget and not _contains_power(field, basis, seq, 2 ** n):
            n += 1
        if n > budget:
            raise BuildError("no doubling power satisfies the containment "
                             "within the search budget")
    if n == 0:
        data = _power_data(field, basis, seq)
        power_expander_matrix(field, basis, seq)
        return BlowupModel(field, DoublingBase(0), depth, data,
                           degenerate=True)
    data = _power_data(field, basis, seq, min_power=2 ** n)
    if data.N != 2 ** n:
        raise BuildError("containment skipped the requested power")
    power_expander_matrix(field, basis, seq, min_power=2 ** n)
    model = BlowupModel(field, DoublingBase(n), depth, data)
    if not model.verify():
        raise BuildError("blowup certificate failed")
    return model


def weak_perron_expander(field, depth, budget=12):
    """Blowup model for a weak Perron slope lam with lam**k Perron.

    The base period is a multiple of k, so the implant is a power map
    for lam**k living in its own field; the represented metric still
    expands by lam.
    """
    if depth < 1:
        raise BuildError("depth must be at least 1")
    kind = classify(field)
    if kind.kind != "WeakPerron":
        raise BuildError("slope is already Perron; use the interval "
                         "construction")
    k = kind.weak_perron_k
    if k & (k - 1):
        raise BuildError("the Perron power index must be a power of two "
                         "to fit a doubling period")
    mu_poly = _power_min_poly(field, _lam_power(field, k))
    mu_field = make_field(mu_poly)
    mu_basis = semigroup_generators(build_cone(mu_field))
    seq = generator_sequence(mu_basis)
    j = k.bit_length() - 1
    n = j
    while n <= j + budget and not _contains_power(mu_field, mu_basis, seq,
                                                  2 ** (n - j)):
        n += 1
    if n > j + budget:
        raise BuildError("no doubling power satisfies the containment "
                         "within the search budget")
    data = _power_data(mu_field, mu_basis, seq, min_power=2 ** (n - j))
    if data.N != 2 ** (n - j):
        raise BuildError("containment skipped the requested power")
    power_expander_matrix(mu_field, mu_basis, seq, min_power=2 ** (n - j))
    model = BlowupModel(field, DoublingBase(n), depth, data,
                        reduction={"k": k, "poly": mu_poly})
    if not model.verify():
        raise BuildError("blowup certificate failed")
    return model
