"""Power matrices, circle models, and period-doubling blowups.

Matrices, sequences, and orbit orders are frozen from deterministic
builds, but each frozen matrix is re-certified here by recomputing its
column identities in exact field arithmetic, and the blowup branch
counts are re-derived from an independent piecewise inversion of the
base map that shares no code with the builder.  Lap-count growth rates
use a window equal to the base period, since the implant pumps mass
through the level hierarchy with exactly that period.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perron1d.builder import (
    BlowupModel,
    BuildError,
    GeneratorSequence,
    circle_expander,
    doubling_base,
    generator_sequence,
    interval_blowup_expander,
    power_expander_matrix,
    weak_perron_expander,
    _doubling_word,
)
from perron1d.cone import build_cone, decompose, semigroup_generators
from perron1d.field import classify, make_field
from perron1d.plmap import (
    charpoly,
    is_extended_incidence,
    lap_entropy_estimate,
    realize_pl_map,
    spectral,
)
from perron1d.polys import IntPolynomial

GOLDEN = make_field(IntPolynomial([-1, -1, 1]))
GOLDEN_BASIS = semigroup_generators(build_cone(GOLDEN))
DOUBLE = make_field(IntPolynomial([-2, 1]))
DOUBLE_BASIS = semigroup_generators(build_cone(DOUBLE))

LOG_GOLDEN = math.log((1 + math.sqrt(5)) / 2)

GOLDEN_ROWS = (
    (3, 2, 2, 11, 7, 2, 3),
    (3, 4, 3, 2, 3, 5, 2),
    (4, 3, 3, 2, 3, 3, 4),
    (4, 10, 16, 22, 26, 4, 10),
    (4, 8, 12, 14, 18, 4, 8),
    (2, 2, 2, 2, 2, 2, 2),
    (2, 2, 2, 2, 2, 2, 2),
)
GOLDEN_PHI = (0, 2, 3, 1, 0, 3, 1, 0)


# -- the entropy-zero bases ----------------------------------------------


def test_doubling_words():
    # classic period-doubling kneading words, written down by hand
    assert _doubling_word(1) == "RC"
    assert _doubling_word(2) == "RLRC"
    assert _doubling_word(3) == "RLRRRLRC"
    assert _doubling_word(4) == "RLRRRLRLRLRRRLRC"


def test_orbit_orders_frozen():
    frozen = {
        1: ([1, 0], 0),
        2: ([2, 3, 1, 0], 1),
        3: ([4, 5, 7, 6, 3, 2, 1, 0], 2),
        4: ([8, 9, 10, 11, 14, 15, 13, 12, 7, 6, 5, 4, 3, 2, 1, 0], 5),
    }
    for n, (sigma, c_pos) in frozen.items():
        base = doubling_base(n)
        assert list(base.sigma) == sigma
        assert base.c_pos == c_pos
    assert doubling_base(5).c_pos == 10


def test_orbit_order_is_single_cycle_and_interchanges():
    for n in range(1, 7):
        base = doubling_base(n)
        p = base.period
        seen, j = set(), 0
        for _ in range(p):
            assert j not in seen
            seen.add(j)
            j = base.sigma[j]
        assert j == min(seen)
        half = p // 2
        for i in range(p):
            assert (i < half) != (base.sigma[i] < half)


def test_orbit_order_renormalizes():
    # the square of the order-n permutation, restricted to the left
    # half and read right to left, is the order-(n-1) permutation: the
    # doubling renormalization reverses orientation
    for n in range(2, 7):
        big = doubling_base(n)
        small = doubling_base(n - 1)
        half = big.period // 2
        rev = lambda i: half - 1 - i
        for i in range(half):
            assert rev(big.sigma[big.sigma[rev(i)]]) == small.sigma[i]


def test_orbit_map_realizes_the_permutation():
    for n in range(1, 6):
        base = doubling_base(n)
        f = base.orbit_map()
        xs = base.orbit_points()
        for i, x in enumerate(xs):
            assert f(x) == xs[base.sigma[i]]
        turns = f.turning_points()
        if n == 1:
            assert turns == []
        else:
            assert len(turns) == 1 and turns[0][0] == xs[base.c_pos]


def test_entropy_certificates_are_flat():
    for n in range(7):
        assert doubling_base(n).entropy_certificate() == 1.0


def test_degenerate_base_spans_no_interval():
    base = doubling_base(0)
    assert base.period == 1
    with pytest.raises(BuildError, match="spans no interval"):
        base.orbit_map()
    with pytest.raises(BuildError, match="must be nonnegative"):
        doubling_base(-1)


# -- generator sequences -------------------------------------------------


def test_generator_sequence_golden():
    seq = generator_sequence(GOLDEN_BASIS)
    assert seq.entries == (0, 1, 2, 3, 4, 0, 1)
    assert seq.T == (6, 10)
    assert set(seq.parity_cover) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_generator_sequence_violations():
    b = GOLDEN_BASIS
    with pytest.raises(BuildError, match="out of range"):
        GeneratorSequence(b, [0, 1, 2, 3, 4, 0, 5])
    with pytest.raises(BuildError, match="every generator"):
        GeneratorSequence(b, [0, 0, 1, 1, 2, 2, 3, 3])
    with pytest.raises(BuildError, match="sum must be even"):
        GeneratorSequence(b, [0, 1, 2, 3, 4])
    with pytest.raises(BuildError, match="cover every parity class"):
        GeneratorSequence(b, [0, 4, 1, 0, 4, 3, 2, 0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=10))
def test_generator_sequence_random_entries(entries):
    gens = GOLDEN_BASIS.generators
    try:
        seq = GeneratorSequence(GOLDEN_BASIS, entries)
    except BuildError:
        return
    assert set(range(len(gens))) <= set(seq.entries)
    assert all(c % 2 == 0 for c in seq.T)
    parities = {tuple(c % 2 for c in p) for p in seq.partials}
    assert parities == {(0, 0), (0, 1), (1, 0), (1, 1)}


# -- power matrices ------------------------------------------------------


def recheck_columns(field, basis, seq, N, rows):
    """Independent column identities: counts weigh the gap lengths to
    exactly lam**N times each gap, in field arithmetic."""
    lamN = field.one()
    for _ in range(N):
        lamN = lamN * field.lam()
    gaps = [field.element([Fraction(c) for c in basis.generators[e]])
            for e in seq.entries]
    for c in range(len(seq)):
        total = field.zero()
        for j in range(len(seq)):
            total = total + gaps[j] * rows[j][c]
        assert total == lamN * gaps[c]


def test_power_matrix_golden():
    seq = generator_sequence(GOLDEN_BASIS)
    N, matrix = power_expander_matrix(GOLDEN, GOLDEN_BASIS, seq)
    assert N == 8
    assert tuple(tuple(r) for r in matrix.matrix) == GOLDEN_ROWS
    assert matrix.phi == GOLDEN_PHI
    assert is_extended_incidence(matrix) == GOLDEN_PHI
    recheck_columns(GOLDEN, GOLDEN_BASIS, seq, N, GOLDEN_ROWS)
    sp = spectral([list(r) for r in GOLDEN_ROWS])
    assert sp.structure == "mixing"
    lam8 = ((1 + math.sqrt(5)) / 2) ** 8
    assert abs(sp.rho.to_float() - lam8) < 1e-9
    f = realize_pl_map([list(r) for r in GOLDEN_ROWS], GOLDEN_PHI)
    assert f.pieces() == 111


def test_power_matrix_charpoly_divisible_by_slope():
    seq = generator_sequence(GOLDEN_BASIS)
    N, matrix = power_expander_matrix(GOLDEN, GOLDEN_BASIS, seq)
    cp = charpoly([list(r) for r in matrix.matrix])
    # lam**8 has minimal polynomial x**2 - 47x + 1
    assert IntPolynomial([1, -47, 1]).divides(cp)


def test_power_matrix_perron_cubic():
    field = make_field(IntPolynomial([-2, 0, -1, 1]))
    assert classify(field).kind == "Perron"
    basis = semigroup_generators(build_cone(field))
    seq = generator_sequence(basis)
    N, matrix = power_expander_matrix(field, basis, seq)
    assert N == 11 and len(seq) == 22
    assert matrix.phi == (0, 5, 5, 0, 0, 5, 0, 0, 5, 0, 0, 5, 5, 5, 0, 5,
                          0, 0, 0, 0, 0, 0, 0)
    recheck_columns(field, basis, seq, N, matrix.matrix)
    sp = spectral([list(r) for r in matrix.matrix])
    assert sp.structure == "mixing"
    lam = 1.6956207695598622  # largest root of x**3 - x**2 - 2
    assert abs(sp.rho.to_float() - lam ** 11) < 1e-6


def test_power_matrix_doubling_slope():
    seq = generator_sequence(DOUBLE_BASIS)
    N, matrix = power_expander_matrix(DOUBLE, DOUBLE_BASIS, seq)
    assert N == 3
    assert [list(r) for r in matrix.matrix] == [[6, 6], [2, 2]]
    assert matrix.phi == (0, 0, 0)
    assert spectral([[6, 6], [2, 2]]).rho.to_float() == pytest.approx(8.0)


def test_power_search_budget_exhaustion():
    seq = generator_sequence(GOLDEN_BASIS)
    with pytest.raises(BuildError, match="within the search budget"):
        power_expander_matrix(GOLDEN, GOLDEN_BASIS, seq, budget=3)


# -- circle models -------------------------------------------------------


def test_circle_golden():
    plain = circle_expander(GOLDEN, GOLDEN_BASIS)
    assert (plain.N, plain.size()) == (8, 56)
    assert plain.verify_slopes()
    assert plain.spectral.structure == "ergodic"
    assert plain.spectral.period == 8
    mixed = circle_expander(GOLDEN, GOLDEN_BASIS, mixing=True)
    assert (mixed.N, mixed.size()) == (8, 56)
    assert mixed.verify_slopes()
    assert mixed.spectral.structure == "mixing"
    phi = (1 + math.sqrt(5)) / 2
    for ce in (plain, mixed):
        assert abs(ce.spectral.rho.to_float() - phi) < 1e-9


def test_circle_doubling():
    plain = circle_expander(DOUBLE, DOUBLE_BASIS)
    assert (plain.N, plain.size()) == (3, 6)
    assert plain.spectral.structure == "ergodic"
    assert plain.spectral.period == 3
    mixed = circle_expander(DOUBLE, DOUBLE_BASIS, mixing=True)
    assert mixed.spectral.structure == "mixing"
    for ce in (plain, mixed):
        assert ce.verify_slopes()
        assert abs(ce.spectral.rho.to_float() - 2.0) < 1e-12


# -- interval blowups ----------------------------------------------------


def branch_counts(f, c, levels):
    """Independent preimage tree of the critical point under f.

    Inverts each affine piece over the rationals; returns the count of
    new points at each level and the sorted points up to the last level.
    """
    xs = [Fraction(x) for x in f.breakpoints]
    vs = [Fraction(v) for v in f.values]
    lo, hi = xs[0], xs[-1]

    def preimages(y):
        out = set()
        for i in range(len(xs) - 1):
            dx, dy = xs[i + 1] - xs[i], vs[i + 1] - vs[i]
            if dy == 0:
                continue
            x = xs[i] + (y - vs[i]) * dx / dy
            if xs[i] <= x <= xs[i + 1] and lo <= x <= hi:
                out.add(x)
        return out

    level = {Fraction(c): 1}
    frontier = [Fraction(c)]
    counts = [1]
    for _ in range(2, levels + 1):
        new = []
        for y in frontier:
            for x in sorted(preimages(y)):
                if x not in level:
                    level[x] = level[y] + 1
                    new.append(x)
        frontier = new
        counts.append(len(new))
    return counts, sorted(level)


def test_blowup_golden_depth_ten():
    m = interval_blowup_expander(GOLDEN, GOLDEN_BASIS, 10)
    assert (m.n, m.data.N, m.levels_max) == (3, 8, 18)
    assert len(m.points) == 92
    assert m.verify() and m.verify_expansion()
    counts, pts = branch_counts(m.base.orbit_map(), m.critical, 18)
    assert counts == list(m.p_counts[:18])
    assert counts[:16] == [1, 1, 2, 2, 3, 3, 5, 5, 5, 5, 6, 6, 7, 7, 8, 8]
    assert pts == list(m.points)
    tail = float(m.tail_bound)
    assert 0.0029 < tail < 0.0030
    ladder = [float(m.tail_at(d)) for d in range(11)]
    assert ladder[-1] == tail
    assert all(a > b for a, b in zip(ladder, ladder[1:]))
    assert m.interchange() == ((Fraction(0), Fraction(3, 7)),
                               (Fraction(4, 7), Fraction(1)))
    assert m.truncation_map().pieces() == 293


def test_blowup_refined_incidence_small():
    m = interval_blowup_expander(GOLDEN, GOLDEN_BASIS, 2)
    rows = m.refined_incidence()
    assert len(rows) == len(m.points) * 7 == 224
    assert m.verify_expansion()
    # the exact metric is an eigenvector, so the certified radius must
    # land on the slope even though the truncation is reducible
    sp = spectral(rows)
    assert sp.structure == "reducible"
    phi = (1 + math.sqrt(5)) / 2
    assert sp.rho.lo <= Fraction(1618034, 1000000)
    assert abs(sp.rho.to_float() - phi) < 1e-9


def test_blowup_golden_lap_rate():
    m = interval_blowup_expander(GOLDEN, GOLDEN_BASIS, 10)
    est = lap_entropy_estimate(m.truncation_map(), n_max=32,
                               max_states=2000000)
    assert est.complete
    n1, c1, _ = est.rows[-1]
    n0, c0, _ = est.rows[-1 - m.base.period]
    assert (n1, c1) == (32, 1699351753)
    rate = (math.log(c1) - math.log(c0)) / (n1 - n0)
    assert abs(rate - LOG_GOLDEN) < float(m.tail_bound)


def test_blowup_doubling_default():
    m = interval_blowup_expander(DOUBLE, DOUBLE_BASIS, 10)
    assert (m.n, m.data.N, m.levels_max) == (2, 4, 14)
    assert len(m.points) == 16
    assert m.verify() and m.verify_expansion()
    assert float(m.tail_bound) < 1e-3
    f = m.truncation_map()
    assert f.pieces() == 58
    est = lap_entropy_estimate(f, n_max=24, max_states=2000000)
    n1, c1, _ = est.rows[-1]
    n0, c0, _ = est.rows[-1 - m.base.period]
    rate = (math.log(c1) - math.log(c0)) / (n1 - n0)
    assert abs(rate - math.log(2)) < 1e-4


def test_blowup_doubling_degenerate():
    m = interval_blowup_expander(DOUBLE, DOUBLE_BASIS, 1, n=0)
    assert m.degenerate and m.data.N == 3
    assert m.tail_bound == 0
    assert m.interchange() is None
    assert m.verify() and m.verify_expansion()
    assert m.refined_incidence() == [[6, 6], [2, 2]]
    f = m.truncation_map()
    assert f.pieces() == 12
    est = lap_entropy_estimate(f, n_max=12)
    # the whole map is the implant, so laps gain a factor lam**3 = 8
    assert est.rate() == pytest.approx(math.log(8), abs=1e-9)


def test_blowup_rejects_small_requested_power():
    with pytest.raises(BuildError, match="skipped the requested power"):
        interval_blowup_expander(GOLDEN, GOLDEN_BASIS, 2, n=2)
    with pytest.raises(BuildError, match="depth must be at least 1"):
        interval_blowup_expander(GOLDEN, GOLDEN_BASIS, 0)


def test_blowup_tail_depth_range():
    m = interval_blowup_expander(DOUBLE, DOUBLE_BASIS, 3)
    with pytest.raises(BuildError, match="outside the computed range"):
        m.tail_at(4)


# -- weak Perron models --------------------------------------------------


def test_weak_sqrt_two():
    field = make_field(IntPolynomial([-2, 0, 1]))
    m = weak_perron_expander(field, 10)
    assert (m.n, m.data.N, m.reduction["k"]) == (3, 4, 2)
    assert m.reduction["poly"] == IntPolynomial([-2, 1])
    assert tuple(tuple(r) for r in m.data.rows) == ((14, 14), (2, 2))
    assert len(m.points) == 92
    assert m.verify() and m.verify_expansion()
    assert m.interchange() == ((Fraction(0), Fraction(3, 7)),
                               (Fraction(4, 7), Fraction(1)))
    f = m.truncation_map()
    assert f.pieces() == 210
    est = lap_entropy_estimate(f, n_max=40, max_states=2000000)
    n1, c1, _ = est.rows[-1]
    n0, c0, _ = est.rows[-1 - m.base.period]
    rate = (math.log(c1) - math.log(c0)) / (n1 - n0)
    assert abs(rate - math.log(2) / 2) < 1e-3


def test_weak_fourth_root_of_two():
    field = make_field(IntPolynomial([-2, 0, 0, 0, 1]))
    assert classify(field).weak_perron_k == 4
    m = weak_perron_expander(field, 4)
    assert (m.n, m.data.N, m.reduction["k"]) == (4, 4, 4)
    assert len(m.points) == 212
    assert m.verify() and m.verify_expansion()
    # lam < sqrt(2), so the model visibly swaps the two orbit halves
    assert m.interchange() == ((Fraction(0), Fraction(7, 15)),
                               (Fraction(8, 15), Fraction(1)))
    f = m.truncation_map()
    assert f.pieces() == 450
    est = lap_entropy_estimate(f, n_max=32, max_states=2000000)
    n1, c1, _ = est.rows[-1]
    n0, c0, _ = est.rows[-1 - m.base.period]
    rate = (math.log(c1) - math.log(c0)) / (n1 - n0)
    assert abs(rate - math.log(2) / 4) < 0.05


def test_weak_rejects_strict_perron():
    with pytest.raises(BuildError, match="already Perron"):
        weak_perron_expander(GOLDEN, 2)


def test_weak_rejects_odd_power_index():
    field = make_field(IntPolynomial([-2, 0, 0, 1]))
    assert classify(field).weak_perron_k == 3
    with pytest.raises(BuildError, match="power of two"):
        weak_perron_expander(field, 2)
