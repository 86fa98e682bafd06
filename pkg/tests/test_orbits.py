"""Orbit closures, Pisot certificates, conjugate clouds, and kneading roots.

Oracle strategy: orbit closures are replayed through a plain dictionary
loop over exact points, certificates are checked against hand-counted
lattice bounds, and kneading kernels are cross-checked with sympy root
isolation.  Sampled trajectories are frozen as regressions under fixed
seeds.
"""

import io
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perron1d.field import classify, make_field
from perron1d.orbits import (
    CloudEscapeError,
    OrbitEscapeError,
    Trajectory,
    _orbit,
    _tent_int_orbit,
    critical_orbits,
    friendly_b,
    galois_product_cloud,
    pcf_tent_roots,
    pisot_certificate,
    salem_radii_walk,
    tent_map,
    write_orbit_csv,
    write_root_cloud_csv,
    write_trajectory_csv,
)
from perron1d.plmap import PLMap
from perron1d.polys import IntPolynomial

GOLDEN = make_field(IntPolynomial([-1, -1, 1]))
SALEM4 = make_field(IntPolynomial([1, -1, -1, -1, 1]))
SALEM6 = make_field(IntPolynomial([1, 0, -1, -1, -1, 0, 1]))
SALEM6_SQ = make_field(IntPolynomial([1, -2, -1, 3, -1, -2, 1]))
LEHMER = make_field(IntPolynomial([1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]))
PISOT3 = make_field(IntPolynomial([-2, -2, -1, 1]))
PCF4 = make_field(IntPolynomial([-1, 1, -1, -1, 1]))


def _naive_closure(f, x0, cap):
    """Dictionary loop over exact points; the oracle every engine must match."""
    seen = {x0: 0}
    x = x0
    for step in range(1, cap + 1):
        x = f(x)
        if x in seen:
            return seen[x], step - seen[x]
        seen[x] = step
    return None


def _d3_map():
    F = Fraction
    return PLMap([F(0), F(19, 60), F(17, 30), F(1)],
                 [F(0), F(19, 30), F(2, 15), F(1)])


def _pisot3_folded():
    lam = PISOT3.lam()
    one = PISOT3.one()
    return PLMap([PISOT3.zero(), 2 * one, one + lam, 2 * lam],
                 [PISOT3.zero(), 2 * lam, 3 * lam - lam * lam, 2 * lam],
                 field=PISOT3)


# -- tent construction ----------------------------------------------------


def test_tent_map_rejects_bad_slopes():
    for bad in (Fraction(1), Fraction(5, 2), 3):
        with pytest.raises(ValueError, match="tent slope"):
            tent_map(bad)
    big = make_field(IntPolynomial([1, -3, 1]))  # largest root 2.618...
    with pytest.raises(ValueError, match="tent slope"):
        tent_map(big)


def test_tent_map_shape():
    f = tent_map(GOLDEN)
    lam = GOLDEN.lam()
    one = GOLDEN.one()
    assert f.breakpoints == [-one, GOLDEN.zero(), lam - one]
    # lam^2 - lam - 1 = 0, so the right endpoint maps to the critical point
    assert f.values == [lam - one, -one, GOLDEN.zero()]
    assert f.notes["tent"] is True
    assert f.turning_points() == [(GOLDEN.zero(), -one)]

    g = tent_map(2)
    assert g.breakpoints == [Fraction(-1), Fraction(0), Fraction(1)]
    assert g.values == [Fraction(1), Fraction(-1), Fraction(1)]


# -- exact orbit closures -------------------------------------------------


def test_golden_critical_orbit_exact():
    rec = critical_orbits(tent_map(GOLDEN))[0]
    lam = GOLDEN.lam()
    one = GOLDEN.one()
    assert rec.status == "finite"
    assert (rec.preperiod, rec.period) == (0, 3)
    assert rec.length == 3
    assert rec.points[:3] == [GOLDEN.zero(), -one, lam - one]
    # the stored tail repeats the entry point of the cycle
    assert rec.points[3] == rec.points[0]
    assert set(rec.cycle()) == {GOLDEN.zero(), -one, lam - one}
    assert rec.point_at(1) == -one


def test_salem_orbit_periods():
    assert [(r.preperiod, r.period)
            for r in critical_orbits(tent_map(SALEM4))] == [(0, 5)]
    r6 = critical_orbits(tent_map(SALEM6), cap=10 ** 5)[0]
    assert (r6.preperiod, r6.period) == (0, 270)
    # the square of the slope closes in half the period
    rsq = critical_orbits(tent_map(SALEM6_SQ), cap=10 ** 5)[0]
    assert (rsq.preperiod, rsq.period) == (0, 135)


def test_lehmer_orbit_hits_cap():
    rec = critical_orbits(tent_map(LEHMER), cap=20000)[0]
    assert rec.status == "cap_exhausted"
    assert rec.preperiod is None and rec.period is None
    assert rec.length == 20001
    with pytest.raises(ValueError, match="no cycle"):
        rec.cycle()
    assert rec.point_at(0) == LEHMER.zero()
    f = tent_map(LEHMER)
    x = LEHMER.zero()
    for _ in range(3):
        x = f(x)
    assert rec.point_at(3) == x


def test_d3_two_orbits_share_cycle():
    f = _d3_map()
    recs = critical_orbits(f)
    assert [(r.preperiod, r.period) for r in recs] == [(4, 5), (4, 5)]
    cyc = {Fraction(1, 5), Fraction(2, 5), Fraction(7, 15),
           Fraction(1, 3), Fraction(3, 5)}
    assert set(recs[0].cycle()) == cyc
    assert set(recs[1].cycle()) == cyc


def test_pisot_cubic_folded_orbits():
    f = _pisot3_folded()
    lam = PISOT3.lam()
    one = PISOT3.one()
    recs = critical_orbits(f)
    assert [(r.preperiod, r.period) for r in recs] == [(1, 1), (3, 1)]
    assert recs[0].points[:2] == [2 * one, 2 * lam]
    assert f(2 * lam) == 2 * lam
    assert recs[1].points[0] == one + lam
    assert recs[1].cycle() == [4 * one + 4 * lam - 2 * lam * lam]


# -- engine agreement -----------------------------------------------------


def test_dyadic_tent_exact():
    f = tent_map(2)
    rec = _orbit(f, Fraction(1, 3), 100)
    assert (rec.preperiod, rec.period) == (1, 1)
    rec = _orbit(f, Fraction(0), 100)
    assert (rec.preperiod, rec.period) == (2, 1)
    assert rec.points[:3] == [Fraction(0), Fraction(-1), Fraction(1)]


def test_rational_tent_engine_matches_naive():
    f = tent_map(Fraction(3, 2))
    for x0 in (Fraction(0), Fraction(1, 3), Fraction(-2, 5)):
        rec = _orbit(f, x0, 400)
        got = _naive_closure(f, x0, 400)
        if rec.status == "finite":
            assert got == (rec.preperiod, rec.period)
        else:
            assert got is None


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=Fraction(-1), max_value=Fraction(3, 5),
                    max_denominator=120))
def test_golden_tent_engines_agree(x0):
    f = tent_map(GOLDEN)
    cap = 3000
    rec = _orbit(f, x0, cap)
    twin = _tent_int_orbit(GOLDEN, x0, cap)
    assert rec.status == twin.status == "finite"
    assert (rec.preperiod, rec.period) == (twin.preperiod, twin.period)
    naive = _naive_closure(f, GOLDEN.from_rational(x0), cap)
    assert naive == (rec.preperiod, rec.period)


def test_slope_one_reference_loop():
    # slope +-1 is neither rational-dyadic nor +-lam, so this walks the
    # plain FieldElement engine
    lam = GOLDEN.lam()
    one = GOLDEN.one()
    half = GOLDEN.from_rational(Fraction(1, 2))
    a = (2 * one - lam) / 2
    f = PLMap([GOLDEN.zero(), half, one], [a, a + half, a], field=GOLDEN)
    x0 = GOLDEN.from_rational(Fraction(1, 7))
    rec = _orbit(f, x0, 10 ** 4)
    assert rec.status == "finite"
    assert _naive_closure(f, x0, 10 ** 4) == (rec.preperiod, rec.period)


def test_orbit_escape_carries_witness():
    f = PLMap([Fraction(0), Fraction(1, 2), Fraction(1)],
              [Fraction(0), Fraction(1), Fraction(0)])
    f.values[1] = Fraction(2)
    with pytest.raises(OrbitEscapeError) as err:
        critical_orbits(f)
    assert isinstance(err.value.witness["step"], int)
    assert "point" in err.value.witness


# -- Pisot certificates ---------------------------------------------------


def test_pisot_certificate_numbers():
    cert = pisot_certificate(_pisot3_folded())
    assert cert.count_bound == 9393931
    assert cert.coord_bound == 105
    assert cert.scale == 1
    assert sorted(cert.place_bounds) == [0, 1]
    for v in cert.place_bounds.values():
        assert abs(float(v) - 61.299) < 1e-2
    assert abs(float(cert.dominant_bound) - 4.539) < 1e-2
    js = cert.to_json()
    assert sorted(js) == ["coord_bound", "count_bound", "dominant_bound",
                          "place_bounds", "scale"]
    # honest bound: the orbits really are inside the certified count
    for rec in critical_orbits(_pisot3_folded()):
        assert rec.length <= cert.count_bound


def test_rational_certificate_counts_lattice():
    cert = pisot_certificate(_d3_map())
    assert cert.place_bounds == {}
    assert cert.scale == 60
    assert cert.count_bound == 61
    assert cert.coord_bound is None
    for rec in critical_orbits(_d3_map()):
        assert rec.length <= cert.count_bound


def test_certificate_rejections():
    with pytest.raises(ValueError, match="Salem, not Pisot"):
        pisot_certificate(tent_map(SALEM4))
    with pytest.raises(ValueError, match="Perron, not Pisot"):
        pisot_certificate(tent_map(PCF4))
    with pytest.raises(ValueError, match="integers >= 2"):
        pisot_certificate(tent_map(Fraction(3, 2)))


def test_seeded_pisot_expanders_stay_finite():
    catalog = [[-1, -1, 1], [-1, -1, 0, 1], [-1, 0, -1, 1],
               [-1, -1, -1, 1], [-1, 0, 0, -1, 1], [-1, -1, -1, -1, 1]]
    fields = [make_field(IntPolynomial(c)) for c in catalog]
    for seed in range(20):
        rng = random.Random(seed)
        field = fields[seed % len(fields)]
        assert classify(field).kind == "Pisot"
        lam = field.lam()
        one = field.one()
        lam_f = float(field.lam_enclosure.re)
        f = None
        for _ in range(50):
            den = rng.choice([8, 12, 16, 24, 32, 48])
            c_lo = math.floor((1 - 1 / lam_f) * den) + 1
            c_hi = math.ceil(den / lam_f) - 1
            if c_hi < c_lo:
                continue
            c = Fraction(rng.randint(c_lo, c_hi), den)
            v_lo = max(0.0, lam_f * (1 - 2 * float(c)))
            v_hi = 1 - lam_f * float(c)
            w_lo = 0 if v_lo == 0 else math.floor(v_lo * den) + 1
            w_hi = math.ceil(v_hi * den) - 1
            if w_hi < w_lo:
                continue
            v0 = Fraction(rng.randint(w_lo, w_hi), den)
            ce = field.from_rational(c)
            ve = field.from_rational(v0)
            try:
                f = PLMap([field.zero(), ce, one],
                          [ve, ve + lam * ce, ve + lam * (2 * ce - one)],
                          field=field)
                break
            except ValueError:
                continue
        assert f is not None
        cert = pisot_certificate(f)
        for rec in critical_orbits(f, cap=10 ** 5):
            assert rec.status == "finite"
            assert rec.length <= cert.count_bound


# -- record serialization -------------------------------------------------


def test_orbit_record_json_and_csv():
    rec = critical_orbits(tent_map(GOLDEN))[0]
    js = rec.to_json()
    assert js["status"] == "finite"
    assert js["preperiod"] == 0 and js["period"] == 3
    assert len(js["points"]) == 4
    out = io.StringIO()
    write_orbit_csv(rec, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "step,c0_num,c0_den,c1_num,c1_den"
    assert len(lines) == 5
    assert lines[1] == "0,0,1,0,1"

    capped = critical_orbits(tent_map(LEHMER), cap=50)[0]
    js2 = capped.to_json()
    assert js2["status"] == "cap_exhausted"
    assert js2["steps"] == 50
    out2 = io.StringIO()
    write_orbit_csv(capped, out2)
    assert len(out2.getvalue().splitlines()) == 52


def test_trajectory_validation_and_stats():
    with pytest.raises(ValueError, match="steps and rows"):
        Trajectory(["x", "re"], [0, 1], [(0.0, 0.5)])
    with pytest.raises(ValueError, match="row width"):
        Trajectory(["x", "re"], [0], [(0.0,)])
    t = Trajectory(["x", "re"], [0, 1, 2, 3],
                   [(0.0, 0.0), (1.0, 3.0), (0.0, 1.0), (1.0, 2.0)])
    assert t.column("x") == [0.0, 1.0, 0.0, 1.0]
    s = t.stats()
    assert s["x"] == {"min": 0.0, "max": 1.0, "mean": 0.5}
    assert s["re"] == {"min": 0.0, "max": 3.0, "mean": 1.5}
    assert t.occupancy("x", "re") == 4
    with pytest.raises(ValueError):
        t.column("nope")
    out = io.StringIO()
    write_trajectory_csv(t, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "step,x,re"
    assert len(lines) == 5


# -- conjugate clouds -----------------------------------------------------


def test_cloud_critical_start_collapses():
    f = tent_map(GOLDEN)
    cp = f.turning_points()[0][0]
    t = galois_product_cloud(f, 0, cp, burn_in=10, n_samples=40, seed=3)
    xs = sorted({round(r[0], 6) for r in t.rows})
    res = sorted({round(r[1], 6) for r in t.rows})
    assert xs == [-1.0, 0.0, 0.618034]
    assert res == [-1.618034, -1.0, 0.0]


def test_cloud_golden_frozen_regression():
    f = tent_map(GOLDEN)
    t = galois_product_cloud(f, 0, Fraction(1, 10 ** 9 + 7),
                             burn_in=2000, n_samples=5000, seed=7)
    assert len(t.rows) == 5000
    assert list(t.steps) == list(range(2000, 7000))
    s = t.stats()
    frozen = {"x": (-0.999999, 0.618033, -0.275282),
              "re": (-2.617312, 0.617588, -1.157232)}
    for label, (lo, hi, mean) in frozen.items():
        assert abs(s[label]["min"] - lo) < 2e-4
        assert abs(s[label]["max"] - hi) < 2e-4
        assert abs(s[label]["mean"] - mean) < 2e-4
    assert t.occupancy("x", "re") == 1985
    assert t.meta["seed"] == 7
    assert abs(t.meta["lam"] - 1.618034) < 1e-6
    assert 0 < t.meta["contraction"] < 1


def test_cloud_salem4_frozen_regression():
    t = galois_product_cloud(tent_map(SALEM4), 2, Fraction(1, 97),
                             burn_in=2000, n_samples=5000, seed=7)
    s = t.stats()
    frozen = {"x": (-0.999955, 0.722006, -0.218522),
              "re": (-1.897622, 0.101933, -0.781442)}
    for label, (lo, hi, mean) in frozen.items():
        assert abs(s[label]["min"] - lo) < 2e-4
        assert abs(s[label]["max"] - hi) < 2e-4
        assert abs(s[label]["mean"] - mean) < 2e-4
    assert t.occupancy("x", "re") == 1679


def test_cloud_fixed_point_is_constant():
    lam = GOLDEN.lam()
    xf = -GOLDEN.one() / (GOLDEN.one() + lam)
    f = tent_map(GOLDEN)
    assert f(xf) == xf
    t = galois_product_cloud(f, 0, xf, burn_in=5, n_samples=20, seed=1)
    assert {(round(r[0], 6), round(r[1], 6)) for r in t.rows} == {
        (-0.381966, -2.618034)}


def test_cloud_escapes_at_expanding_place():
    f = tent_map(PCF4)
    with pytest.raises(CloudEscapeError) as err:
        galois_product_cloud(f, 0, Fraction(1, 97),
                             burn_in=50, n_samples=300, seed=7)
    assert err.value.step > 0


def test_cloud_rejections():
    f = tent_map(GOLDEN)
    with pytest.raises(ValueError, match="differ from the dominant place"):
        galois_product_cloud(f, 1, Fraction(1, 97))
    with pytest.raises(ValueError, match="needs a map over a number field"):
        galois_product_cloud(tent_map(2), 0, Fraction(1, 97))


# -- radii walks ----------------------------------------------------------


def test_radii_walk_salem4():
    t = salem_radii_walk(tent_map(SALEM4), 40)
    assert t.labels == ["place1"]
    assert t.closed_at == 5
    assert len(t.rows) == 6
    assert t.meta["qden"] == 1
    assert all(r[0] >= 0 for r in t.rows)
    assert abs(max(r[0] for r in t.rows) - 1.8174) < 1e-3


def test_radii_walk_salem6_closes_with_orbit():
    t = salem_radii_walk(tent_map(SALEM6), 400)
    assert t.closed_at == 270
    assert abs(max(max(r) for r in t.rows) - 17.6255) < 1e-2


def test_radii_walk_lehmer_stays_open():
    t = salem_radii_walk(tent_map(LEHMER), 20000)
    assert t.closed_at is None
    assert len(t.labels) == 4
    assert len(t.rows) == 20001
    assert abs(max(max(r) for r in t.rows) - 325.22) < 0.5


def test_radii_walk_rejections():
    with pytest.raises(ValueError, match="no complex places"):
        salem_radii_walk(tent_map(GOLDEN), 10)
    with pytest.raises(ValueError, match="needs a map over a number field"):
        salem_radii_walk(tent_map(2), 10)


# -- backward box chains --------------------------------------------------


def test_friendly_b_at_critical_value():
    f = tent_map(PCF4)
    boxes = friendly_b(f, 0, Fraction(0), depth=40)
    assert len(boxes) == 2
    for b in boxes:
        assert b.re.lo <= 0 <= b.re.hi
        assert float(b.re.hi - b.re.lo) < 0.02


def test_friendly_b_fixed_point():
    lam = PCF4.lam()
    xf = -PCF4.one() / (PCF4.one() + lam)
    f = tent_map(PCF4)
    assert f(xf) == xf
    boxes = friendly_b(f, 0, xf, depth=40)
    assert len(boxes) == 1
    sig = PCF4.embed(xf, 0, Fraction(1, 10 ** 12))
    b = boxes[0]
    assert not (b.re.hi < sig.re.lo or sig.re.hi < b.re.lo)
    assert abs(float(b.re.lo + b.re.hi) / 2 - 5.587428) < 1e-3


def test_friendly_b_two_branches_at_kink():
    f = tent_map(PCF4)
    boxes = friendly_b(f, 0, -PCF4.one() / PCF4.lam(), depth=40)
    mids = sorted(float(b.re.lo + b.re.hi) / 2 for b in boxes)
    assert len(mids) == 2
    assert abs(mids[0] - 0.84719) < 1e-3
    assert abs(mids[1] - 0.84956) < 1e-3


def test_friendly_b_depth_nesting():
    f = tent_map(PCF4)
    for x in (Fraction(0), Fraction(1, 128), Fraction(-1, 3)):
        shallow = friendly_b(f, 0, x, depth=25)
        deep = friendly_b(f, 0, x, depth=40)
        for bd in deep:
            assert any(bs.re.lo <= bd.re.lo and bd.re.hi <= bs.re.hi
                       for bs in shallow)


def test_friendly_b_rejections():
    with pytest.raises(ValueError, match="needs a map over a number field"):
        friendly_b(tent_map(2), 0, Fraction(0))
    with pytest.raises(ValueError, match="not expanding"):
        friendly_b(tent_map(GOLDEN), 0, Fraction(0))


# -- kneading roots -------------------------------------------------------


def test_pcf_counts_small():
    res = pcf_tent_roots(5)
    assert res.max_period == 5
    assert res.per_period == {2: 1, 3: 2, 4: 3, 5: 8}
    assert len(res) == 14
    assert res.dropped == {"no_root_in_range": 64, "itinerary_mismatch": 17,
                           "sign_tie": 0, "non_minimal": 48}
    # candidate conservation: every (closure, signs) pair lands somewhere
    assert len(res.records) + sum(res.dropped.values()) == 143
    for rec in res.records:
        assert len(rec["admissible"]) == 1
    with pytest.raises(ValueError, match="at least 2"):
        pcf_tent_roots(1)


def test_pcf_known_kernels():
    res = pcf_tent_roots(5)
    known = {
        (0, -2, 1): (2, 2.0),
        (-1, -1, 1): (3, 1.618033988749895),
        (0, -2, 0, 1): (3, 1.414213562373095),
        (1, -1, -1, -1, 1): (5, 1.7220838057390422),
        (-1, 1, -1, -1, 1): (5, 1.5128763968640948),
    }
    seen = {}
    for rec in res.records:
        key = rec["poly"].coeffs
        if key in known:
            seen[key] = (rec["n"], float(rec["admissible"][0].re))
    assert set(seen) == set(known)
    for key, (n, lam) in known.items():
        assert seen[key][0] == n
        assert abs(seen[key][1] - lam) < 1e-9


def test_pcf_frozen_slopes():
    res = pcf_tent_roots(5)
    lams = sorted(float(e.re) for r in res.records for e in r["admissible"])
    frozen = [1.414213562373095, 1.5128763968640948, 1.5436890126920764,
              1.618033988749895, 1.695620769559862, 1.7220838057390422,
              1.7692923542386314, 1.8210494766943208, 1.8392867552141612,
              1.8535602775842457, 1.8737085638967708, 1.899321088847492,
              1.9275619754829254, 2.0]
    assert len(lams) == len(frozen)
    for got, want in zip(lams, frozen):
        assert abs(got - want) < 1e-9


def test_pcf_admissible_roots_are_weak_perron():
    import sympy

    x = sympy.Symbol("x")
    res = pcf_tent_roots(5)
    for rec in res.records:
        for enc in rec["admissible"]:
            lam = float(enc.re)
            assert enc.is_real
            assert 1 < lam <= 2 + 1e-9
            expr = sum(c * x ** k for k, c in enumerate(rec["squarefree"].coeffs))
            for fac, _ in sympy.factor_list(sympy.Poly(expr, x))[1]:
                roots = sympy.Poly(fac, x).nroots(n=20)
                if any(abs(complex(r) - lam) < 1e-7 for r in roots):
                    top = max(abs(complex(r)) for r in roots)
                    assert top <= lam * (1 + 1e-9) + 1e-9
                    break
            else:
                raise AssertionError("no factor vanishes at the slope")


def test_pcf_real_roots_complete_against_sympy():
    import sympy

    x = sympy.Symbol("x")
    res = pcf_tent_roots(4)
    for rec in res.records:
        sq = rec["squarefree"]
        expr = sum(c * x ** k for k, c in enumerate(sq.coeffs))
        want = sum(1 for r in sympy.Poly(expr, x).real_roots()
                   if 1 < r.evalf(30) <= 2)
        got = sum(1 for e in rec["roots"]
                  if e.is_real and 1 < float(e.re) <= 2.0000001)
        assert got == want


def test_pcf_deterministic_and_csv():
    a = pcf_tent_roots(4)
    b = pcf_tent_roots(4)
    assert a.per_period == b.per_period
    assert [r["poly"].coeffs for r in a.records] == [
        r["poly"].coeffs for r in b.records]
    pairs = list(a.all_roots())
    assert len(pairs) == 18
    out = io.StringIO()
    write_root_cloud_csv(a, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "re,im,poly,period"
    assert len(lines) == 19
    for line in lines[1:]:
        re, im, pid, n = line.split(",")
        assert abs(complex(float(re), float(im))) < 2 + 1e-9
        assert 0 <= int(pid) < len(a.records)
        assert 2 <= int(n) <= 4
