"""The eleven acceptance criteria, each at its stated tolerance.

Criteria backed by the seeded suites share one run of
``hermcalc verify --suite all --seed 42 --cases 200`` and read the
per-rule residuals from its JSON records.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from hermcalc import acyccalc, genera
from hermcalc import generators as gen
from hermcalc.acyccalc import class_residual, universal_factorization
from hermcalc.hermlin import HermComplex, cone, direct_sum, identity, zero_map
from hermcalc.serialize import Bundle, dump_objects
from hermcalc.suites import todd_oracle
from hermcalc.torsion import reduce_to_generators, tau

SEED, CASES = 42, 200


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


@pytest.fixture(scope="module")
def verify_run():
    t0 = time.time()
    p = subprocess.run([sys.executable, "-m", "hermcalc", "verify", "--suite", "all", "--seed", str(SEED),
                        "--cases", str(CASES)], capture_output=True, text=True)
    records = [json.loads(line) for line in p.stdout.splitlines() if line.strip()]
    return p.returncode, records, time.time() - t0


def worst(records, suite, rule):
    rs = [r for r in records if r["suite"] == suite and r["rule"] == rule]
    assert len(rs) == CASES, f"{suite}:{rule} has {len(rs)} records"
    return max(float(r["residual"]) for r in rs), all(r["pass"] for r in rs)


def test_criterion_01_generator_anchor():
    err = max(abs(tau(HermComplex.exp_generator(a)) - a) for a in (-2, -0.5, 0, 1, 3.5))
    report(1, err <= 1e-12, f"tau(e^a) = a, max error {err:.2e} (tol 1e-12)")


def test_criterion_02_group_law():
    err = 0.0
    for k in range(500):
        rng = gen.rng_for(SEED, 102, k)
        a, b = rng.normal(size=2) * 3
        err = max(err, abs(tau(direct_sum(HermComplex.exp_generator(a), HermComplex.exp_generator(b))) - (a + b)))
        C = gen.random_acyclic(rng)
        err = max(err, abs(reduce_to_generators(C).alternating_sum() - tau(C)))
    report(2, err <= 1e-8, f"group law and generator reduction on 500 instances, max error {err:.2e} (tol 1e-8)")


def test_criterion_03_meager_closure():
    worst_tau = 0.0
    for k in range(1000):
        M = gen.meager_by_closure(gen.rng_for(SEED, 103, k))
        worst_tau = max(worst_tau, abs(tau(M)))
    report(3, worst_tau <= 1e-8, f"1000 closure-generated meager complexes, max |tau| {worst_tau:.2e} (tol 1e-8)")


def test_criterion_04_acyclic_calculus(verify_run):
    _, records, _ = verify_run
    res = {rule: worst(records, "acyclic-calculus", rule) for rule in acyccalc.RULES}
    neg = res.pop("negative_control")
    top = max(r for r, _ in res.values())
    # the naive extension must fail: cone(0) and cone(Id) differ in class on a non-acyclic complex
    E = HermComplex({0: np.eye(1)})
    naive_gap = class_residual(cone(zero_map(E, E)), cone(identity(E)))
    ok = top <= 1e-8 and neg[1] and naive_gap > 1e-8
    report(4, ok, f"{len(res)} calculus rules x {CASES} cases, max residual {top:.2e} (tol 1e-8); "
                  f"negative control rejects the naive extension on all cases (gap {naive_gap:.2f})")


def test_criterion_05_cone_of_cones(verify_run):
    r, _ = worst(verify_run[1], "cone-welldef", "cone_of_squares")
    report(5, r <= 1e-10, f"cone-of-cones isometry on {CASES} squares, max residual {r:.2e} (tol 1e-10)")


def test_criterion_06_derived_classes(verify_run):
    _, records, _ = verify_run
    rules = ("iso_composition", "rotation", "ladder", "grid_3x3")
    r = max(worst(records, "triangle-classes", rule)[0] for rule in rules)
    c, _ = worst(records, "cone-welldef", "two_roofs")
    report(6, r <= 1e-8 and c <= 1e-8, f"composition/rotation/ladder/3x3 max residual {r:.2e}; "
                                        f"cone well-definedness max distance {c:.2e} (tol 1e-8)")


def test_criterion_07_torsor(verify_run):
    _, records, _ = verify_run
    t, _ = worst(records, "cone-welldef", "torsor")
    p, _ = worst(records, "cone-welldef", "transport")
    report(7, t <= 1e-10 and p <= 1e-9, f"torsor max error {t:.2e} (tol 1e-10); transport functoriality "
                                         f"max distance {p:.2e} (tol 1e-9)")


def test_criterion_08_universal_property():
    one = universal_factorization(tau, seed=SEED)
    two = universal_factorization(lambda C: 2 * tau(C), seed=SEED)
    rank = universal_factorization(lambda C: float(C.total_dim), seed=SEED)
    ok = one.passed and two.passed and not rank.passed and rank.failed_axiom == "normalization"
    report(8, ok, f"tau and 2tau factor (max |delta| {max(one.max_delta, two.max_delta):.2e}, tol 1e-9); "
                  f"rank rejected at {rank.failed_axiom}")


def test_criterion_09_genera():
    n = 12
    todd = list(genera.todd_series(n).coeffs) == todd_oracle(n)
    x = genera.TruncSeries.x(n)
    corr = genera.correction_factor(n) * x == genera.exp_x(n) - 1
    rng = gen.rng_for(SEED, 109)
    from fractions import Fraction
    rt = True
    for _ in range(50):
        c = [Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10))) for _ in range(n + 1)]
        f = genera.TruncSeries([0] + c[1:], n)
        g = genera.TruncSeries([1] + c[1:], n)
        rt = rt and f.exp().log() == f and g.log().exp() == g
    report(9, todd and corr and rt, f"order {n}: Todd = Bernoulli oracle {todd}, exp/log round trip {rt}, "
                                    f"correction identity {corr} (exact)")


def test_criterion_10_osm(verify_run):
    _, records, _ = verify_run
    a, _ = worst(records, "osm-assoc", "associativity")
    e4, _ = worst(records, "osm-assoc", "ambient")
    e5, _ = worst(records, "osm-assoc", "submersions")
    s, _ = worst(records, "osm-assoc", "solve_for_f")
    ok = a <= 1e-8 and e4 <= 1e-9 and e5 <= 1e-8 and s <= 1e-8
    report(10, ok, f"associativity {a:.2e}, ambient composition {e4:.2e}, submersion defect {e5:.2e}, "
                   f"solve-for-f {s:.2e} over {CASES} chains")


def _cli(*argv):
    return subprocess.run(["hermcalc", *map(str, argv)], capture_output=True, text=True)


def test_criterion_11_cli(verify_run, tmp_path):
    code, records, secs = verify_run
    rng = gen.rng_for(SEED, 111)
    C = gen.random_complex(rng)
    doc = dump_objects({"C": C, "e": HermComplex.exp_generator(1.0), "h": HermComplex({0: np.eye(2)})})
    back = Bundle.loads(json.dumps(doc)).get("complexes", "C")
    exact = all(np.array_equal(back.gram(i), C.gram(i)) for i in C.degrees) and \
        all(np.array_equal(back.d(i), C.d(i)) for i in range(C.lo, C.hi))
    path = tmp_path / "b.json"
    path.write_text(json.dumps(doc))
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    codes = {
        0: _cli("tau", path, "e").returncode,
        1: _cli("verify", "--suite", "genera", "--cases", "1", "--inject-fault", "all").returncode,
        2: _cli("tau", bad).returncode,
        3: _cli("tau", path, "h").returncode,
    }
    table = all(k == v for k, v in codes.items())
    ok = exact and table and code == 0 and all(r["pass"] for r in records)
    report(11, ok, f"bit-exact round trip {exact}; exit codes {codes}; verify --suite all --seed {SEED} "
                   f"--cases {CASES} exit {code} ({len(records)} cases, {secs:.0f} s)")
