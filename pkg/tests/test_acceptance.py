"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary."""

import math
import random
import time

import numpy as np

from ksproof.exactalg import QuadInt, Ray, canonicalize
from ksproof.ksset import (
    brute_force_colorings,
    brute_force_count,
    count_colorings,
    count_exact_covers,
    find_coloring,
    load_table1,
    parity_certificate,
    verify,
)
from ksproof.nchv import context_profile, enumerate_states, observable_value, table_iii
from ksproof.quantum import StateVector, discriminate, test_distribution
from ksproof.twoqubit import ContextClass, PauliWord, class_counts, classify_set, translate_set

RESULTS: list[str] = []


def record(number, title, ok, detail=""):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_1_table1_verification():
    t0 = time.perf_counter()
    ks = load_table1()
    rep = verify(ks)
    elapsed = time.perf_counter() - t0
    ok = (
        rep.ok
        and len(ks.rays) == 18
        and len(ks.contexts) == 9
        and all(s.status == "ok" for s in rep.contexts)
        and set(rep.occurrences.values()) == {2}
        and elapsed < 0.1
    )
    record(1, "Table I verifies, 9/9 contexts, every ray twice", ok, f"{elapsed * 1000:.1f} ms")


def test_2_non_colorability():
    ks = load_table1()
    t0 = time.perf_counter()
    backtrack = count_colorings(ks)
    search = find_coloring(ks)
    brute = brute_force_colorings(ks)
    cert = parity_certificate(ks)
    elapsed = time.perf_counter() - t0
    ok = (
        backtrack == 0
        and search is None
        and brute == 0
        and cert is not None
        and cert.context_count == 9
        and set(cert.occurrences.values()) == {2}
        and elapsed < 1.0
    )
    record(2, "no coloring: backtracking 0, brute force 0, parity certificate", ok, f"{elapsed:.3f} s")


def test_3_table2_round_trip(table1, labels):
    rep = translate_set(table1, labels)
    counts = class_counts(classify_set(table1, labels))
    ok = (
        rep.ok
        and len(rep.matches) == 18
        and all(m.derived.entries == m.stored.entries for m in rep.matches)
        and counts[ContextClass.FACTORIZABLE_ONLY] == 4
        and counts[ContextClass.MIXED] == 4
        and counts[ContextClass.ENTANGLED_ONLY] == 1
    )
    record(3, "18/18 label eigenrays match; contexts split 4/4/1", ok)


P, M = 1, -1
PRINTED_TABLE_III = [
    ((P, P, P, P), (False, False, False, False)),
    ((P, M, M, P), (True, False, False, True)),
    ((M, P, P, M), (False, True, True, False)),
    ((M, M, M, M), (False, False, False, False)),
    ((P, M, P, M), (True, False, True, False)),
    ((P, P, M, M), (False, False, False, False)),
    ((M, M, P, P), (False, False, False, False)),
    ((M, P, M, P), (False, True, False, True)),
]


def test_4_table3_reproduction(labels):
    rows = table_iii(labels)
    ok = len(rows) == 8 and [(r.products, r.answers) for r in rows] == PRINTED_TABLE_III
    record(4, "Table III reproduced row for row", ok)


def test_5_nchv_profiles(table1, labels):
    profiles = {c.name: context_profile(c, labels) for c in table1.contexts}
    first_eight = all(profiles[f"c{i}"].achievable == {1} for i in range(1, 9))
    ninth = profiles["c9"]
    ok = first_eight and ninth.achievable == {0, 2} and ninth.histogram() == {0: 8, 2: 8}
    record(5, "c1-c8 yes-count {1}; c9 {0,2} split 8/8", ok, f"c9 {ninth.histogram()}")


def test_6_quantum_normalization(table1):
    rng = np.random.default_rng(20260101)
    worst = 0.0
    for _ in range(1000):
        s = StateVector(rng.normal(size=4) + 1j * rng.normal(size=4))
        for ctx in table1.contexts:
            worst = max(worst, abs(test_distribution(s, ctx, table1).total() - 1))
    singlet = StateVector([0, 1, -1, 0])
    p = test_distribution(singlet, table1.context("c9"), table1).probabilities
    singlet_err = max(abs(a - b) for a, b in zip(p, (0, 0, 0.5, 0.5)))
    ok = worst <= 1e-12 and singlet_err <= 1e-12
    record(6, "probabilities sum to 1 (1000 states x 9 contexts); singlet c9 = (0,0,1/2,1/2)", ok,
           f"max sum error {worst:.1e}, singlet error {singlet_err:.1e}")


def test_7_single_run_discrimination():
    trials = 100_000
    t0 = time.perf_counter()
    rep = discriminate(trials, StateVector([0, 1, -1, 0]), seed=7)
    elapsed = time.perf_counter() - t0
    zeros = rep.nchv_histogram.get(0, 0)
    sigma = math.sqrt(trials * 0.25)  # uniform weights: P(0 yes) = 8/16
    ok = (
        bool(np.all(rep.qm_yes_counts == 1))
        and bool(np.all((rep.nchv_yes_counts == 0) | (rep.nchv_yes_counts == 2)))
        and abs(zeros - trials / 2) <= 3 * sigma
        and elapsed < 5.0
    )
    record(7, "every QM run 1 yes, every NCHV run 0 or 2; P(0) within 3 sigma of 1/2", ok,
           f"NCHV zeros {zeros}/{trials}, {elapsed:.2f} s")


def _ring_laws(rng):
    q = lambda: QuadInt(rng.randint(-10**4, 10**4), rng.randint(-10**4, 10**4))  # noqa: E731
    for _ in range(2000):
        x, y, z = q(), q(), q()
        if not (x * y == y * x and (x * y) * z == x * (y * z) and x * (y + z) == x * y + x * z):
            return False
    return True


def _canonical(rng):
    for _ in range(500):
        ents = [QuadInt(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(4)]
        if not any(ents):
            continue
        r = Ray(ents)
        c = canonicalize(r)
        s = QuadInt(rng.randint(-9, 9), rng.randint(-9, 9))
        k = rng.choice([i for i in range(-20, 21) if i])
        if canonicalize(c).entries != c.entries:
            return False
        if canonicalize(r.scaled(k)).entries != c.entries:
            return False
        if s and canonicalize(r.scaled(s)).entries != c.entries:
            return False
    return True


def _coloring_equivalence(rng):
    for _ in range(150):
        n = rng.randint(1, 20)
        d = rng.randint(1, min(4, n))
        ctxs = [rng.sample(range(n), d) for _ in range(rng.randint(0, 8))]
        if count_exact_covers(n, ctxs) != brute_force_count(n, ctxs):
            return False
    return True


def _sign_flip():
    words = [PauliWord.parse(w) for w in ("ZZ", "XX", "ZX", "XZ")]
    return all(observable_value(s, w) == observable_value(-s, w) for s in enumerate_states() for w in words)


def test_8_property_suites():
    rng = random.Random(8)
    checks = {
        "ring laws": _ring_laws(rng),
        "canonicalize": _canonical(rng),
        "coloring oracle": _coloring_equivalence(rng),
        "sign flip": _sign_flip(),
    }
    failed = [k for k, v in checks.items() if not v]
    record(8, "randomized property suites", not failed, "failed: " + ", ".join(failed) if failed else "4/4 suites")
