"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL ...`` line to the
terminal (also shown without ``-s``) and asserts its own time limit.
"""

import json
import random
import time
from fractions import Fraction as F

import pytest

from brute import lp_by_vertices, random_lp_data, to_problem
from fmsched.algorithms import (
    ld0_worst_makespan,
    ld0_worst_schedule,
    ld_profiles,
    ld_schedule,
    ld_schedules,
    li_schedule,
)
from fmsched.caseanalysis import PASS, remaining_cases, three_machine_cases, two_machine_cases, verify_bound
from fmsched.cli import run
from fmsched.core import is_flowtime_optimal, makespan, normalize_instance
from fmsched.lp import INFEASIBLE, OPTIMAL, solve_lp, verify_certificate
from fmsched.oracle import brute_force_fm_makespan, optimal_fm_makespan
from fmsched.search import enumerate_instances, hunt, ld0_family, li_ratio_bound, tight_family


@pytest.fixture
def say(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def _say(n, ok, detail, word=None):
        line = f"CRITERION {n}: {word or ('PASS' if ok else 'FAIL')} - {detail}"
        print(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
    return _say


def test_criterion_1_tight_family(tmp_path, capsys, say):
    start = time.perf_counter()
    got = {}
    for m in range(2, 9):
        path = tmp_path / f"tight_m{m}.json"
        path.write_text(json.dumps(tight_family(m).to_json()))
        code = run(["ratio", "--in", str(path)])
        got[m] = (code, F(json.loads(capsys.readouterr().out)["ratio"]))
    elapsed = time.perf_counter() - start
    ok = all(code == 0 and r == F(5 * m - 2, 4 * m - 1) for m, (code, r) in got.items()) and elapsed < 60
    say(1, ok, ", ".join(f"m={m}:{r}" for m, (_, r) in got.items()) + f" in {elapsed:.1f}s")
    assert ok


def test_criterion_2_lp_golden(say):
    start = time.perf_counter()
    cases = two_machine_cases()
    checks = []
    for cid in ("case2a", "case2b", "case3a", "case3b"):
        sol = solve_lp(cases[cid])
        checks.append(sol.value == F(8, 7) and (sol.x["lam2"], sol.x["lam3"]) == (F(3, 7), F(2, 7))
                      and verify_certificate(cases[cid], sol))
    for cid in ("case4a", "case4b"):
        sol = solve_lp(cases[cid])
        checks.append(sol.value == 1 and verify_certificate(cases[cid], sol))
    sol = solve_lp(cases["case1"])
    checks.append(sol.status == INFEASIBLE and verify_certificate(cases["case1"], sol))
    prob = three_machine_cases()["appendix-c1-lam1+alpha2"]
    sol = solve_lp(prob)
    point = dict(zip(("lam1", "lam2", "lam3", "alpha1", "alpha2"), (F(v, 8) for v in (5, 3, 2, 4, 3))))
    checks.append(sol.status == OPTIMAL and sol.value == F(9, 8) and sol.x == point and verify_certificate(prob, sol))
    elapsed = time.perf_counter() - start
    ok = all(checks) and elapsed < 1
    say(2, ok, f"{sum(checks)}/{len(checks)} golden LPs exact and certified in {elapsed:.2f}s")
    assert ok


def test_criterion_3_case_analysis(say):
    start = time.perf_counter()
    a = verify_bound(2, 3, F(8, 7))
    b = verify_bound(3, 3, F(13, 11))
    elapsed = time.perf_counter() - start
    ok = (a.verdict == PASS and a.global_max == F(8, 7) and b.verdict == PASS and b.global_max == F(13, 11)
          and elapsed < 300)
    say(3, ok, f"(2,3) {a.verdict} max {a.global_max} over {len(a.results)} LPs; "
               f"(3,3) {b.verdict} max {b.global_max} over {len(b.results)} LPs; {elapsed:.1f}s")
    assert ok


HUNTS = [(2, 3, 8, F(8, 7)), (3, 3, 7, F(13, 11)), (2, 2, 6, F(1))]


@pytest.fixture(scope="module")
def hunt_sets():
    return {(m, k, lmax): list(enumerate_instances(m, k, lmax, canonical=True)) for m, k, lmax, _ in HUNTS}


def test_criterion_4_hunts(say):
    start = time.perf_counter()
    parts, ok = [], True
    for m, k, lmax, want in HUNTS:
        rep = hunt(m, k, lmax)
        ok &= rep.max_ratio == want and rep.exit_code() == 0 and not rep.violations
        parts.append(f"({m},{k},{lmax}) max {rep.max_ratio} over {rep.checked}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 600
    say(4, ok, "; ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_5_ld0(say):
    start = time.perf_counter()
    ratios = {}
    for m in (3, 4, 5, 6):
        inst = ld0_family(m)
        ratios[m] = ld0_worst_makespan(inst) / optimal_fm_makespan(inst).makespan
    scan = hunt(3, 3, 6, bound=F(4, 3), algorithm="ld0")
    elapsed = time.perf_counter() - start
    ok = all(r == F(4, 3) for r in ratios.values()) and scan.exit_code() == 0 and elapsed < 300
    say(5, ok, ", ".join(f"m={m}:{r}" for m, r in ratios.items())
        + f"; scan (3,3,6) max {scan.max_ratio} over {scan.checked}; {elapsed:.1f}s")
    assert ok


def test_criterion_6_li(hunt_sets, say):
    worst = {}
    ok = True
    attained = False
    for (m, k, lmax), insts in hunt_sets.items():
        for inst in insts:
            t_opt = optimal_fm_makespan(inst).makespan
            if t_opt == 0:
                continue
            r = makespan(li_schedule(inst)) / t_opt
            ok &= r <= li_ratio_bound(m)
            worst[(m, k, lmax)] = max(worst.get((m, k, lmax), F(0)), r)
            attained |= m == 2 and r == li_ratio_bound(2)
    detail = "; ".join(f"{key} max LI ratio {v}" for key, v in worst.items())
    if ok and not attained:
        say(6, ok, detail + "; equality at m=2 NOT-ATTAINED", word="PASS (NOT-ATTAINED)")
    else:
        say(6, ok, detail + ("; equality 6/5 attained at m=2" if attained else ""))
    assert ok


def test_criterion_7_properties(say):
    start = time.perf_counter()
    rng = random.Random(2024)
    notes = []

    # flowtime-optimality of every algorithm output
    valid = True
    for m in (1, 2, 3):
        for k in (1, 2, 3):
            for inst in enumerate_instances(m, k, 3):
                outs = [ld_schedule(inst), li_schedule(inst), ld0_worst_schedule(inst)] + ld_schedules(inst)
                valid &= all(is_flowtime_optimal(s) for s in outs)
    for _ in range(300):
        m = rng.randint(1, 4)
        inst = normalize_instance([F(rng.randint(0, 20), rng.randint(1, 4)) for _ in range(rng.randint(1, 12))], m)
        outs = [ld_schedule(inst), li_schedule(inst), ld0_worst_schedule(inst)]
        valid &= all(is_flowtime_optimal(s) for s in outs)
    notes.append(f"validator {'ok' if valid else 'FAILED'}")

    # pruned oracle against the unpruned product enumeration
    same, count = True, 0
    for m in (1, 2, 3):
        for k in (1, 2, 3):
            for inst in enumerate_instances(m, k, 4):
                same &= optimal_fm_makespan(inst).makespan == brute_force_fm_makespan(inst)
                count += 1
    notes.append(f"oracle pruned=unpruned on {count}")

    # profile monotonicity under in-rank increases
    mono, done = True, 0
    while done < 10_000:
        m, k = rng.randint(2, 3), rng.randint(1, 3)
        inst = normalize_instance([rng.randint(0, 6) for _ in range(m * k)], m)
        j = rng.randrange(inst.n)
        r = inst.rank_of(j)
        room = inst.mu(r - 1) - inst.p[j] if r > 1 else F(6)
        if room <= 0:
            continue
        delta = min(room, F(rng.randint(1, 6), rng.randint(1, 3)))
        p = list(inst.p)
        p[j] += delta
        before, after = ld_profiles(inst), ld_profiles(normalize_instance(p, m))
        mono &= all(b >= a for ell in range(r - 1, k) for a, b in zip(before[ell], after[ell]))
        done += 1
    notes.append(f"monotone on {done} perturbations")

    # exact simplex against vertex enumeration
    lp_ok = True
    for _ in range(1000):
        data = random_lp_data(rng, rng.randint(1, 4), rng.randint(1, 6))
        sol = solve_lp(to_problem(*data))
        want = lp_by_vertices(*data)
        lp_ok &= (sol.status == INFEASIBLE) if want is None else (sol.status == OPTIMAL and sol.value == want)
        lp_ok &= verify_certificate(to_problem(*data), sol)
    notes.append("1000 LPs match vertex enumeration" if lp_ok else "LP mismatch")

    elapsed = time.perf_counter() - start
    ok = valid and same and mono and lp_ok and elapsed < 600
    say(7, ok, "; ".join(notes) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_8_open_cases(capsys, say):
    ok = remaining_cases(2) == set() and remaining_cases(3) == set()
    ok &= all(remaining_cases(m) == {4, 5} for m in (4, 5, 6))
    codes = []
    for m, k in ((4, 4), (4, 5), (5, 4)):
        code = run(["hunt", "--m", str(m), "--k", str(k), "--lmax", "2"])
        out = capsys.readouterr().out
        codes.append(code)
        ok &= code == 0 and "not a proof" in out
    say(8, ok, f"remaining_cases(m>=4) = {{4, 5}}; open-case hunts exit {codes} with coverage disclaimer "
               "(evidence only, the open cases are not settled here)")
    assert ok
