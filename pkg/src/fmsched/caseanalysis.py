"""Bound verification by treating processing times as LP variables.

For fixed ``(m, k)`` the processing times after the ``mu_r = lam_{r+1}``
normalization are symbolic: rank ``r`` is ``lam_r >= tau_r_2 >= ... >=
lam_{r+1}`` (the last rank ends in 0).  Running LD on symbolic data needs
the sorted order of the profile before every rank; each possible order is
a conjunction of linear inequalities, so LD splits into finitely many
branches, each with a linear makespan expression.  Pairing every branch
with every candidate optimal assignment and capping that assignment's
machine loads at 1 gives one LP whose optimum bounds the makespan ratio
over the branch.  The largest optimum over all pairs is the worst ratio.

Boundaries are covered twice on purpose (all conditions are non-strict);
that is harmless when taking a maximum.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import Instance, format_rational
from .lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, Constraint, LinExpr, LpProblem, LpSolution, eq, ge, le,
                 solve_lp, verify_certificate)

PASS = "PASS"
FAIL = "FAIL"
FAIL_UNBOUNDED = "FAIL-UNBOUNDED"
FAIL_CERTIFICATE = "FAIL-CERTIFICATE"

FREE = "free"
DICHOTOMY = "dichotomy"


class CaseCapExceeded(RuntimeError):
    def __init__(self, m: int, k: int, needed: int, cap: int):
        super().__init__(f"(m={m}, k={k}) needs at least {needed} LPs, cap is {cap}")
        self.needed = needed
        self.cap = cap


def lam(r: int) -> str:
    return f"lam{r}"


def mid(r: int, i: int) -> str:
    return f"tau{r}_{i}"


@dataclass(frozen=True)
class SymbolicInstance:
    """Rank-by-rank symbolic processing times plus their ordering chain."""

    m: int
    k: int
    variables: tuple[str, ...]
    ranks: tuple[tuple[LinExpr, ...], ...]
    chain: tuple[Constraint, ...]
    variant: str = ""

    def values(self, inst: Instance) -> dict[str, Fraction]:
        """Variable values that reproduce ``inst`` (which must fit this shape)."""
        out = {}
        for r in range(1, self.k + 1):
            for i, expr in enumerate(self.ranks[r - 1], start=1):
                if len(expr.terms) == 1 and expr.terms[0][1] == 1 and not expr.const:
                    out.setdefault(expr.terms[0][0], inst.tau(i, r))
        for v in self.variables:
            out.setdefault(v, Fraction(0))
        return out

    def matches(self, inst: Instance) -> bool:
        if inst.m != self.m or inst.k != self.k:
            return False
        vals = self.values(inst)
        return all(
            expr.evaluate(vals) == inst.tau(i, r)
            for r in range(1, self.k + 1)
            for i, expr in enumerate(self.ranks[r - 1], start=1)
        ) and all(c.holds(vals) for c in self.chain)


def symbolic_instances(m: int, k: int, rank_k_middles: str = FREE) -> list[SymbolicInstance]:
    """Symbolic shapes covering every normalized ``(m, k)`` instance.

    With ``rank_k_middles="dichotomy"`` the middle jobs of the last rank are
    restricted to ``lam_k`` or 0 (one shape per split), which is how the
    three-machine hand analysis proceeds; ``"free"`` keeps them as variables.
    A single machine skips the normalization, which would zero every job.
    """
    if m < 1 or k < 1:
        raise ValueError("m and k must be >= 1")
    zero = LinExpr()
    if m == 1:
        names = tuple(lam(r) for r in range(1, k + 1))
        ranks = tuple((LinExpr.var(lam(r)),) for r in range(1, k + 1))
        chain = [ge(LinExpr.var(lam(r)), LinExpr.var(lam(r + 1)), f"chain{r}") for r in range(1, k)]
        chain.append(ge(LinExpr.var(lam(k)), 0, f"chain{k}"))
        return [SymbolicInstance(m, k, names, ranks, tuple(chain))]

    def build(split):
        names, ranks, chain = [], [], []
        for r in range(1, k + 1):
            top = LinExpr.var(lam(r))
            bottom = LinExpr.var(lam(r + 1)) if r < k else zero
            names.append(lam(r))
            rank = [top]
            if r < k or split is None:
                for i in range(2, m):
                    names.append(mid(r, i))
                    rank.append(LinExpr.var(mid(r, i)))
            else:
                rank += [top] * split + [zero] * (m - 2 - split)
            rank.append(bottom)
            for i in range(len(rank) - 1):
                if rank[i] != rank[i + 1]:
                    chain.append(ge(rank[i], rank[i + 1], f"chain{r}_{i + 1}"))
            ranks.append(tuple(rank))
        chain.append(ge(LinExpr.var(lam(k)), 0, f"chain{k}_nonneg"))
        variant = "" if split is None else f"split{split}"
        return SymbolicInstance(m, k, tuple(names), tuple(ranks), tuple(chain), variant)

    if rank_k_middles == FREE or m == 2:
        return [build(None)]
    if rank_k_middles == DICHOTOMY:
        return [build(s) for s in range(m - 1)]
    raise ValueError(f"unknown rank_k_middles mode {rank_k_middles!r}")


@dataclass(frozen=True)
class LdBranch:
    """One symbolic LD trajectory.

    ``orders[t]`` is the assumed nonincreasing machine order of the profile
    before rank ``t + 3``; ``top`` is the machine that sets the makespan.
    """

    orders: tuple[tuple[int, ...], ...]
    top: int
    conditions: tuple[Constraint, ...]
    loads: tuple[LinExpr, ...]

    @property
    def t_ld(self) -> LinExpr:
        return self.loads[self.top]


def _feasible(sym: SymbolicInstance, conditions) -> bool:
    """Is the cone nontrivial?  Checked on the slice ``lam_1 = 1``."""
    probe = LpProblem(sym.variables, LinExpr(), sym.chain + tuple(conditions) + (eq(LinExpr.var(lam(1)), 1),))
    return solve_lp(probe).status != INFEASIBLE


def _ordered(exprs, perm):
    """Skip orders that only permute identical expressions."""
    for a, b in zip(perm, perm[1:]):
        if exprs[a] == exprs[b] and a > b:
            return False
    return True


def ld_branches(sym: SymbolicInstance) -> list[LdBranch]:
    m, k = sym.m, sym.k
    out = []

    def place(r, exprs, order, conds, orders):
        # machine order[-1] has the smallest load and takes the largest job
        new = list(exprs)
        for job, i in zip(sym.ranks[r - 1], reversed(order)):
            new[i] = exprs[i] + job
        descend(r + 1, tuple(new), conds, orders)

    def descend(r, exprs, conds, orders):
        if r > k:
            for top in range(m):
                if any(exprs[top] == exprs[j] for j in range(top)):
                    continue
                extra = tuple(ge(exprs[top], exprs[j], f"top{top}>={j}") for j in range(m)
                              if j != top and exprs[j] != exprs[top])
                if _feasible(sym, conds + extra):
                    out.append(LdBranch(tuple(orders), top, conds + extra, exprs))
            return
        for perm in itertools.permutations(range(m)):
            if not _ordered(exprs, perm):
                continue
            extra = tuple(ge(exprs[a], exprs[b], f"r{r}:{a}>={b}") for a, b in zip(perm, perm[1:])
                          if exprs[a] != exprs[b])
            if extra and not _feasible(sym, conds + extra):
                continue
            place(r, exprs, perm, conds + extra, orders + [perm])

    rank1 = tuple(sym.ranks[0])
    if k == 1:
        descend(2, rank1, (), [])
    else:
        # rank 1 is already sorted by the chain
        place(2, rank1, tuple(range(m)), (), [])
    return out


def candidate_schedules(sym: SymbolicInstance) -> list[tuple[tuple[tuple[int, ...], ...], tuple[LinExpr, ...]]]:
    """Every assignment with rank 1 fixed, deduplicated by its multiset of loads."""
    m, k = sym.m, sym.k
    seen = set()
    out = []
    for perms in itertools.product(itertools.permutations(range(m)), repeat=k - 1):
        loads = []
        for i in range(m):
            e = sym.ranks[0][i]
            for r, perm in enumerate(perms, start=2):
                e = e + sym.ranks[r - 1][perm[i]]
            loads.append(e)
        key = tuple(sorted((e.terms, e.const) for e in loads))
        if key in seen:
            continue
        seen.add(key)
        out.append((perms, tuple(loads)))
    return out


@dataclass(frozen=True)
class CaseSpec:
    id: str
    m: int
    k: int
    symbolic: SymbolicInstance
    branch: LdBranch
    candidate: tuple[tuple[int, ...], ...]
    problem: LpProblem

    def sign_conditions(self) -> tuple[Constraint, ...]:
        return self.symbolic.chain + self.branch.conditions

    def covers(self, inst: Instance) -> bool:
        """Does ``inst`` satisfy this case's chain and LD-branch conditions?"""
        if not self.symbolic.matches(inst):
            return False
        vals = self.symbolic.values(inst)
        return all(c.holds(vals) for c in self.branch.conditions)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "m": self.m,
            "k": self.k,
            "variant": self.symbolic.variant,
            "ld_orders": [list(o) for o in self.branch.orders],
            "ld_top_machine": self.branch.top,
            "t_ld": str(self.branch.t_ld),
            "candidate": [list(p) for p in self.candidate],
            "problem": self.problem.to_json(),
        }


def enumerate_cases(m: int, k: int, cap: int = 100_000, rank_k_middles: str = FREE) -> list[CaseSpec]:
    cases = []
    for sym in symbolic_instances(m, k, rank_k_middles):
        per_rank = math.factorial(m)
        if per_rank ** (k - 1) > cap:
            raise CaseCapExceeded(m, k, per_rank ** (k - 1), cap)
        cands = candidate_schedules(sym)
        if len(cands) > cap:
            raise CaseCapExceeded(m, k, len(cands), cap)
        branches = ld_branches(sym)
        if len(cases) + len(branches) * len(cands) > cap:
            raise CaseCapExceeded(m, k, len(cases) + len(branches) * len(cands), cap)
        tag = f"-{sym.variant}" if sym.variant else ""
        for b_idx, br in enumerate(branches):
            for c_idx, (perms, loads) in enumerate(cands):
                caps = tuple(le(e, 1, f"load{i}<=1") for i, e in enumerate(loads))
                cid = f"m{m}k{k}{tag}-b{b_idx}-s{c_idx}"
                problem = LpProblem(sym.variables, br.t_ld, sym.chain + br.conditions + caps, label=cid)
                cases.append(CaseSpec(cid, m, k, sym, br, perms, problem))
    return cases


@dataclass(frozen=True)
class CaseResult:
    id: str
    status: str
    value: Fraction | None
    x: Mapping[str, Fraction]
    certified: bool
    solution: LpSolution = field(repr=False)


@dataclass
class BoundReport:
    m: int
    k: int
    bound: Fraction
    verdict: str
    global_max: Fraction | None
    attaining: list[str]
    results: list[CaseResult]
    cases: list[CaseSpec] = field(repr=False)
    golden: list[CaseResult] = field(default_factory=list)
    offending: list[str] = field(default_factory=list)

    def attaining_points(self) -> list[Mapping[str, Fraction]]:
        by_id = {r.id: r for r in self.results}
        return [by_id[i].x for i in self.attaining]

    def summary(self) -> str:
        gm = "none" if self.global_max is None else format_rational(self.global_max)
        return (f"{self.verdict}: m={self.m} k={self.k} bound={format_rational(self.bound)} "
                f"cases={len(self.results)} max={gm} attained_by={len(self.attaining)}")

    def to_json(self) -> dict:
        specs = {c.id: c for c in self.cases}
        return {
            "m": self.m,
            "k": self.k,
            "bound": format_rational(self.bound),
            "verdict": self.verdict,
            "global_max": None if self.global_max is None else format_rational(self.global_max),
            "attaining": self.attaining,
            "offending": self.offending,
            "cases": [
                dict(specs[r.id].to_json(), solution=r.solution.to_json(), certified=r.certified)
                for r in self.results
            ],
            "golden": [
                {"id": g.id, "status": g.status, "certified": g.certified, "solution": g.solution.to_json()}
                for g in self.golden
            ],
        }


def _solve(problem: LpProblem) -> tuple[LpSolution, bool]:
    sol = solve_lp(problem)
    return sol, verify_certificate(problem, sol)


def _result(cid, sol, ok) -> CaseResult:
    return CaseResult(cid, sol.status, sol.value, dict(sol.x), ok, sol)


def verify_bound(m: int, k: int, bound, cap: int = 100_000, jobs: int = 1,
                 rank_k_middles: str = FREE) -> BoundReport:
    """Solve every case LP for ``(m, k)`` and compare the worst optimum to ``bound``.

    Every LP answer is re-checked through its certificate.  An unbounded LP
    means the case model is wrong and is reported as FAIL-UNBOUNDED.
    """
    bound = Fraction(bound)
    cases = enumerate_cases(m, k, cap=cap, rank_k_middles=rank_k_middles)
    problems = [c.problem for c in cases]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            solved = list(pool.map(_solve, problems, chunksize=16))
    else:
        solved = [_solve(p) for p in problems]
    results = [_result(c.id, sol, ok) for c, (sol, ok) in zip(cases, solved)]

    unbounded = [r.id for r in results if r.status == UNBOUNDED]
    uncertified = [r.id for r in results if not r.certified]
    optima = [r for r in results if r.status == OPTIMAL]
    global_max = max((r.value for r in optima), default=None)
    attaining = sorted(r.id for r in optima if r.value == global_max) if optima else []
    if unbounded:
        verdict, offending = FAIL_UNBOUNDED, unbounded
    elif uncertified:
        verdict, offending = FAIL_CERTIFICATE, uncertified
    elif global_max is not None and global_max > bound:
        verdict, offending = FAIL, sorted(r.id for r in optima if r.value > bound)
    else:
        verdict, offending = PASS, []

    golden = []
    if m == 2 and k == 3:
        golden = [_result(cid, *_solve(p)) for cid, p in two_machine_cases().items()]
    elif m == 3 and k == 3:
        golden = [_result(cid, *_solve(p)) for cid, p in three_machine_cases().items()]
    return BoundReport(m, k, bound, verdict, global_max, attaining, results, cases, golden, offending)


def remaining_cases(m: int) -> set[int]:
    """Rank counts ``k`` for which the bound is still unverified on ``m`` machines.

    Two and three machines are settled outright; with four or more, three
    ranks are settled and any minimal counterexample has ratio below
    ``k/(k-1)``, which rules out ``k >= 6``.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if m <= 3:
        return set()
    return {4, 5}


# Hand-derived case LPs for two machines and three ranks.  Jobs are
# lam1, lam2, lam2, lam3, lam3, 0; the only candidate optimum puts
# (lam1, lam2, 0) on one machine and (lam2, lam3, lam3) on the other.

def _v(*names):
    return [LinExpr.var(n) for n in names]


def two_machine_cases(bound=Fraction(8, 7)) -> dict[str, LpProblem]:
    l1, l2, l3 = _v("lam1", "lam2", "lam3")
    names = ("lam1", "lam2", "lam3")
    chain = (ge(l1, l2, "lam1>=lam2"), ge(l2, l3, "lam2>=lam3"))
    s_a = eq(l2 + 2 * l3, 1, "t_S=lam2+2lam3=1")
    s_b = eq(l1 + l2, 1, "t_S=lam1+lam2=1")
    case2 = (le(l1, 2 * l2), ge(l1 + l3, 2 * l2))
    case3 = (le(l1 + l3, 2 * l2), ge(l1 + 2 * l3, 2 * l2))
    case4 = (ge(2 * l2, l1 + 2 * l3),)
    small = le(l1, 2 * l3, "lam1<=2lam3")
    big = ge(l1, 2 * l3, "lam1>=2lam3")

    def lp(label, obj, *cons):
        return LpProblem(names, obj, chain + tuple(cons), label=label)

    l2s, l3s = _v("lam2", "lam3")
    return {
        # dismissed by contradiction in the hand proof; the LP carries the
        # counterexample premise t_LD >= bound * t_S so the contradiction shows
        # up as infeasibility
        "case1": lp("case1", l1 + l3, ge(l1, 2 * l2), s_b, le(l2 + 2 * l3, 1), ge(l1 + l3, bound)),
        "case2a": lp("case2a", 2 * l2 + l3, *case2, small, s_a),
        "case2a-reduced": LpProblem(("lam2", "lam3"), 2 * l2s + l3s,
                                    (le(2 * l2s, 3 * l3s), eq(l2s + 2 * l3s, 1)), label="case2a-reduced"),
        "case2b": lp("case2b", 2 * l2 + l3, *case2, big, s_b),
        "case3a": lp("case3a", l1 + 2 * l3, *case3, small, s_a),
        "case3b": lp("case3b", l1 + 2 * l3, *case3, big, s_b),
        "case4a": lp("case4a", 2 * l2, *case4, small, s_a),
        "case4b": lp("case4b", 2 * l2, *case4, big, s_b),
    }


def three_machine_cases() -> dict[str, LpProblem]:
    """Three machines, three ranks, rank-3 middle job equal to lam3.

    LD has put (lam1, lam3, 0), (alpha1, alpha2, lam3), (lam2, lam2, lam3)
    on the machines.  Two optimal configurations are considered, each with
    every choice of its critical machine normalized to length 1.
    """
    l1, l2, l3, a1, a2 = _v("lam1", "lam2", "lam3", "alpha1", "alpha2")
    names = ("lam1", "lam2", "lam3", "alpha1", "alpha2")
    base = (
        le(a1, l1, "alpha1<=lam1"), le(l2, a1, "lam2<=alpha1"), le(a2, l2, "alpha2<=lam2"), le(l3, a2, "lam3<=alpha2"), ge(l3, 0, "lam3>=0"),
        le(a1 + a2, l1 + l3, "ld-order-rank2"), le(2 * l2, a1 + a2, "ld-order-rank3"),
    )
    obj = a1 + a2 + l3

    def lp(label, *cons):
        return LpProblem(names, obj, base + tuple(cons), label=label)

    return {
        # configuration (lam1, alpha2, 0), (alpha1, lam3, lam3), (lam2, lam2, lam3)
        "appendix-c1-lam1+alpha2": lp("appendix-c1-lam1+alpha2",
                                      le(a1 + 2 * l3, l1 + a2, "critical>=other"), le(2 * l2 + l3, l1 + a2, "critical>=other2"),
                                      le(l1 + a2, 1, "critical<=1")),
        "appendix-c1-alpha1+2lam3": lp("appendix-c1-alpha1+2lam3",
                                       le(l1 + a2, a1 + 2 * l3, "critical>=other"), le(2 * l2 + l3, a1 + 2 * l3, "critical>=other2"),
                                       le(a1 + 2 * l3, 1, "critical<=1")),
        "appendix-c1-2lam2+lam3": lp("appendix-c1-2lam2+lam3",
                                     le(l1 + a2, 2 * l2 + l3, "critical>=other"), le(a1 + 2 * l3, 2 * l2 + l3, "critical>=other2"),
                                     le(2 * l2 + l3, 1, "critical<=1")),
        # configuration (lam1, lam2, 0), (alpha1, lam3, lam3), (lam2, alpha2, lam3)
        "appendix-c2-lam1+lam2": lp("appendix-c2-lam1+lam2",
                                    le(a1 + 2 * l3, l1 + l2, "critical>=other"), le(l2 + a2 + l3, l1 + l2, "critical>=other2"),
                                    le(l1 + l2, 1, "critical<=1")),
    }
