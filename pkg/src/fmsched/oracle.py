"""Exact optimum of the FM problem by pruned exhaustive search.

The search fixes rank 1 to the identity (machines are identical) and
branches over the matchings of ranks 2..k-1.  After each full rank the
machines are interchangeable again, so states are keyed by their sorted
load vector and never expanded twice.  The last rank needs no branching:
largest job onto the least loaded machine minimises the maximum load.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .algorithms import ld_schedule, worst_ld_makespan
from .core import Instance, Schedule, makespan


class OracleBudgetExceeded(RuntimeError):
    """The node budget ran out; the optimum lies in ``[lower, upper]``."""

    def __init__(self, budget: int, lower: Fraction, upper: Fraction):
        super().__init__(f"oracle budget of {budget} nodes exhausted; optimum in [{lower}, {upper}]")
        self.budget = budget
        self.lower = lower
        self.upper = upper


@dataclass(frozen=True)
class OracleResult:
    makespan: Fraction
    schedule: Schedule
    nodes: int


@dataclass(frozen=True)
class RatioResult:
    t_ld: Fraction
    t_opt: Fraction
    ratio: Fraction


def lower_bound(inst: Instance) -> Fraction:
    """max(average load, the machine holding lam_1 plus a minimum per later rank)."""
    k = inst.k
    avg = inst.total() / inst.m
    chain = inst.lam(1) + sum((inst.mu(r) for r in range(2, k + 1)), Fraction(0))
    return max(avg, chain)


class _Search:
    def __init__(self, inst: Instance, budget: int, incumbent: Fraction, witness):
        self.inst = inst
        self.budget = budget
        self.best = incumbent
        self.witness = witness
        self.nodes = 0
        self.lb = lower_bound(inst)
        k = inst.k
        # Σ of rank minima still to come after rank r (0-based)
        self.tail = [sum((inst.mu(s) for s in range(r + 2, k + 1)), Fraction(0)) for r in range(k)]
        self.seen = set()

    def done(self) -> bool:
        return self.best <= self.lb

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise OracleBudgetExceeded(self.budget, self.lb, self.best)

    def finish(self, machines):
        """Place the last rank by opposite-order matching and score it."""
        inst = self.inst
        r = inst.k - 1
        order = sorted(range(inst.m), key=lambda i: machines[i][0])
        jobs = list(inst.rank_jobs(r + 1))
        rows = [None] * inst.m
        top = Fraction(0)
        for i, j in zip(order, jobs):
            load = machines[i][0] + inst.p[j]
            rows[i] = machines[i][1] + (j,)
            top = max(top, load)
        if top < self.best:
            self.best = top
            self.witness = rows

    def matchings(self, machines, r):
        """Distinct load outcomes of matching rank ``r`` (0-based) onto ``machines``."""
        inst = self.inst
        jobs = list(inst.rank_jobs(r + 1))
        m = inst.m
        tail = self.tail[r]
        used = [False] * m
        chosen = [None] * m
        # try least loaded machines first for the largest jobs
        order = sorted(range(m), key=lambda i: machines[i][0])

        def place(pos):
            if pos == m:
                yield list(chosen)
                return
            j = jobs[pos]
            tried = set()
            for i in order:
                if used[i]:
                    continue
                load = machines[i][0]
                if load in tried:
                    continue
                tried.add(load)
                if load + inst.p[j] + tail >= self.best:
                    continue
                self.tick()
                used[i] = True
                chosen[i] = j
                yield from place(pos + 1)
                used[i] = False
                chosen[i] = None

        yield from place(0)

    def step(self, machines, r):
        """Machines after rank ``r`` (0-based); returns next-rank children."""
        inst = self.inst
        for choice in self.matchings(machines, r):
            child = [(machines[i][0] + inst.p[choice[i]], machines[i][1] + (choice[i],)) for i in range(inst.m)]
            child.sort(key=lambda t: t[0], reverse=True)
            yield child

    def run(self, machines, r):
        """Explore from ``machines`` whose next rank to place is ``r`` (0-based)."""
        if self.done():
            return
        inst = self.inst
        if r == inst.k - 1:
            self.finish(machines)
            return
        for child in self.step(machines, r):
            key = (r, tuple(t[0] for t in child))
            if key in self.seen:
                continue
            self.seen.add(key)
            if child[0][0] + self.tail[r] >= self.best:
                continue
            self.run(child, r + 1)
            if self.done():
                return


def _root(inst: Instance):
    return [(inst.p[j], (j,)) for j in inst.rank_jobs(1)]


def _run_partition(inst, budget, incumbent, starts):
    search = _Search(inst, budget, incumbent, None)
    for child in starts:
        search.run(child, 2)
        if search.done():
            break
    return search.best, search.witness, search.nodes


def optimal_fm_makespan(inst: Instance, budget: int = 10**7, jobs: int = 1) -> OracleResult:
    """Minimum makespan over all flowtime-optimal schedules, with a witness.

    Raises :class:`OracleBudgetExceeded` instead of guessing when ``budget``
    search nodes are not enough.  ``jobs > 1`` splits the rank-2 matchings
    over worker processes; the minimum of the parts is exact either way.
    """
    ld = ld_schedule(inst)
    upper = worst_ld_makespan(inst)
    search = _Search(inst, budget, upper, [tuple(row) for row in ld.assignment])
    if inst.k == 1 or search.done():
        pass
    elif jobs <= 1 or inst.k < 3:
        search.run(_root(inst), 1)
    else:
        children = []
        seen = set()
        for child in search.step(_root(inst), 1):
            key = tuple(t[0] for t in child)
            if key not in seen:
                seen.add(key)
                children.append(child)
        parts = [children[w::jobs] for w in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_partition, itertools.repeat(inst), itertools.repeat(budget),
                                    itertools.repeat(upper), parts))
        for best, witness, nodes in results:
            search.nodes += nodes
            if witness is not None and best < search.best:
                search.best, search.witness = best, witness
        if search.nodes > budget:
            raise OracleBudgetExceeded(budget, search.lb, search.best)
    rows = _rows_by_rank(inst, search.witness)
    sched = Schedule.flowtime_optimal(inst, rows)
    assert makespan(sched) == search.best
    return OracleResult(search.best, sched, search.nodes)


def _rows_by_rank(inst, witness):
    rows = []
    for jobs_ in witness:
        row = [None] * inst.k
        for j in jobs_:
            row[inst.rank_of(j) - 1] = j
        rows.append(row)
    return rows


def brute_force_fm_makespan(inst: Instance) -> Fraction:
    """Unpruned enumeration of every rank-respecting assignment (rank 1 fixed)."""
    m, k = inst.m, inst.k
    first = [inst.p[j] for j in inst.rank_jobs(1)]
    best = None
    perms = list(itertools.permutations(range(m)))
    for combo in itertools.product(perms, repeat=k - 1):
        loads = first[:]
        for r, perm in enumerate(combo, start=2):
            rank = inst.rank(r)
            for i, pos in enumerate(perm):
                loads[i] += rank[pos]
        top = max(loads)
        if best is None or top < best:
            best = top
    return best


def search_space(inst: Instance) -> int:
    """Size of the unpruned assignment space, (m!)^(k-1)."""
    return math.factorial(inst.m) ** (inst.k - 1)


def makespan_ratio(inst: Instance, budget: int = 10**7, jobs: int = 1) -> RatioResult:
    """Worst LD makespan over the optimum; an all-zero instance has ratio 1."""
    t_ld = worst_ld_makespan(inst)
    t_opt = optimal_fm_makespan(inst, budget=budget, jobs=jobs).makespan
    ratio = Fraction(1) if t_opt == 0 else t_ld / t_opt
    return RatioResult(t_ld, t_opt, ratio)
