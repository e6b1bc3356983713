"""LD, LI and LD0 schedule construction.

Every rank is matched against the current profile the same way: the
largest job of the rank goes to the machine with the smallest completion
time, the second largest to the second smallest, and so on.  LD walks the
ranks 1..k and then reverses each machine; LI walks k..1.
"""

from __future__ import annotations

import enum
import itertools
from fractions import Fraction

from .core import Instance, Schedule, profile


class TieBreakPolicy(enum.Enum):
    LOWEST_INDEX = "lowest-machine-index"
    ENUMERATE_ALL = "enumerate-all"


class TieExplosion(RuntimeError):
    """More tie-break branches than the caller allowed."""

    def __init__(self, cap: int):
        super().__init__(f"tie-break enumeration exceeded {cap} branches")
        self.cap = cap


def _match_rank(loads, jobs):
    """Assign ``jobs`` (largest first) to machines, lowest index wins ties.

    Returns ``machine -> job`` as a list.
    """
    machines = sorted(range(len(loads)), key=lambda i: (loads[i], i))
    out = [None] * len(loads)
    for i, j in zip(machines, jobs):
        out[i] = j
    return out


def _list_schedule(inst: Instance, rank_order) -> Schedule:
    m, k = inst.m, inst.k
    loads = [Fraction(0)] * m
    rows = [[None] * k for _ in range(m)]
    for r in rank_order:
        for i, j in enumerate(_match_rank(loads, inst.rank_jobs(r))):
            rows[i][r - 1] = j
            loads[i] += inst.p[j]
    return Schedule.flowtime_optimal(inst, rows)


def ld_schedule(inst: Instance, policy: TieBreakPolicy = TieBreakPolicy.LOWEST_INDEX, cap: int = 100_000):
    """LD schedule; a list of all tie resolutions under ``ENUMERATE_ALL``."""
    if policy is TieBreakPolicy.ENUMERATE_ALL:
        return ld_schedules(inst, cap)
    return _list_schedule(inst, range(1, inst.k + 1))


def li_schedule(inst: Instance) -> Schedule:
    return _list_schedule(inst, range(inst.k, 0, -1))


def _tie_resolutions(loads, jobs, p):
    """Every distinct way to hand ``jobs`` to machines when loads tie.

    Machines with equal loads form a group; the group receives a fixed set
    of jobs and any permutation of them is an LD choice.  Permutations that
    only swap equal processing times are skipped.
    """
    machines = sorted(range(len(loads)), key=lambda i: (loads[i], i))
    groups = [list(g) for _, g in itertools.groupby(machines, key=lambda i: loads[i])]
    per_group = []
    pos = 0
    for g in groups:
        chunk = list(jobs[pos: pos + len(g)])
        pos += len(g)
        options = []
        seen = set()
        for perm in itertools.permutations(chunk):
            key = tuple(p[j] for j in perm)
            if key in seen:
                continue
            seen.add(key)
            options.append(dict(zip(g, perm)))
        per_group.append(options)
    for combo in itertools.product(*per_group):
        out = [None] * len(loads)
        for part in combo:
            for i, j in part.items():
                out[i] = j
        yield out


def ld_schedules(inst: Instance, cap: int = 100_000) -> list[Schedule]:
    """All LD schedules obtained by resolving completion-time ties every way."""
    m, k = inst.m, inst.k
    frontier = [([Fraction(0)] * m, [[None] * k for _ in range(m)])]
    for r in range(1, k + 1):
        nxt = []
        for loads, rows in frontier:
            for match in _tie_resolutions(loads, list(inst.rank_jobs(r)), inst.p):
                new_rows = [row[:] for row in rows]
                new_loads = loads[:]
                for i, j in enumerate(match):
                    new_rows[i][r - 1] = j
                    new_loads[i] += inst.p[j]
                nxt.append((new_loads, new_rows))
                if len(nxt) > cap:
                    raise TieExplosion(cap)
        frontier = nxt
    out, seen = [], set()
    for _, rows in frontier:
        key = tuple(tuple(inst.p[j] for j in row) for row in rows)
        if key not in seen:
            seen.add(key)
            out.append(Schedule.flowtime_optimal(inst, rows))
    return out


def ld_profiles(inst: Instance) -> list[tuple[Fraction, ...]]:
    """Profile after each rank 1..k of the LD construction."""
    state = (Fraction(0),) * inst.m
    out = []
    for r in range(1, inst.k + 1):
        state = _next_profile(state, inst.rank(r))
        out.append(state)
    return out


def _next_profile(prof, rank_times):
    # prof is nonincreasing and rank_times nonincreasing: pair a_m with the largest job
    return profile(a + t for a, t in zip(reversed(prof), rank_times))


def worst_ld_makespan(inst: Instance, cap: int = 100_000) -> Fraction:
    """Largest makespan over every LD tie resolution.

    Branches are tracked as distinct profile states: machines with equal
    completion times are interchangeable, so two resolutions that reach the
    same sorted profile have identical futures.
    """
    states = {(Fraction(0),) * inst.m}
    for r in range(1, inst.k + 1):
        states = {_next_profile(s, inst.rank(r)) for s in states}
        if len(states) > cap:
            raise TieExplosion(cap)
    return max(s[0] for s in states)


def ld0_worst_makespan(inst: Instance) -> Fraction:
    """Closed-form makespan of the worst LD0 schedule.

    Rank 2 goes largest-first onto rank 1, which peaks at
    ``max_i tau(i,1) + tau(m-i+1,2)``; every later rank's largest job can
    then land on that peak machine.
    """
    m, k = inst.m, inst.k
    if k == 1:
        return inst.lam(1)
    peak = max(inst.tau(i, 1) + inst.tau(m - i + 1, 2) for i in range(1, m + 1))
    return peak + sum((inst.lam(r) for r in range(3, k + 1)), Fraction(0))


def ld0_worst_schedule(inst: Instance) -> Schedule:
    """An explicit LD0 schedule whose makespan equals :func:`ld0_worst_makespan`.

    Rank 1 in identity order, rank 2 largest-first, then each later rank's
    largest job on the machine that peaked after rank 2 and the rest in
    identity order on the other machines.
    """
    m, k = inst.m, inst.k
    rows = [[None] * k for _ in range(m)]
    for i, j in enumerate(inst.rank_jobs(1)):
        rows[i][0] = j
    if k == 1:
        return Schedule.flowtime_optimal(inst, rows)
    loads = [inst.p[j] for j in inst.rank_jobs(1)]
    for i, j in enumerate(_match_rank(loads, inst.rank_jobs(2))):
        rows[i][1] = j
        loads[i] += inst.p[j]
    peak = max(range(m), key=lambda i: (loads[i], -i))
    others = [i for i in range(m) if i != peak]
    for r in range(3, k + 1):
        jobs = list(inst.rank_jobs(r))
        rows[peak][r - 1] = jobs[0]
        for i, j in zip(others, jobs[1:]):
            rows[i][r - 1] = j
    return Schedule.flowtime_optimal(inst, rows)


def ld0_schedules(inst: Instance):
    """Yield every LD0 schedule: all rank-1 and rank-3+ placements.

    Exponential; meant for checking the closed form on tiny instances.
    """
    m, k = inst.m, inst.k
    perms = list(itertools.permutations(range(m)))
    for first in perms:
        rows = [[None] * k for _ in range(m)]
        ranks1 = list(inst.rank_jobs(1))
        for i, pos in enumerate(first):
            rows[i][0] = ranks1[pos]
        if k == 1:
            yield Schedule.flowtime_optimal(inst, rows)
            continue
        loads = [inst.p[rows[i][0]] for i in range(m)]
        for i, j in enumerate(_match_rank(loads, inst.rank_jobs(2))):
            rows[i][1] = j
        for rest in itertools.product(perms, repeat=k - 2):
            for r, perm in enumerate(rest, start=3):
                jobs = list(inst.rank_jobs(r))
                for i, pos in enumerate(perm):
                    rows[i][r - 1] = jobs[pos]
            yield Schedule.flowtime_optimal(inst, [row[:] for row in rows])
