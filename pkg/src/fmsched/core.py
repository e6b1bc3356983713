"""Instances, ranks, flowtime-optimal schedules and their validator.

All times are :class:`fractions.Fraction`; nothing in the package rounds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class InvalidInstance(ValueError):
    """Raised for malformed instance data (negative times, bad m, ...)."""


def parse_rational(value) -> Fraction:
    """Parse an int, a Fraction or an ``"a/b"`` string exactly.

    Floats are refused: a binary float rarely means what the user typed.
    """
    if isinstance(value, bool):
        raise InvalidInstance(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInstance(f"not a rational: {value!r}") from exc
    raise InvalidInstance(f"not a rational: {value!r} (use an int or an 'a/b' string)")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def profile(times: Iterable[Fraction]) -> tuple[Fraction, ...]:
    """Sorted (nonincreasing) completion times of the machines."""
    return tuple(sorted(times, reverse=True))


@dataclass(frozen=True)
class Instance:
    """``m`` machines and ``n = m*k`` processing times sorted nonincreasing.

    Rank ``r`` (1-based) owns the jobs at 0-based positions ``(r-1)*m .. r*m-1``.
    ``origin[j]`` is the index of sorted job ``j`` in the raw input it was
    normalized from (padding jobs get indices past the end of the input).
    """

    m: int
    p: tuple[Fraction, ...]
    origin: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise InvalidInstance(f"machine count must be an integer >= 1, got {self.m!r}")
        p = tuple(Fraction(x) for x in self.p)
        object.__setattr__(self, "p", p)
        if not p:
            raise InvalidInstance("instance has no jobs")
        if len(p) % self.m:
            raise InvalidInstance(f"{len(p)} jobs is not a multiple of m={self.m}")
        if any(x < 0 for x in p):
            raise InvalidInstance("negative processing time")
        if any(p[j] < p[j + 1] for j in range(len(p) - 1)):
            raise InvalidInstance("processing times must be sorted nonincreasing")
        if not self.origin:
            object.__setattr__(self, "origin", tuple(range(len(p))))
        elif len(self.origin) != len(p):
            raise InvalidInstance("origin must have one entry per job")

    @property
    def n(self) -> int:
        return len(self.p)

    @property
    def k(self) -> int:
        return len(self.p) // self.m

    def rank_jobs(self, r: int) -> range:
        """Job positions of rank ``r`` (1-based), largest first."""
        if not 1 <= r <= self.k:
            raise IndexError(f"rank {r} out of 1..{self.k}")
        return range((r - 1) * self.m, r * self.m)

    def rank(self, r: int) -> tuple[Fraction, ...]:
        return self.p[(r - 1) * self.m: r * self.m]

    def rank_of(self, job: int) -> int:
        return job // self.m + 1

    def lam(self, r: int) -> Fraction:
        """Largest processing time in rank ``r``."""
        return self.p[(r - 1) * self.m]

    def mu(self, r: int) -> Fraction:
        """Smallest processing time in rank ``r``."""
        return self.p[r * self.m - 1]

    def tau(self, i: int, r: int) -> Fraction:
        """``i``-th largest processing time in rank ``r`` (both 1-based)."""
        if not 1 <= i <= self.m:
            raise IndexError(f"position {i} out of 1..{self.m}")
        return self.p[(r - 1) * self.m + i - 1]

    def total(self) -> Fraction:
        return sum(self.p, Fraction(0))

    def scaled(self, c) -> "Instance":
        c = Fraction(c)
        if c <= 0:
            raise InvalidInstance("scale factor must be positive")
        return Instance(self.m, tuple(c * x for x in self.p))

    def with_zero_rank(self) -> "Instance":
        """The same jobs plus one extra rank of ``m`` zero-time jobs."""
        return Instance(self.m, self.p + (Fraction(0),) * self.m)

    def to_json(self) -> dict:
        return {"m": self.m, "p": [format_rational(x) for x in self.p]}

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        try:
            m, raw = data["m"], data["p"]
        except (KeyError, TypeError) as exc:
            raise InvalidInstance('instance JSON needs "m" and "p"') from exc
        if not isinstance(m, int) or isinstance(m, bool):
            raise InvalidInstance(f'"m" must be an integer, got {m!r}')
        if not isinstance(raw, list):
            raise InvalidInstance('"p" must be a list')
        return normalize_instance([parse_rational(x) for x in raw], m)


def load_instance(path) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidInstance(f"{path}: {exc}") from exc
    return Instance.from_json(data)


def normalize_instance(raw: Sequence, m: int) -> Instance:
    """Pad with zero-time jobs to a multiple of ``m`` and sort nonincreasing.

    The sort is stable, so equal times keep their input order.
    """
    if not isinstance(m, int) or m < 1:
        raise InvalidInstance(f"machine count must be an integer >= 1, got {m!r}")
    times = [parse_rational(x) for x in raw]
    if not times:
        raise InvalidInstance("instance has no jobs")
    if any(x < 0 for x in times):
        raise InvalidInstance("negative processing time")
    times += [Fraction(0)] * (-len(times) % m)
    order = sorted(range(len(times)), key=lambda j: times[j], reverse=True)
    return Instance(m, tuple(times[j] for j in order), tuple(order))


def apply_property2(inst: Instance) -> Instance:
    """Shift every rank down so that ``mu_r == lam_{r+1}`` and ``mu_k == 0``.

    Works from the last rank upward: rank ``k`` loses ``mu_k``, then each
    rank ``r`` loses ``mu_r - lam_{r+1}`` measured against the already
    shifted rank below it.
    """
    m, k = inst.m, inst.k
    ranks = [list(inst.rank(r)) for r in range(1, k + 1)]
    floor = Fraction(0)
    for r in range(k - 1, -1, -1):
        shift = ranks[r][-1] - floor
        ranks[r] = [x - shift for x in ranks[r]]
        floor = ranks[r][0]
    return Instance(m, tuple(x for rank in ranks for x in rank))


@dataclass(frozen=True)
class Schedule:
    """Per-machine job assignment with explicit start times.

    ``assignment[i][r-1]`` is the job position machine ``i`` runs in rank
    ``r``; ``starts`` has the same shape.  Use :meth:`flowtime_optimal` to
    build the left-justified, rank-``k``-first schedule of an assignment.
    """

    instance: Instance
    assignment: tuple[tuple[int, ...], ...]
    starts: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        m, k = self.instance.m, self.instance.k
        if len(self.assignment) != m or any(len(row) != k for row in self.assignment):
            raise ValueError(f"assignment must be {m} machines x {k} ranks")
        if len(self.starts) != m or any(len(row) != k for row in self.starts):
            raise ValueError("starts must have the same shape as assignment")

    @classmethod
    def flowtime_optimal(cls, inst: Instance, assignment) -> "Schedule":
        """Run each machine's jobs rank ``k`` first, back to back from time 0."""
        assignment = tuple(tuple(row) for row in assignment)
        starts = []
        for row in assignment:
            t = Fraction(0)
            row_starts = [Fraction(0)] * len(row)
            for r in range(len(row) - 1, -1, -1):
                row_starts[r] = t
                t += inst.p[row[r]]
            starts.append(tuple(row_starts))
        return cls(inst, assignment, tuple(starts))

    def completion(self, i: int, r: int) -> Fraction:
        """Completion time of machine ``i``'s rank-``r`` job (``r`` 1-based)."""
        return self.starts[i][r - 1] + self.instance.p[self.assignment[i][r - 1]]

    def machine_completion(self, i: int) -> Fraction:
        k = self.instance.k
        return max(self.completion(i, r) for r in range(1, k + 1))

    def machine_times(self, i: int) -> tuple[Fraction, ...]:
        """Processing times on machine ``i`` in rank order 1..k."""
        return tuple(self.instance.p[j] for j in self.assignment[i])

    def loads(self) -> tuple[Fraction, ...]:
        return tuple(sum(self.machine_times(i), Fraction(0)) for i in range(self.instance.m))

    def to_json(self) -> dict:
        inst = self.instance
        return {
            "m": inst.m,
            "k": inst.k,
            "machines": [
                {
                    "jobs": [
                        {
                            "job": j,
                            "rank": r + 1,
                            "p": format_rational(inst.p[j]),
                            "start": format_rational(self.starts[i][r]),
                            "end": format_rational(self.starts[i][r] + inst.p[j]),
                        }
                        for r, j in reversed(list(enumerate(row)))
                    ],
                }
                for i, row in enumerate(self.assignment)
            ],
            "makespan": format_rational(makespan(self)),
            "flowtime": format_rational(total_flowtime(self)),
        }


def makespan(s: Schedule) -> Fraction:
    return max(
        (s.completion(i, r) for i in range(s.instance.m) for r in range(1, s.instance.k + 1)),
        default=Fraction(0),
    )


def total_flowtime(s: Schedule) -> Fraction:
    return sum(
        (s.completion(i, r) for i in range(s.instance.m) for r in range(1, s.instance.k + 1)),
        Fraction(0),
    )


def is_flowtime_optimal(s: Schedule) -> bool:
    inst = s.instance
    m, k = inst.m, inst.k
    seen = sorted(j for row in s.assignment for j in row)
    if seen != list(range(inst.n)):
        return False
    # slot r must hold rank r's times; equal times may trade places across ranks
    for r in range(1, k + 1):
        if profile(inst.p[s.assignment[i][r - 1]] for i in range(m)) != inst.rank(r):
            return False
    for i in range(m):
        if s.starts[i][k - 1] != 0:
            return False
        # no idle time, rank r+1 immediately before rank r
        for r in range(1, k):
            if s.starts[i][r - 1] != s.completion(i, r + 1):
                return False
    for r in range(1, k):
        latest_lower = max(s.starts[i][r] for i in range(m))
        earliest_upper = min(s.starts[i][r - 1] for i in range(m))
        if latest_lower > earliest_upper:
            return False
    return True
