"""Instance generators and the exhaustive counterexample hunt."""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .algorithms import ld0_worst_makespan, li_schedule, worst_ld_makespan
from .core import Instance, format_rational, makespan, normalize_instance
from .oracle import OracleBudgetExceeded, optimal_fm_makespan


def ld_ratio_bound(m: int) -> Fraction:
    return Fraction(5 * m - 2, 4 * m - 1)


def li_ratio_bound(m: int) -> Fraction:
    return Fraction(5 * m - 4, 4 * m - 3)


def tight_family(m: int) -> Instance:
    """Three-rank instance on which LD is off by exactly (5m-2)/(4m-1)."""
    if m < 2:
        raise ValueError("tight family needs m >= 2")
    p = []
    for j in range(1, 3 * m + 1):
        if j < m:
            p.append(0)
        elif j == m:
            p.append(m)
        elif j <= 2 * m:
            p.append(j - 1)
        else:
            p.append(j - 2)
    return normalize_instance(p, m)


def ld0_family(m: int) -> Instance:
    """Three-rank instance where the worst LD0 schedule is 4/3 of optimal."""
    if m < 2:
        raise ValueError("LD0 family needs m >= 2")
    p = [2] * (m - 1) + [1] * (m + 2) + [0] * (m - 1)
    return normalize_instance(p, m)


def _nonincreasing(length: int, hi: int, lo: int) -> Iterator[tuple[int, ...]]:
    """Nonincreasing integer tuples with entries in ``[lo, hi]``."""
    if length == 0:
        yield ()
        return
    for first in range(hi, lo - 1, -1):
        for rest in _nonincreasing(length - 1, first, lo):
            yield (first,) + rest


def enumerate_instances(m: int, k: int, lmax: int, canonical: bool = False,
                        start: int = 0, stop: int | None = None) -> Iterator[Instance]:
    """Integer instances with ``n = m*k``, ``mu_r = lam_{r+1}``, ``mu_k = 0``, ``lam_1 <= lmax``.

    The order is deterministic, so ``start``/``stop`` split the stream into
    independent index ranges.  ``canonical`` keeps only instances whose
    nonzero times have gcd 1 (plus the all-zero instance), since scaling
    does not change any ratio.
    """
    if m < 1 or k < 1 or lmax < 0:
        raise ValueError("need m >= 1, k >= 1, lmax >= 0")

    def raw():
        if m == 1:
            # every rank is a single job equal to the next rank's, ending at 0
            yield (0,) * k
            return
        for lams in _nonincreasing(k, lmax, 0):
            bounds = list(lams) + [0]
            mids = [_nonincreasing(m - 2, bounds[r], bounds[r + 1]) for r in range(k)]
            for choice in itertools.product(*(list(x) for x in mids)):
                p = []
                for r in range(k):
                    p.append(bounds[r])
                    p.extend(choice[r])
                    p.append(bounds[r + 1])
                yield tuple(p)

    def keep(p):
        if not canonical:
            return True
        g = 0
        for x in p:
            g = math.gcd(g, x)
        return g <= 1

    stream = (p for p in raw() if keep(p))
    for p in itertools.islice(stream, start, stop):
        yield Instance(m, tuple(Fraction(x) for x in p))


OK = "ok"
VIOLATION = "violation"
UNRESOLVED = "unresolved"
NON_MINIMAL = "non-minimal"


@dataclass(frozen=True)
class HuntRow:
    index: int
    instance: Instance
    t_ld: Fraction
    t_opt: Fraction | None
    ratio: Fraction | None
    status: str
    lower: Fraction | None = None

    def key(self):
        return tuple(self.instance.p)


@dataclass
class HuntReport:
    m: int
    k: int
    lmax: int
    bound: Fraction
    rows: list[HuntRow] = field(default_factory=list)
    max_ratio: Fraction | None = None
    argmax: list[HuntRow] = field(default_factory=list)
    disclaimer: str = ""

    @property
    def checked(self) -> int:
        return len(self.rows)

    @property
    def violations(self) -> list[HuntRow]:
        return [r for r in self.rows if r.ratio is not None and r.ratio > self.bound]

    @property
    def unresolved(self) -> list[HuntRow]:
        return [r for r in self.rows if r.status == UNRESOLVED]

    def exit_code(self) -> int:
        if self.violations:
            return 1
        if self.unresolved:
            return 3
        return 0

    def summary(self) -> str:
        mr = "none" if self.max_ratio is None else format_rational(self.max_ratio)
        verdict = {0: "no violation", 1: "VIOLATION", 3: "UNRESOLVED instances"}[self.exit_code()]
        lines = [f"hunt m={self.m} k={self.k} lmax={self.lmax} bound={format_rational(self.bound)}: "
                 f"{self.checked} instances, max ratio {mr}, {verdict}"]
        for row in self.argmax[:5]:
            lines.append("  argmax p=" + ";".join(format_rational(x) for x in row.instance.p))
        if len(self.argmax) > 5:
            lines.append(f"  ... {len(self.argmax) - 5} more argmax instances (see the CSV report)")
        if self.disclaimer:
            lines.append(self.disclaimer)
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance-id", "m", "k", "p", "t_LD_worst", "t_opt", "ratio_num", "ratio_den", "status"])
            for r in self.rows:
                w.writerow([
                    r.index, r.instance.m, r.instance.k,
                    ";".join(format_rational(x) for x in r.instance.p),
                    format_rational(r.t_ld),
                    "" if r.t_opt is None else format_rational(r.t_opt),
                    "" if r.ratio is None else r.ratio.numerator,
                    "" if r.ratio is None else r.ratio.denominator,
                    r.status,
                ])


def read_csv(path) -> list[dict]:
    """Parse a hunt CSV back into exact values."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            out.append({
                "instance-id": int(rec["instance-id"]),
                "m": int(rec["m"]),
                "k": int(rec["k"]),
                "p": [Fraction(x) for x in rec["p"].split(";")],
                "t_LD_worst": Fraction(rec["t_LD_worst"]),
                "t_opt": Fraction(rec["t_opt"]) if rec["t_opt"] else None,
                "ratio": Fraction(int(rec["ratio_num"]), int(rec["ratio_den"])) if rec["ratio_num"] else None,
                "status": rec["status"],
            })
    return out


def _examine(inst: Instance, index: int, bound: Fraction, filter_kk1: bool, budget: int,
             algorithm: str = "ld") -> HuntRow:
    if algorithm == "ld":
        t_alg = worst_ld_makespan(inst)
    elif algorithm == "li":
        t_alg = makespan(li_schedule(inst))
    elif algorithm == "ld0":
        t_alg = ld0_worst_makespan(inst)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    try:
        t_opt = optimal_fm_makespan(inst, budget=budget).makespan
    except OracleBudgetExceeded as exc:
        return HuntRow(index, inst, t_alg, None, None, UNRESOLVED, exc.lower)
    ratio = Fraction(1) if t_opt == 0 else t_alg / t_opt
    k = inst.k
    if ratio > bound:
        status = VIOLATION
    elif filter_kk1 and k > 1 and ratio >= Fraction(k, k - 1):
        status = NON_MINIMAL
    else:
        status = OK
    return HuntRow(index, inst, t_alg, t_opt, ratio, status)


def _hunt_range(m, k, lmax, bound, filter_kk1, budget, canonical, algorithm, start, stop):
    return [
        _examine(inst, idx, bound, filter_kk1, budget, algorithm)
        for idx, inst in enumerate(enumerate_instances(m, k, lmax, canonical, start, stop), start=start)
    ]


def hunt(m: int, k: int, lmax: int, bound=None, filter_kk1: bool = False, jobs: int = 1,
         budget: int = 10**6, canonical: bool = True, algorithm: str = "ld") -> HuntReport:
    """Compute the exact ratio of every enumerated instance and report the worst.

    ``filter_kk1`` tags instances with ratio at least ``k/(k-1)`` as
    non-minimal; they stay in the report and still count as violations if
    they beat ``bound``.  Instances the oracle cannot settle within
    ``budget`` nodes are reported as unresolved, never dropped.
    """
    if bound is None:
        bound = ld_ratio_bound(m) if algorithm == "ld" else (
            li_ratio_bound(m) if algorithm == "li" else Fraction(4, 3))
    bound = Fraction(bound)
    if jobs <= 1:
        rows = _hunt_range(m, k, lmax, bound, filter_kk1, budget, canonical, algorithm, 0, None)
    else:
        total = sum(1 for _ in enumerate_instances(m, k, lmax, canonical))
        step = -(-total // jobs) or 1
        spans = [(s, min(s + step, total)) for s in range(0, total, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_hunt_range, m, k, lmax, bound, filter_kk1, budget, canonical, algorithm, s, e)
                       for s, e in spans]
            rows = [row for f in futures for row in f.result()]
    report = HuntReport(m, k, lmax, bound, rows)
    resolved = [r for r in rows if r.ratio is not None]
    if resolved:
        report.max_ratio = max(r.ratio for r in resolved)
        report.argmax = sorted((r for r in resolved if r.ratio == report.max_ratio), key=HuntRow.key)
    if m >= 4 and k in (4, 5):
        report.disclaimer = (f"coverage note: (m={m}, k={k}) is an open case; this hunt checked integer "
                             f"instances with lam_1 <= {lmax} only and is evidence, not a proof")
    return report
