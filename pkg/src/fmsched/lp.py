"""Small dense linear programs over the rationals.

Problems are ``max c.x + c0`` subject to rows ``a.x <= b`` or ``a.x == b``
with every variable nonnegative.  :func:`solve_lp` is a two-phase tableau
simplex with Bland's rule, so it terminates, and every answer it gives
comes with a certificate that :func:`verify_certificate` checks using
nothing but the original data:

* optimal: primal point and dual multipliers with equal objectives,
* infeasible: Farkas multipliers ``y`` with ``A^T y >= 0`` and ``b.y < 0``,
* unbounded: a feasible point and a ray ``d >= 0`` along which the
  objective grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .core import format_rational, parse_rational

LE = "<="
EQ = "=="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinExpr:
    """Affine expression: sorted ``(variable, coefficient)`` pairs plus a constant."""

    terms: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: Mapping[str, object] = (), const=0) -> "LinExpr":
        acc: dict[str, Fraction] = {}
        for name, c in dict(coeffs).items():
            c = Fraction(c)
            if c:
                acc[name] = acc.get(name, Fraction(0)) + c
        return LinExpr(tuple(sorted((v, c) for v, c in acc.items() if c)), Fraction(const))

    @staticmethod
    def var(name: str) -> "LinExpr":
        return LinExpr(((name, Fraction(1)),))

    @staticmethod
    def lift(x) -> "LinExpr":
        return x if isinstance(x, LinExpr) else LinExpr((), Fraction(x))

    def coeffs(self) -> dict[str, Fraction]:
        return dict(self.terms)

    def variables(self) -> set[str]:
        return {v for v, _ in self.terms}

    def __add__(self, other) -> "LinExpr":
        other = LinExpr.lift(other)
        acc = self.coeffs()
        for v, c in other.terms:
            acc[v] = acc.get(v, Fraction(0)) + c
        return LinExpr(tuple(sorted((v, c) for v, c in acc.items() if c)), self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr(tuple((v, -c) for v, c in self.terms), -self.const)

    def __sub__(self, other) -> "LinExpr":
        return self + (-LinExpr.lift(other))

    def __rsub__(self, other) -> "LinExpr":
        return LinExpr.lift(other) - self

    def __mul__(self, k) -> "LinExpr":
        k = Fraction(k)
        if not k:
            return LinExpr()
        return LinExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    __rmul__ = __mul__

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        return self.const + sum((c * values[v] for v, c in self.terms), Fraction(0))

    def substitute(self, mapping: Mapping[str, "LinExpr"]) -> "LinExpr":
        out = LinExpr((), self.const)
        for v, c in self.terms:
            out = out + (mapping[v] if v in mapping else LinExpr.var(v)) * c
        return out

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{c}*{v}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self) -> dict:
        return {"terms": {v: format_rational(c) for v, c in self.terms}, "constant": format_rational(self.const)}

    @staticmethod
    def from_json(data) -> "LinExpr":
        return LinExpr.build({v: parse_rational(c) for v, c in data["terms"].items()},
                             parse_rational(data.get("constant", 0)))


@dataclass(frozen=True)
class Constraint:
    """``lhs rel rhs`` with a constant-free ``lhs``."""

    lhs: LinExpr
    rel: str
    rhs: Fraction
    label: str = ""

    def __post_init__(self):
        if self.rel not in (LE, EQ):
            raise ValueError(f"relation must be {LE!r} or {EQ!r}, got {self.rel!r}")
        if self.lhs.const:
            raise ValueError("constraint lhs must not carry a constant")

    def holds(self, values: Mapping[str, Fraction]) -> bool:
        v = self.lhs.evaluate(values)
        return v <= self.rhs if self.rel == LE else v == self.rhs

    def __str__(self) -> str:
        rel = "<=" if self.rel == LE else "="
        return f"{self.lhs} {rel} {self.rhs}"

    def to_json(self) -> dict:
        return {"terms": self.lhs.to_json()["terms"], "rel": self.rel,
                "rhs": format_rational(self.rhs), "label": self.label}

    @staticmethod
    def from_json(data) -> "Constraint":
        return Constraint(LinExpr.from_json({"terms": data["terms"]}), data["rel"],
                          parse_rational(data["rhs"]), data.get("label", ""))


def _relation(a, b, rel, label):
    diff = LinExpr.lift(a) - LinExpr.lift(b)
    return Constraint(LinExpr(diff.terms), rel, -diff.const, label)


def le(a, b, label: str = "") -> Constraint:
    """``a <= b``."""
    return _relation(a, b, LE, label)


def ge(a, b, label: str = "") -> Constraint:
    """``a >= b``, stored as ``b - a <= 0``."""
    return _relation(b, a, LE, label)


def eq(a, b, label: str = "") -> Constraint:
    return _relation(a, b, EQ, label)


@dataclass(frozen=True)
class LpProblem:
    variables: tuple[str, ...]
    objective: LinExpr
    constraints: tuple[Constraint, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.variables:
            raise ValueError("an LP needs at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        known = set(self.variables)
        for expr in [self.objective] + [c.lhs for c in self.constraints]:
            stray = expr.variables() - known
            if stray:
                raise ValueError(f"undeclared variables {sorted(stray)}")

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "variables": list(self.variables),
            "objective": self.objective.to_json(),
            "constraints": [c.to_json() for c in self.constraints],
        }

    @staticmethod
    def from_json(data) -> "LpProblem":
        return LpProblem(tuple(data["variables"]), LinExpr.from_json(data["objective"]),
                         tuple(Constraint.from_json(c) for c in data["constraints"]), data.get("label", ""))


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome.

    ``dual`` holds one multiplier per constraint: the optimal dual solution
    when optimal, Farkas multipliers when infeasible.  ``ray`` is set only
    when unbounded.
    """

    status: str
    x: Mapping[str, Fraction] = field(default_factory=dict)
    value: Fraction | None = None
    dual: tuple[Fraction, ...] = ()
    ray: Mapping[str, Fraction] = field(default_factory=dict)
    pivots: int = 0

    def to_json(self) -> dict:
        out = {"status": self.status, "pivots": self.pivots}
        if self.x:
            out["x"] = {v: format_rational(q) for v, q in self.x.items()}
        if self.value is not None:
            out["value"] = format_rational(self.value)
        if self.dual:
            out["dual"] = [format_rational(q) for q in self.dual]
        if self.ray:
            out["ray"] = {v: format_rational(q) for v, q in self.ray.items()}
        return out

    @staticmethod
    def from_json(data) -> "LpSolution":
        return LpSolution(
            data["status"],
            {v: parse_rational(q) for v, q in data.get("x", {}).items()},
            parse_rational(data["value"]) if "value" in data else None,
            tuple(parse_rational(q) for q in data.get("dual", [])),
            {v: parse_rational(q) for v, q in data.get("ray", {}).items()},
            data.get("pivots", 0),
        )


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.T = [row + [b] for row, b in zip(rows, rhs)]
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def reduced_costs(self, cost):
        r = list(cost) + [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                row = self.T[i]
                for j in range(self.ncols + 1):
                    if row[j]:
                        r[j] -= cb * row[j]
        return r

    def pivot(self, i, j, r):
        T = self.T
        prow = T[i]
        piv = prow[j]
        if piv != 1:
            prow[:] = [v / piv for v in prow]
        for t, row in enumerate(T):
            if t != i and row[j]:
                f = row[j]
                row[:] = [a - f * b if b else a for a, b in zip(row, prow)]
        if r[j]:
            f = r[j]
            r[:] = [a - f * b if b else a for a, b in zip(r, prow)]
        self.basis[i] = j
        self.pivots += 1

    def run(self, r, allowed):
        """Bland's rule; returns the blocked entering column if unbounded."""
        while True:
            enter = next((j for j in range(self.ncols) if allowed[j] and r[j] > 0), None)
            if enter is None:
                return None
            leave, best = None, None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        leave, best = i, ratio
            if leave is None:
                return enter
            self.pivot(leave, enter, r)


def solve_lp(problem: LpProblem) -> LpSolution:
    names = problem.variables
    n = len(names)
    index = {v: j for j, v in enumerate(names)}
    cons = problem.constraints
    nrows = len(cons)

    rows, rhs, signs = [], [], []
    for c in cons:
        a = [Fraction(0)] * n
        for v, coef in c.lhs.terms:
            a[index[v]] = coef
        s = -1 if c.rhs < 0 else 1
        rows.append([s * x for x in a])
        rhs.append(s * c.rhs)
        signs.append(s)

    # slack/surplus columns for inequality rows, then artificials
    ncols = n
    slack_col = {}
    for i, c in enumerate(cons):
        if c.rel == LE:
            slack_col[i] = ncols
            ncols += 1
    art_col = {}
    for i, c in enumerate(cons):
        if c.rel == EQ or signs[i] < 0:
            art_col[i] = ncols
            ncols += 1

    full = []
    basis = []
    ident = []
    for i in range(nrows):
        row = rows[i] + [Fraction(0)] * (ncols - n)
        if i in slack_col:
            row[slack_col[i]] = Fraction(signs[i])
        if i in art_col:
            row[art_col[i]] = Fraction(1)
            basis.append(art_col[i])
        else:
            basis.append(slack_col[i])
        ident.append(basis[-1])
        full.append(row)

    tab = _Tableau(full, rhs, basis, ncols)
    is_art = [False] * ncols
    for col in art_col.values():
        is_art[col] = True

    def multipliers(cost, r):
        # w = c_B B^-1 read off each row's initial identity column
        return tuple(signs[i] * (cost[ident[i]] - r[ident[i]]) for i in range(nrows))

    if art_col:
        cost1 = [Fraction(-1) if is_art[j] else Fraction(0) for j in range(ncols)]
        r1 = tab.reduced_costs(cost1)
        tab.run(r1, [True] * ncols)
        if r1[-1] != 0:
            # phase-1 optimum -sum(artificials) < 0
            return LpSolution(INFEASIBLE, dual=multipliers(cost1, r1), pivots=tab.pivots)
        for i in range(nrows):
            if is_art[tab.basis[i]]:
                j = next((j for j in range(ncols) if not is_art[j] and tab.T[i][j] != 0), None)
                if j is not None:
                    tab.pivot(i, j, r1)

    cost2 = [Fraction(0)] * ncols
    for v, coef in problem.objective.terms:
        cost2[index[v]] = coef
    r2 = tab.reduced_costs(cost2)
    blocked = tab.run(r2, [not a for a in is_art])

    x = {v: Fraction(0) for v in names}
    for i, b in enumerate(tab.basis):
        if b < n:
            x[names[b]] = tab.T[i][-1]
    if blocked is not None:
        ray = {v: Fraction(0) for v in names}
        if blocked < n:
            ray[names[blocked]] = Fraction(1)
        for i, b in enumerate(tab.basis):
            if b < n:
                ray[names[b]] = -tab.T[i][blocked]
        return LpSolution(UNBOUNDED, x=x, ray=ray, pivots=tab.pivots)
    value = problem.objective.evaluate(x)
    return LpSolution(OPTIMAL, x=x, value=value, dual=multipliers(cost2, r2), pivots=tab.pivots)


def _primal_feasible(problem: LpProblem, x) -> bool:
    if set(x) != set(problem.variables) or any(x[v] < 0 for v in problem.variables):
        return False
    return all(c.holds(x) for c in problem.constraints)


def _dual_columns(problem: LpProblem, y):
    """``A^T y`` as a dict over variables."""
    col = {v: Fraction(0) for v in problem.variables}
    for yi, c in zip(y, problem.constraints):
        if yi:
            for v, a in c.lhs.terms:
                col[v] += yi * a
    return col


def _signs_ok(problem: LpProblem, y) -> bool:
    return len(y) == len(problem.constraints) and all(
        yi >= 0 for yi, c in zip(y, problem.constraints) if c.rel == LE)


def verify_certificate(problem: LpProblem, sol: LpSolution) -> bool:
    """Re-check a solution from the problem data alone, exactly."""
    if sol.status == OPTIMAL:
        if sol.value is None or not _primal_feasible(problem, sol.x):
            return False
        y = sol.dual
        if not _signs_ok(problem, y):
            return False
        col = _dual_columns(problem, y)
        c = problem.objective.coeffs()
        if any(col[v] < c.get(v, 0) for v in problem.variables):
            return False
        primal = problem.objective.evaluate(sol.x)
        dual = sum((yi * con.rhs for yi, con in zip(y, problem.constraints)), Fraction(0)) + problem.objective.const
        return primal == dual == sol.value
    if sol.status == INFEASIBLE:
        y = sol.dual
        if not _signs_ok(problem, y):
            return False
        col = _dual_columns(problem, y)
        if any(col[v] < 0 for v in problem.variables):
            return False
        return sum((yi * con.rhs for yi, con in zip(y, problem.constraints)), Fraction(0)) < 0
    if sol.status == UNBOUNDED:
        if not _primal_feasible(problem, sol.x):
            return False
        d = sol.ray
        if set(d) != set(problem.variables) or any(d[v] < 0 for v in problem.variables):
            return False
        for c in problem.constraints:
            g = c.lhs.evaluate(d)
            if (c.rel == LE and g > 0) or (c.rel == EQ and g != 0):
                return False
        return LinExpr(problem.objective.terms).evaluate(d) > 0
    return False
