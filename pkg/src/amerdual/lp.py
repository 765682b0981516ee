"""Two-phase dense simplex over exact rationals or floats.

Every price and dual value in the package reduces to a linear program solved
here.  The solver is deliberately plain: dense tableau, Bland's lowest-index
rule for both the entering and the leaving choice, so runs are deterministic
and cycling is impossible even on degenerate instances.  Problems stay small
(at most a few thousand variables), so no sparsity, no factorizations, no
warm starts, and no presolve beyond dropping identically-zero rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MalformedProblem, NumericalFailure
from .scalar import EPS, FLOAT, RATIONAL, one, to_scalar, zero

MIN = "min"
MAX = "max"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LpProblem:
    """min/max  objective . x  subject to eq_rows, ub_rows and variable bounds.

    ``eq_rows`` entries are (coeffs, rhs) with coeffs . x == rhs, ``ub_rows``
    entries mean coeffs . x <= rhs.  ``bounds[j] = (lo, hi)`` with ``None``
    for an unbounded side; variables default to free.
    """

    sense: str
    objective: list
    eq_rows: list = field(default_factory=list)
    ub_rows: list = field(default_factory=list)
    bounds: list | None = None
    mode: str = RATIONAL


@dataclass
class LpSolution:
    status: str
    x: list | None = None
    objective_value: object = None


def solve(problem: LpProblem, mode: str | None = None) -> LpSolution:
    """Solve to a vertex optimum, or report infeasible/unbounded.

    Deterministic for a fixed input (Bland pivoting).  In float mode the
    returned vertex is re-checked against every constraint at tolerance EPS
    and NumericalFailure is raised if pivoting degraded it.
    """
    mode = mode or problem.mode
    c, eqs, ubs, bounds = _prepare(problem, mode)
    flip = problem.sense == MAX
    cmin = [-v for v in c] if flip else c
    built = _to_standard(cmin, eqs, ubs, bounds, mode)
    if built is None:
        return LpSolution(INFEASIBLE)
    A, b, cstd, parts, offsets = built
    status, y = _two_phase(A, b, cstd, mode)
    if status != OPTIMAL:
        return LpSolution(status)
    x = list(offsets)
    for j, cols in enumerate(parts):
        for col, sign in cols:
            x[j] = x[j] + sign * y[col]
    _check_solution(x, eqs, ubs, bounds, mode)
    obj = zero(mode)
    for cj, xj in zip(c, x):
        obj += cj * xj
    return LpSolution(OPTIMAL, x=x, objective_value=obj)


def check_feasible(problem: LpProblem, mode: str | None = None):
    """Phase-1 feasibility probe: (True, witness) or (False, None)."""
    mode = mode or problem.mode
    neutral = LpProblem(
        MIN,
        [zero(mode)] * len(problem.objective),
        problem.eq_rows,
        problem.ub_rows,
        problem.bounds,
        mode,
    )
    sol = solve(neutral, mode)
    if sol.status == OPTIMAL:
        return True, sol.x
    return False, None


# ---------------------------------------------------------------------------
# validation / canonicalisation


def _finite(v) -> bool:
    return not (isinstance(v, float) and not math.isfinite(v))


def _prepare(problem, mode):
    if problem.sense not in (MIN, MAX):
        raise MalformedProblem(f"unknown sense {problem.sense!r}")
    n = len(problem.objective)
    c = [to_scalar(v, mode) for v in problem.objective]
    if not all(_finite(v) for v in c):
        raise MalformedProblem("objective coefficients must be finite")

    def _rows(rows, kind):
        out = []
        for coeffs, rhs in rows:
            if len(coeffs) != n:
                raise MalformedProblem(
                    f"{kind} row has {len(coeffs)} coefficients, expected {n}"
                )
            if isinstance(rhs, float) and math.isinf(rhs):
                if kind == "ub" and rhs > 0:
                    continue  # vacuous row
                raise MalformedProblem(f"{kind} row has rhs {rhs}")
            row = [to_scalar(v, mode) for v in coeffs]
            if not all(_finite(v) for v in row):
                raise MalformedProblem(f"{kind} row has non-finite coefficients")
            out.append((row, to_scalar(rhs, mode)))
        return out

    eqs = _rows(problem.eq_rows, "eq")
    ubs = _rows(problem.ub_rows, "ub")
    if problem.bounds is None:
        bounds = [(None, None)] * n
    else:
        if len(problem.bounds) != n:
            raise MalformedProblem("bounds length does not match objective")
        bounds = []
        for lo, hi in problem.bounds:
            lo = None if lo is None else to_scalar(lo, mode)
            hi = None if hi is None else to_scalar(hi, mode)
            bounds.append((lo, hi))
    return c, eqs, ubs, bounds


def _to_standard(c, eqs, ubs, bounds, mode):
    """Rewrite as  min cstd.y, A y = b, y >= 0.  None means trivially infeasible."""
    zr = zero(mode)
    on = one(mode)
    tol = zr if mode == RATIONAL else EPS
    n = len(c)

    parts = []  # per original variable: [(column, sign), ...]
    offsets = []
    bound_rows = []  # extra rows u <= hi - lo for doubly bounded variables
    ncols = 0
    for j, (lo, hi) in enumerate(bounds):
        if lo is None and hi is None:
            parts.append([(ncols, on), (ncols + 1, -on)])
            offsets.append(zr)
            ncols += 2
        elif hi is None:
            parts.append([(ncols, on)])
            offsets.append(lo)
            ncols += 1
        elif lo is None:
            parts.append([(ncols, -on)])
            offsets.append(hi)
            ncols += 1
        elif lo > hi + tol:
            return None
        elif abs(hi - lo) <= tol:
            parts.append([])  # fixed variable
            offsets.append(lo)
        else:
            parts.append([(ncols, on)])
            offsets.append(lo)
            width = [zr] * n
            width[j] = on
            bound_rows.append((width, hi))
            ncols += 1

    def _std_row(coeffs, rhs):
        row = [zr] * ncols
        shifted = rhs
        for j, a in enumerate(coeffs):
            if a == zr:
                continue
            shifted -= a * offsets[j]
            for col, sign in parts[j]:
                row[col] += a * sign
        return row, shifted

    def _is_zero_row(row):
        return all(abs(v) <= tol for v in row)

    std_eq, std_ub = [], []
    for coeffs, rhs in eqs:
        row, rr = _std_row(coeffs, rhs)
        if _is_zero_row(row):
            if abs(rr) > tol:
                return None
            continue  # identically-zero row removed
        std_eq.append((row, rr))
    for coeffs, rhs in list(ubs) + bound_rows:
        row, rr = _std_row(coeffs, rhs)
        if _is_zero_row(row):
            if rr < -tol:
                return None
            continue
        std_ub.append((row, rr))

    nslack = len(std_ub)
    A, b = [], []
    for row, rr in std_eq:
        A.append(row + [zr] * nslack)
        b.append(rr)
    for i, (row, rr) in enumerate(std_ub):
        slack = [zr] * nslack
        slack[i] = on
        A.append(row + slack)
        b.append(rr)

    cstd = [zr] * (ncols + nslack)
    for j, cj in enumerate(c):
        if cj == zr:
            continue
        for col, sign in parts[j]:
            cstd[col] += cj * sign
    return A, b, cstd, parts, offsets


def _check_solution(x, eqs, ubs, bounds, mode):
    tol = 0 if mode == RATIONAL else EPS

    def _dot(coeffs):
        s = zero(mode)
        for a, v in zip(coeffs, x):
            s += a * v
        return s

    ok = True
    for coeffs, rhs in eqs:
        if abs(_dot(coeffs) - rhs) > tol:
            ok = False
    for coeffs, rhs in ubs:
        if _dot(coeffs) - rhs > tol:
            ok = False
    for xj, (lo, hi) in zip(x, bounds):
        if lo is not None and xj < lo - tol:
            ok = False
        if hi is not None and xj > hi + tol:
            ok = False
    if not ok:
        if mode == FLOAT:
            raise NumericalFailure("vertex violates constraints beyond EPS")
        raise RuntimeError("exact vertex violates constraints (solver bug)")


# ---------------------------------------------------------------------------
# simplex core (equality form, nonnegative variables)


def _two_phase(A, b, c, mode):
    m = len(A)
    n = len(c)
    zr = zero(mode)
    on = one(mode)
    tol = zr if mode == RATIONAL else EPS

    A = [row[:] for row in A]
    b = b[:]
    for i in range(m):
        if b[i] < zr:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    # artificial identity appended after the structural columns
    T = []
    for i in range(m):
        art = [zr] * m
        art[i] = on
        T.append(A[i] + art)
    basis = list(range(n, n + m))

    c1 = [zr] * n + [on] * m
    status = _iterate(T, b, basis, c1, mode, limit=n + m)
    if status != OPTIMAL:  # phase 1 is bounded below by zero
        raise RuntimeError("phase-1 simplex reported unbounded")
    z1 = zr
    for i in range(m):
        if basis[i] >= n:
            z1 += b[i]
    if z1 > tol:
        return INFEASIBLE, None

    # drive leftover artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] < n:
            keep.append(i)
            continue
        pc = None
        for j in range(n):
            if abs(T[i][j]) > tol:
                pc = j
                break
        if pc is None:
            continue  # zero structural row: redundant
        _pivot(T, b, basis, i, pc)
        keep.append(i)
    if len(keep) != m:
        T = [T[i] for i in keep]
        b = [b[i] for i in keep]
        basis = [basis[i] for i in keep]
        m = len(T)
    if mode == FLOAT:
        b = [0.0 if abs(v) <= EPS else v for v in b]

    if not T:
        if any(cj < -tol for cj in c):
            return UNBOUNDED, None
        return OPTIMAL, [zr] * n
    c2 = c + [zr] * m
    status = _iterate(T, b, basis, c2, mode, limit=n)
    if status != OPTIMAL:
        return UNBOUNDED, None
    y = [zr] * n
    for i, bi in enumerate(basis):
        if bi < n:
            y[bi] = b[i]
    return OPTIMAL, y


def _iterate(T, b, basis, cost, mode, limit):
    """Bland-rule sweep; columns with index >= limit are barred from entering."""
    zr = zero(mode)
    tol = zr if mode == RATIONAL else EPS
    m = len(T)
    total = len(T[0]) if T else 0

    reduced = list(cost[:total])
    for i in range(m):
        cb = cost[basis[i]]
        if cb != zr:
            row = T[i]
            for j in range(total):
                if row[j] != zr:
                    reduced[j] -= cb * row[j]

    while True:
        pc = -1
        for j in range(min(limit, total)):
            if reduced[j] < -tol:
                pc = j
                break
        if pc < 0:
            return OPTIMAL
        pr = -1
        best = None
        for i in range(m):
            a = T[i][pc]
            if a > tol:
                ratio = b[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[pr]):
                    best = ratio
                    pr = i
        if pr < 0:
            return UNBOUNDED
        _pivot(T, b, basis, pr, pc)
        f = reduced[pc]
        if f != zr:
            prow = T[pr]
            for j in range(total):
                if prow[j] != zr:
                    reduced[j] -= f * prow[j]


def _pivot(T, b, basis, pr, pc):
    prow = T[pr]
    piv = prow[pc]
    if piv != 1:
        T[pr] = prow = [v / piv for v in prow]
        b[pr] = b[pr] / piv
    bpr = b[pr]
    for i in range(len(T)):
        if i == pr:
            continue
        f = T[i][pc]
        if f != 0:
            T[i] = [tv - f * pv if pv else tv for tv, pv in zip(T[i], prow)]
            b[i] = b[i] - f * bpr
    basis[pr] = pc


# ---------------------------------------------------------------------------
# named-variable assembly helper


class LpBuilder:
    """Incremental LP assembly with hashable variable keys.

    Variables get columns in insertion order, which keeps the Bland pivot
    sequence, and therefore the returned vertex, deterministic for a fixed
    build sequence.
    """

    def __init__(self, mode: str = RATIONAL):
        self.mode = mode
        self._index: dict = {}
        self._bounds: list = []
        self._cost: list = []
        self._eq: list = []
        self._ub: list = []

    def var(self, key, lo=None, hi=None, cost=0):
        if key in self._index:
            raise MalformedProblem(f"duplicate LP variable {key!r}")
        idx = len(self._bounds)
        self._index[key] = idx
        lo = None if lo is None else to_scalar(lo, self.mode)
        hi = None if hi is None else to_scalar(hi, self.mode)
        self._bounds.append((lo, hi))
        self._cost.append(to_scalar(cost, self.mode))
        return idx

    def has(self, key) -> bool:
        return key in self._index

    def _sparse(self, terms):
        row = {}
        for key, coeff in terms:
            idx = self._index[key]
            row[idx] = row.get(idx, zero(self.mode)) + to_scalar(coeff, self.mode)
        return row

    def add_eq(self, terms, rhs):
        self._eq.append((self._sparse(terms), to_scalar(rhs, self.mode)))

    def add_ub(self, terms, rhs):
        self._ub.append((self._sparse(terms), to_scalar(rhs, self.mode)))

    def add_lb(self, terms, rhs):
        """coeffs . x >= rhs, stored as an ub row."""
        sparse = {i: -v for i, v in self._sparse(terms).items()}
        self._ub.append((sparse, -to_scalar(rhs, self.mode)))

    def problem(self, sense: str) -> LpProblem:
        nvars = len(self._bounds)

        def _dense(rows):
            out = []
            for sparse, rhs in rows:
                row = [zero(self.mode)] * nvars
                for idx, v in sparse.items():
                    row[idx] = v
                out.append((row, rhs))
            return out

        return LpProblem(
            sense, list(self._cost), _dense(self._eq), _dense(self._ub),
            list(self._bounds), self.mode,
        )

    def value_of(self, solution: LpSolution, key):
        return solution.x[self._index[key]]
