"""A small MILP layer: a dense model container, an incremental builder, and
two interchangeable exact backends.

``HighsBackend`` adapts the HiGHS solver shipped with scipy; it is the fast
default. ``BranchAndBoundBackend`` is a self-contained best-first branch and
bound over simplex LP relaxations, so the test suite never depends on an
external MILP solver being importable or licensed. Both are exact: hitting a
time limit raises instead of returning an approximation.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog
from scipy.optimize import milp as scipy_milp

INTEGRALITY_TOL = 1e-6
DEFAULT_TIME_LIMIT = 60.0


class SolverError(RuntimeError):
    """Raised on infeasibility, timeout, or numerical failure. Carries the
    model so the failing program can be dumped for inspection."""

    def __init__(self, message: str, model: "MilpModel | None" = None):
        super().__init__(message)
        self.model = model


@dataclass
class MilpModel:
    """Dense MILP: optimize c.x subject to row_lb <= A x <= row_ub and
    variable bounds, with the flagged variables binary."""

    c: np.ndarray
    A: np.ndarray
    row_lb: np.ndarray
    row_ub: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    is_integer: np.ndarray
    maximize: bool
    names: list[str] = field(default_factory=list)

    @property
    def num_variables(self) -> int:
        return self.c.size

    @property
    def num_binary(self) -> int:
        return int(self.is_integer.sum())

    @property
    def num_continuous(self) -> int:
        return self.num_variables - self.num_binary

    @property
    def num_rows(self) -> int:
        return self.row_lb.size


class ModelBuilder:
    def __init__(self, maximize: bool = False):
        self.maximize = maximize
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._integer: list[bool] = []
        self._names: list[str] = []
        self._rows: list[tuple[dict[int, float], float, float]] = []
        self._objective: dict[int, float] = {}

    @property
    def num_variables(self) -> int:
        return len(self._lb)

    def add_continuous(self, name: str, lb: float = 0.0, ub: float = np.inf) -> int:
        self._lb.append(lb)
        self._ub.append(ub)
        self._integer.append(False)
        self._names.append(name)
        return len(self._lb) - 1

    def add_binary(self, name: str) -> int:
        self._lb.append(0.0)
        self._ub.append(1.0)
        self._integer.append(True)
        self._names.append(name)
        return len(self._lb) - 1

    def add_row(self, coeffs: dict[int, float], lb: float = -np.inf, ub: float = np.inf):
        self._rows.append((coeffs, lb, ub))

    def add_le(self, coeffs: dict[int, float], rhs: float):
        self.add_row(coeffs, ub=rhs)

    def add_ge(self, coeffs: dict[int, float], rhs: float):
        self.add_row(coeffs, lb=rhs)

    def add_eq(self, coeffs: dict[int, float], rhs: float):
        self.add_row(coeffs, lb=rhs, ub=rhs)

    def set_objective(self, coeffs: dict[int, float]):
        self._objective = dict(coeffs)

    def build(self) -> MilpModel:
        n = self.num_variables
        c = np.zeros(n)
        for j, v in self._objective.items():
            c[j] = v
        A = np.zeros((len(self._rows), n))
        row_lb = np.full(len(self._rows), -np.inf)
        row_ub = np.full(len(self._rows), np.inf)
        for i, (coeffs, lo, hi) in enumerate(self._rows):
            for j, v in coeffs.items():
                A[i, j] = v
            row_lb[i] = lo
            row_ub[i] = hi
        return MilpModel(
            c=c,
            A=A,
            row_lb=row_lb,
            row_ub=row_ub,
            lb=np.array(self._lb, dtype=float),
            ub=np.array(self._ub, dtype=float),
            is_integer=np.array(self._integer, dtype=bool),
            maximize=self.maximize,
            names=list(self._names),
        )


@dataclass
class SolveResult:
    x: np.ndarray
    objective: float


class MilpBackend:
    """Solve a MilpModel to proven optimality or raise SolverError."""

    supports_warm_start = False

    def __init__(self, time_limit: float = DEFAULT_TIME_LIMIT):
        self.time_limit = time_limit

    def solve(self, model: MilpModel, time_limit: float | None = None) -> SolveResult:
        raise NotImplementedError


class HighsBackend(MilpBackend):
    """Adapter to the HiGHS branch-and-cut solver bundled with scipy."""

    def solve(self, model: MilpModel, time_limit: float | None = None) -> SolveResult:
        limit = self.time_limit if time_limit is None else time_limit
        c = -model.c if model.maximize else model.c
        constraints = []
        if model.num_rows:
            constraints.append(LinearConstraint(model.A, model.row_lb, model.row_ub))
        res = scipy_milp(
            c=c,
            constraints=constraints,
            integrality=model.is_integer.astype(int),
            bounds=Bounds(model.lb, model.ub),
            options={"time_limit": limit, "mip_rel_gap": 0.0, "presolve": True},
        )
        if res.status == 1:
            raise SolverError(f"time limit of {limit}s hit before optimality", model)
        if res.status == 2:
            raise SolverError("model is infeasible", model)
        if res.status != 0 or res.x is None:
            raise SolverError(f"solver failed: {res.message}", model)
        x = np.clip(res.x, model.lb, model.ub)
        objective = float(model.c @ x)
        return SolveResult(x=x, objective=objective)


class BranchAndBoundBackend(MilpBackend):
    """Best-first branch and bound over simplex LP relaxations.

    Exact for the pure-binary models built in this package: LP bounds prune,
    branching fixes the most fractional binary, and the search runs until the
    tree is exhausted (or the time limit errors out).
    """

    def solve(self, model: MilpModel, time_limit: float | None = None) -> SolveResult:
        limit = self.time_limit if time_limit is None else time_limit
        deadline = time.monotonic() + limit
        c = -model.c if model.maximize else model.c
        a_ub, b_ub, a_eq, b_eq = _split_rows(model)
        int_idx = np.flatnonzero(model.is_integer)

        def relax(lb, ub):
            res = linprog(
                c,
                A_ub=a_ub,
                b_ub=b_ub,
                A_eq=a_eq,
                b_eq=b_eq,
                bounds=np.column_stack([lb, ub]),
                method="highs",
            )
            if res.status == 2:
                return None
            if res.status != 0:
                raise SolverError(f"LP relaxation failed: {res.message}", model)
            return res

        best_x = None
        best_val = np.inf
        counter = 0
        heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []

        root = relax(model.lb, model.ub)
        if root is not None:
            heapq.heappush(heap, (root.fun, counter, model.lb.copy(), model.ub.copy()))
            node_x = {counter: root.x}
        else:
            node_x = {}

        while heap:
            if time.monotonic() > deadline:
                raise SolverError(f"time limit of {limit}s hit before optimality", model)
            bound, tag, lb, ub = heapq.heappop(heap)
            x = node_x.pop(tag)
            if bound >= best_val - 1e-9:
                continue
            frac = np.abs(x[int_idx] - np.round(x[int_idx]))
            if frac.size == 0 or frac.max() <= INTEGRALITY_TOL:
                if bound < best_val:
                    best_val = bound
                    best_x = x
                continue
            j = int(int_idx[np.argmax(frac)])
            for child_lb, child_ub in _branch(lb, ub, j, x[j]):
                res = relax(child_lb, child_ub)
                if res is None or res.fun >= best_val - 1e-9:
                    continue
                counter += 1
                heapq.heappush(heap, (res.fun, counter, child_lb, child_ub))
                node_x[counter] = res.x

        if best_x is None:
            raise SolverError("model is infeasible", model)
        x = np.clip(best_x, model.lb, model.ub)
        x[int_idx] = np.round(x[int_idx])
        return SolveResult(x=x, objective=float(model.c @ x))


def _split_rows(model: MilpModel):
    """Two-sided rows to linprog's A_ub/A_eq form."""
    a_ub_rows, b_ub, a_eq_rows, b_eq = [], [], [], []
    for i in range(model.num_rows):
        lo, hi = model.row_lb[i], model.row_ub[i]
        row = model.A[i]
        if lo == hi:
            a_eq_rows.append(row)
            b_eq.append(lo)
            continue
        if np.isfinite(hi):
            a_ub_rows.append(row)
            b_ub.append(hi)
        if np.isfinite(lo):
            a_ub_rows.append(-row)
            b_ub.append(-lo)
    a_ub = np.array(a_ub_rows) if a_ub_rows else None
    a_eq = np.array(a_eq_rows) if a_eq_rows else None
    return a_ub, (np.array(b_ub) if a_ub_rows else None), a_eq, (np.array(b_eq) if a_eq_rows else None)


def _branch(lb, ub, j, xj):
    down_lb, down_ub = lb.copy(), ub.copy()
    down_ub[j] = np.floor(xj)
    up_lb, up_ub = lb.copy(), ub.copy()
    up_lb[j] = np.ceil(xj)
    return (down_lb, down_ub), (up_lb, up_ub)


_BACKENDS = {
    "highs": HighsBackend,
    "bnb": BranchAndBoundBackend,
    "branch-and-bound": BranchAndBoundBackend,
}


def get_backend(name: str, time_limit: float = DEFAULT_TIME_LIMIT) -> MilpBackend:
    try:
        cls = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}")
    return cls(time_limit=time_limit)


def write_lp(model: MilpModel, path: str):
    """Dump the model in LP text format (debugging aid, flag-gated by callers)."""

    def term(j, v, lead):
        sign = "-" if v < 0 else ("" if lead else "+")
        return f"{sign} {abs(v):.12g} {model.names[j]}"

    def expr(coeffs):
        parts, lead = [], True
        for j, v in coeffs:
            if v == 0:
                continue
            parts.append(term(j, v, lead))
            lead = False
        return " ".join(parts) if parts else "0"

    lines = ["Maximize" if model.maximize else "Minimize"]
    lines.append(" obj: " + expr(enumerate(model.c)))
    lines.append("Subject To")
    for i in range(model.num_rows):
        body = expr(enumerate(model.A[i]))
        lo, hi = model.row_lb[i], model.row_ub[i]
        if lo == hi:
            lines.append(f" c{i}: {body} = {lo:.12g}")
        else:
            if np.isfinite(hi):
                lines.append(f" c{i}u: {body} <= {hi:.12g}")
            if np.isfinite(lo):
                lines.append(f" c{i}l: {body} >= {lo:.12g}")
    lines.append("Bounds")
    for j in range(model.num_variables):
        if not model.is_integer[j]:
            lines.append(f" {model.lb[j]:.12g} <= {model.names[j]} <= {model.ub[j]:.12g}")
    binaries = [model.names[j] for j in range(model.num_variables) if model.is_integer[j]]
    if binaries:
        lines.append("Binary")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
