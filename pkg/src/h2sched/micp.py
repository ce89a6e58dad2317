"""Solver-agnostic mixed-integer conic model and its MILP backends.

A :class:`MicpModel` holds bounded variables (continuous, binary, integer),
two-sided linear rows, and two kinds of second-order cones:

* rotated cones ``x * y >= sum(z_k^2)`` with ``x, y >= 0`` (branch-flow losses);
* disks ``||(z_1, ..., z_k)|| <= r`` with constant ``r`` (converter ratings).

Backends never see cones directly.  :meth:`MicpModel.polyhedral` replaces every
rotated cone with an outer polyhedral approximation (a circumscribed polygon on
the ``z`` part plus tangent planes of ``x*y >= s^2``) and every disk with an
inscribed polygon, which keeps device set-points inside their ratings.  Loss
cones can be tightened afterwards with cuts at the incumbent (``cone_rounds``).
"""
from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

INF = math.inf


@dataclass
class RotatedCone:
    x: int
    y: int
    zs: tuple[int, ...]
    name: str
    scale: float = 1.0  # expected upper bound of sqrt(sum z^2)/y, sets tangent levels


@dataclass
class Disk:
    zs: tuple[int, ...]
    radius: float
    name: str


@dataclass
class Solution:
    status: str
    x: np.ndarray | None
    objective: float
    bound: float
    gap: float
    backend: str
    runtime: float
    message: str = ""
    rounds: int = 0
    nodes: int = 0

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None

    def __getitem__(self, idx):
        return self.x[idx]


class MicpModel:
    def __init__(self, name: str = "model"):
        self.name = name
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.vtype: list[str] = []
        self._rows: list[int] = []
        self._cols: list[int] = []
        self._vals: list[float] = []
        self.row_lb: list[float] = []
        self.row_ub: list[float] = []
        self.row_names: list[str] = []
        self.cones: list[RotatedCone] = []
        self.disks: list[Disk] = []
        self.sos2: dict[str, tuple[int, ...]] = {}
        self.sense = "max"
        self.obj: dict[int, float] = {}
        self.obj_const = 0.0
        self.stage: int = -1  # stage tag given to new variables (time step; -1 = none)
        self.stages: list[int] = []

    # -- construction -------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.row_lb)

    def add_var(self, name: str, lb: float = 0.0, ub: float = INF, vtype: str = "C") -> int:
        if vtype not in ("C", "B", "I"):
            raise ValueError(f"unknown variable type {vtype!r}")
        if vtype == "B":
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        if lb > ub + 1e-12:
            raise ValueError(f"variable {name}: lower bound {lb} exceeds upper bound {ub}")
        self.names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.vtype.append(vtype)
        self.stages.append(self.stage)
        return len(self.names) - 1

    def add_vars(self, name: str, shape, lb=0.0, ub=INF, vtype="C") -> np.ndarray:
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        out = np.empty(shape, dtype=int)
        lbs = np.broadcast_to(np.asarray(lb, dtype=float), shape)
        ubs = np.broadcast_to(np.asarray(ub, dtype=float), shape)
        for idx in np.ndindex(*shape):
            tag = ",".join(map(str, idx))
            out[idx] = self.add_var(f"{name}[{tag}]", lbs[idx], ubs[idx], vtype)
        return out

    def add_row(self, terms, lb: float = -INF, ub: float = INF, name: str = "") -> int:
        """Add ``lb <= sum(coef * x[idx]) <= ub``; ``terms`` is a dict or (idx, coef) pairs."""
        items = terms.items() if isinstance(terms, dict) else terms
        r = len(self.row_lb)
        merged: dict[int, float] = {}
        for idx, coef in items:
            idx = int(idx)
            if not 0 <= idx < self.n_vars:
                raise IndexError(f"row {name or r} references undeclared variable {idx}")
            merged[idx] = merged.get(idx, 0.0) + float(coef)
        for idx, coef in merged.items():
            if coef != 0.0:
                self._rows.append(r)
                self._cols.append(idx)
                self._vals.append(coef)
        self.row_lb.append(float(lb))
        self.row_ub.append(float(ub))
        self.row_names.append(name or f"r{r}")
        return r

    def add_eq(self, terms, rhs: float = 0.0, name: str = "") -> int:
        return self.add_row(terms, rhs, rhs, name)

    def add_rotated_cone(self, x: int, y: int, zs, name: str = "", scale: float = 1.0):
        zs = tuple(int(z) for z in zs)
        if len(zs) + 2 < 2 or not zs:
            raise ValueError("rotated cone needs at least one z term")
        for v in (x, y, *zs):
            if not 0 <= v < self.n_vars:
                raise IndexError(f"cone {name} references undeclared variable {v}")
        self.cones.append(RotatedCone(int(x), int(y), zs, name or f"k{len(self.cones)}", float(scale)))

    def add_disk(self, zs, radius: float, name: str = ""):
        zs = tuple(int(z) for z in zs)
        if len(zs) < 2:
            raise ValueError("disk constraint needs at least two terms")
        self.disks.append(Disk(zs, float(radius), name or f"d{len(self.disks)}"))

    def add_sos2(self, name: str, idxs):
        self.sos2[name] = tuple(int(i) for i in idxs)

    def set_objective(self, terms, sense: str = "max", constant: float = 0.0):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.sense = sense
        self.obj = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for idx, c in items:
            self.obj[int(idx)] = self.obj.get(int(idx), 0.0) + float(c)
        self.obj_const = float(constant)

    def add_objective_terms(self, terms):
        items = terms.items() if isinstance(terms, dict) else terms
        for idx, c in items:
            self.obj[int(idx)] = self.obj.get(int(idx), 0.0) + float(c)

    def fix(self, idx: int, value: float):
        self.lb[idx] = self.ub[idx] = float(value)

    def set_stage(self, idxs, stage: int):
        for i in np.ravel(idxs):
            self.stages[int(i)] = stage

    # -- inspection ---------------------------------------------------------
    def stats(self) -> dict:
        vt = np.array(self.vtype)
        return {
            "variables": self.n_vars,
            "binaries": int(np.sum(vt == "B")),
            "integers": int(np.sum(vt == "I")),
            "linear_rows": self.n_rows,
            "nonzeros": len(self._vals),
            "rotated_cones": len(self.cones),
            "disks": len(self.disks),
            "sos2_sets": len(self.sos2),
        }

    def check(self) -> list[str]:
        """Structural problems (empty list when well formed)."""
        out = []
        if self._cols and (min(self._cols) < 0 or max(self._cols) >= self.n_vars):
            out.append("row references undeclared variable")
        for k in self.cones:
            if len(k.zs) + 2 < 3:
                out.append(f"cone {k.name} has fewer than 3 terms")
        for d in self.disks:
            if len(d.zs) < 2:
                out.append(f"disk {d.name} has fewer than 2 terms")
        for i, (lo, hi) in enumerate(zip(self.lb, self.ub)):
            if lo > hi + 1e-12:
                out.append(f"variable {self.names[i]} has empty domain")
        for r, (lo, hi) in enumerate(zip(self.row_lb, self.row_ub)):
            if lo > hi + 1e-12:
                out.append(f"row {self.row_names[r]} has lb > ub")
        for idx in self.obj:
            if not 0 <= idx < self.n_vars:
                out.append(f"objective references undeclared variable {idx}")
        return out

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self._vals, (self._rows, self._cols)), shape=(self.n_rows, self.n_vars))

    def objective_value(self, x: np.ndarray) -> float:
        return self.obj_const + sum(c * x[i] for i, c in self.obj.items())

    def row_violation(self, x: np.ndarray) -> float:
        ax = self.matrix() @ x
        lo = np.array(self.row_lb) - ax
        hi = ax - np.array(self.row_ub)
        return float(max(0.0, np.max(lo, initial=0.0), np.max(hi, initial=0.0)))

    def cone_residuals(self, x: np.ndarray) -> np.ndarray:
        """``x*y - sum z^2`` for every rotated cone (negative means violated)."""
        return np.array([x[k.x] * x[k.y] - sum(x[z] ** 2 for z in k.zs) for k in self.cones])

    def to_lp(self) -> str:
        """CPLEX-LP-style text; cones appear as quadratic rows."""
        def expr(items):
            parts = []
            for i, c in items:
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {abs(c):.12g} {self.names[i]}")
            s = " ".join(parts) or "0"
            return s[2:] if s.startswith("+ ") else s

        lines = [f"\\ model {self.name}", "Maximize" if self.sense == "max" else "Minimize"]
        obj = sorted(self.obj.items())
        lines.append(" obj: " + expr(obj) + (f" + {self.obj_const:.12g} constant" if self.obj_const else ""))
        lines.append("Subject To")
        a = self.matrix().tocsr()
        for r in range(self.n_rows):
            row = a.getrow(r)
            items = list(zip(row.indices.tolist(), row.data.tolist()))
            lo, hi, nm = self.row_lb[r], self.row_ub[r], self.row_names[r]
            if lo == hi:
                lines.append(f" {nm}: {expr(items)} = {lo:.12g}")
            else:
                if lo > -INF:
                    lines.append(f" {nm}_lo: {expr(items)} >= {lo:.12g}")
                if hi < INF:
                    lines.append(f" {nm}_hi: {expr(items)} <= {hi:.12g}")
        for k in self.cones:
            zs = " ".join(f"- {self.names[z]} ^2" for z in k.zs)
            lines.append(f" {k.name}: [ {self.names[k.x]} * {self.names[k.y]} {zs} ] >= 0")
        for d in self.disks:
            zs = " + ".join(f"{self.names[z]} ^2" for z in d.zs)
            lines.append(f" {d.name}: [ {zs} ] <= {d.radius ** 2:.12g}")
        lines.append("Bounds")
        for i, nm in enumerate(self.names):
            lo, hi = self.lb[i], self.ub[i]
            lo_s = "-inf" if lo == -INF else f"{lo:.12g}"
            hi_s = "+inf" if hi == INF else f"{hi:.12g}"
            lines.append(f" {lo_s} <= {nm} <= {hi_s}")
        for tag, code in (("Binaries", "B"), ("Generals", "I")):
            ids = [self.names[i] for i, t in enumerate(self.vtype) if t == code]
            if ids:
                lines.append(tag)
                lines.extend(f" {nm}" for nm in ids)
        if self.sos2:
            lines.append("\\ SOS2 sets (encoded with interval binaries above)")
            for nm, ids in self.sos2.items():
                lines.append(f"\\ {nm}: " + " ".join(self.names[i] for i in ids))
        lines.append("End")
        return "\n".join(lines) + "\n"

    # -- polyhedral form ----------------------------------------------------
    def polyhedral(self, n_angles: int = 16, n_levels: int = 24) -> "LinearForm":
        lf = LinearForm.from_model(self)
        lf.n_angles = n_angles
        for k in self.cones:
            s = lf.new_var(0.0, INF)
            lf.cone_aux.append((s, k))
            if len(k.zs) == 1:
                lf.add_row({s: 1.0, k.zs[0]: -1.0}, 0.0, INF)
                lf.add_row({s: 1.0, k.zs[0]: 1.0}, 0.0, INF)
            elif len(k.zs) == 2:
                for j in range(n_angles):
                    th = 2 * math.pi * j / n_angles
                    lf.add_row({s: 1.0, k.zs[0]: -math.cos(th), k.zs[1]: -math.sin(th)}, 0.0, INF)
            else:
                raise NotImplementedError("rotated cones with more than two z terms")
            for rho in np.linspace(0.0, k.scale, n_levels + 1)[1:]:
                # x + rho^2 y >= 2 rho s  (tangent of x*y >= s^2 at s/y = rho)
                lf.add_row({k.x: 1.0, k.y: rho * rho, s: -2.0 * rho}, 0.0, INF)
        shrink = math.cos(math.pi / n_angles)
        for d in self.disks:
            if len(d.zs) != 2:
                raise NotImplementedError("disks with more than two terms")
            for j in range(n_angles):
                th = 2 * math.pi * (j + 0.5) / n_angles
                lf.add_row({d.zs[0]: math.cos(th), d.zs[1]: math.sin(th)}, -INF, d.radius * shrink)
        return lf


class LinearForm:
    """Mutable MILP in array form: ``row_lb <= A x <= row_ub``, ``lb <= x <= ub``."""

    def __init__(self, n, lb, ub, integrality, c, c0, sense, rows, cols, vals, row_lb, row_ub):
        self.n = n
        self.lb, self.ub = list(lb), list(ub)
        self.integrality = list(integrality)
        self.c = list(c)
        self.c0 = c0
        self.sense = sense
        self.rows, self.cols, self.vals = list(rows), list(cols), list(vals)
        self.row_lb, self.row_ub = list(row_lb), list(row_ub)
        self.cone_aux: list[tuple[int, RotatedCone]] = []
        self.n_angles = 0

    @classmethod
    def from_model(cls, m: MicpModel) -> "LinearForm":
        c = np.zeros(m.n_vars)
        for i, v in m.obj.items():
            c[i] += v
        integ = [0 if t == "C" else 1 for t in m.vtype]
        return cls(m.n_vars, m.lb, m.ub, integ, c, m.obj_const, m.sense,
                   m._rows, m._cols, m._vals, m.row_lb, m.row_ub)

    def new_var(self, lb, ub, integer=False) -> int:
        self.lb.append(lb)
        self.ub.append(ub)
        self.integrality.append(int(integer))
        self.c.append(0.0)
        self.n += 1
        return self.n - 1

    def add_row(self, terms: dict, lb: float, ub: float):
        r = len(self.row_lb)
        for i, v in terms.items():
            self.rows.append(r)
            self.cols.append(i)
            self.vals.append(v)
        self.row_lb.append(lb)
        self.row_ub.append(ub)

    def complete(self, x_model) -> np.ndarray:
        """Extend a point of the conic model with the auxiliary cone variables."""
        x = np.zeros(self.n)
        x[: len(x_model)] = x_model
        angles = 2 * np.pi * np.arange(self.n_angles) / max(self.n_angles, 1)
        for s, k in self.cone_aux:
            zs = np.array([x[z] for z in k.zs])
            if len(zs) == 1:
                x[s] = abs(zs[0])
            else:
                x[s] = max(float(np.max(np.cos(angles) * zs[0] + np.sin(angles) * zs[1])), 0.0)
        return x

    def arrays(self):
        a = sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(len(self.row_lb), self.n))
        c = np.array(self.c)
        if self.sense == "max":
            c = -c
        return a, np.array(self.row_lb), np.array(self.row_ub), c, np.array(self.lb), np.array(self.ub), np.array(self.integrality)


@dataclass
class Budget:
    time_limit: float = 120.0
    mip_rel_gap: float = 0.01
    node_limit: int = 200_000
    seed: int = 0
    verbose: bool = False


def _from_min(sense, v):
    return -v if sense == "max" else v


def _start_solution(lf: "LinearForm", start, name: str, t0: float) -> Solution | None:
    """Package a warm-start point as a solution when the solver returns nothing better."""
    if start is None:
        return None
    a, rlo, rhi, c, lb, ub, _ = lf.arrays()
    obj = _from_min(lf.sense, float(c @ start)) + lf.c0
    return Solution("feasible", np.asarray(start), obj, math.nan, math.inf, name,
                    time.perf_counter() - t0, "warm start kept")


class HighsBackend:
    """scipy's HiGHS branch-and-cut on the polyhedral form (no warm start)."""
    name = "highs"

    def solve_linear(self, lf: LinearForm, budget: Budget, start=None) -> Solution:
        a, rlo, rhi, c, lb, ub, integ = lf.arrays()
        t0 = time.perf_counter()
        res = milp(c, constraints=LinearConstraint(a, rlo, rhi), integrality=integ,
                   bounds=Bounds(lb, ub),
                   options={"time_limit": budget.time_limit, "mip_rel_gap": budget.mip_rel_gap,
                            "disp": budget.verbose, "presolve": True})
        dt = time.perf_counter() - t0
        kept = _start_solution(lf, start, self.name, t0)
        if res.x is None:
            if kept is not None:
                return kept
            status = "infeasible" if res.status == 2 else "no_incumbent"
            bound = getattr(res, "mip_dual_bound", None)
            bound = _from_min(lf.sense, bound) + lf.c0 if bound is not None and np.isfinite(bound) else math.nan
            return Solution(status, None, math.nan, bound, math.inf, self.name, dt, res.message)
        obj = _from_min(lf.sense, res.fun) + lf.c0
        if kept is not None and _from_min(lf.sense, kept.objective) < _from_min(lf.sense, obj):
            return kept
        dual = getattr(res, "mip_dual_bound", None)
        bound = _from_min(lf.sense, dual) + lf.c0 if dual is not None and np.isfinite(dual) else obj
        gap = getattr(res, "mip_gap", None)
        gap = 0.0 if gap is None or not np.isfinite(gap) else float(gap)
        status = "optimal" if res.status == 0 else "feasible"
        return Solution(status, np.asarray(res.x), obj, bound, gap, self.name, dt, res.message)


class HighsPyBackend:
    """HiGHS through its own Python bindings, which accept a warm-start point."""
    name = "highspy"

    def solve_linear(self, lf: LinearForm, budget: Budget, start=None) -> Solution:
        import highspy

        a, rlo, rhi, c, lb, ub, integ = lf.arrays()
        a = a.tocsc()
        t0 = time.perf_counter()
        h = highspy.Highs()
        h.setOptionValue("output_flag", bool(budget.verbose))
        h.setOptionValue("time_limit", float(budget.time_limit))
        h.setOptionValue("mip_rel_gap", float(budget.mip_rel_gap))
        h.setOptionValue("random_seed", int(budget.seed))
        h.setOptionValue("threads", 1)
        lp = highspy.HighsLp()
        lp.num_col_, lp.num_row_ = a.shape[1], a.shape[0]
        inf = highspy.kHighsInf
        lp.col_cost_ = c
        lp.col_lower_ = np.where(np.isfinite(lb), lb, -inf)
        lp.col_upper_ = np.where(np.isfinite(ub), ub, inf)
        lp.row_lower_ = np.where(np.isfinite(rlo), rlo, -inf)
        lp.row_upper_ = np.where(np.isfinite(rhi), rhi, inf)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = a.indptr
        lp.a_matrix_.index_ = a.indices
        lp.a_matrix_.value_ = a.data
        lp.a_matrix_.num_col_, lp.a_matrix_.num_row_ = a.shape[1], a.shape[0]
        if np.any(integ):
            lp.integrality_ = [highspy.HighsVarType.kInteger if k else highspy.HighsVarType.kContinuous
                               for k in integ]
        h.passModel(lp)
        if start is not None:
            sol = highspy.HighsSolution()
            sol.col_value = list(np.asarray(start, dtype=float))
            sol.value_valid = True
            h.setSolution(sol)
        h.run()
        dt = time.perf_counter() - t0
        info = h.getInfo()
        ms = h.getModelStatus()
        st = h.modelStatusToString(ms)
        has = info.primal_solution_status == 2  # feasible point available
        if not has:
            kept = _start_solution(lf, start, self.name, t0)
            if kept is not None:
                return kept
            status = "infeasible" if "nfeasible" in st else "no_incumbent"
            return Solution(status, None, math.nan, math.nan, math.inf, self.name, dt, st)
        x = np.asarray(h.getSolution().col_value)
        obj = _from_min(lf.sense, info.objective_function_value) + lf.c0
        if np.any(integ):
            bnd = _from_min(lf.sense, info.mip_dual_bound) + lf.c0
            gap = float(info.mip_gap) if np.isfinite(info.mip_gap) else math.inf
        else:
            bnd, gap = obj, 0.0
        status = "optimal" if st == "Optimal" else "feasible"
        return Solution(status, x, obj, bnd, gap, self.name, dt, st)


@dataclass(order=True)
class _Node:
    key: float
    seq: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    depth: int = field(compare=False, default=0)


class BranchAndBoundBackend:
    """Best-bound branch-and-bound over LP relaxations solved with HiGHS LP.

    Branches on the most fractional integer variable (lowest index on ties);
    a rounding-and-fixing dive at every node supplies incumbents.  Node order
    is fully determined by (bound, creation index), so runs are reproducible.
    """
    name = "bnb"
    int_tol = 1e-6

    def _lp(self, a_ub, b_ub, a_eq, b_eq, c, lb, ub):
        res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=np.column_stack([lb, ub]), method="highs")
        if res.status != 0:
            return None, math.inf
        return res.x, res.fun

    def solve_linear(self, lf: LinearForm, budget: Budget, start=None) -> Solution:
        t0 = time.perf_counter()
        a, rlo, rhi, c, lb0, ub0, integ = lf.arrays()
        eq = np.isclose(rlo, rhi)
        a_eq, b_eq = (a[eq], rlo[eq]) if eq.any() else (None, None)
        hi_rows = (~eq) & np.isfinite(rhi)
        lo_rows = (~eq) & np.isfinite(rlo)
        a_ub = sp.vstack([a[hi_rows], -a[lo_rows]]).tocsr()
        b_ub = np.concatenate([rhi[hi_rows], -rlo[lo_rows]])
        if a_ub.shape[0] == 0:
            a_ub, b_ub = None, None
        ints = np.flatnonzero(integ)
        lb0 = lb0.copy()
        ub0 = ub0.copy()
        lb0[ints] = np.ceil(lb0[ints] - 1e-9)
        ub0[ints] = np.floor(ub0[ints] + 1e-9)

        def lp(lb, ub):
            return self._lp(a_ub, b_ub, a_eq, b_eq, c, lb, ub)

        best_x, best = None, math.inf
        if start is not None:
            best_x, best = np.asarray(start, dtype=float), float(c @ start)
        heap: list[_Node] = []
        seq = 0
        x, f = lp(lb0, ub0)
        nodes = 1
        if x is None:
            return Solution("infeasible", None, math.nan, math.nan, math.inf, self.name,
                            time.perf_counter() - t0, "root relaxation infeasible")
        heapq.heappush(heap, _Node(f, seq, lb0, ub0))
        root_bound = f
        status = "optimal"
        while heap:
            if time.perf_counter() - t0 > budget.time_limit or nodes >= budget.node_limit:
                status = "feasible" if best_x is not None else "no_incumbent"
                break
            global_bound = heap[0].key
            if best_x is not None and best - global_bound <= budget.mip_rel_gap * max(1.0, abs(best)):
                break
            node = heapq.heappop(heap)
            if node.key >= best - 1e-9:
                continue
            x, f = lp(node.lb, node.ub)
            nodes += 1
            if x is None or f >= best - 1e-9:
                continue
            frac = np.abs(x[ints] - np.round(x[ints]))
            if frac.size == 0 or frac.max() <= self.int_tol:
                best_x, best = x, f
                continue
            # rounding dive: fix every integer at its rounded value and resolve
            lbr, ubr = node.lb.copy(), node.ub.copy()
            r = np.clip(np.round(x[ints]), node.lb[ints], node.ub[ints])
            lbr[ints] = r
            ubr[ints] = r
            xr, fr = lp(lbr, ubr)
            nodes += 1
            if xr is not None and fr < best:
                best_x, best = xr, fr
            j = ints[int(np.argmax(frac))]
            down_ub = node.ub.copy()
            down_ub[j] = math.floor(x[j])
            up_lb = node.lb.copy()
            up_lb[j] = math.ceil(x[j])
            for lo, hi in ((node.lb, down_ub), (up_lb, node.ub)):
                seq += 1
                heapq.heappush(heap, _Node(f, seq, lo, hi, node.depth + 1))
        dt = time.perf_counter() - t0
        bound_min = min([heap[0].key] if heap else [best]) if best_x is not None else root_bound
        if best_x is None:
            return Solution(status if status != "optimal" else "infeasible", None, math.nan,
                            _from_min(lf.sense, bound_min) + lf.c0, math.inf, self.name, dt, nodes=nodes)
        bound_min = min(bound_min, best)
        obj = _from_min(lf.sense, best) + lf.c0
        bnd = _from_min(lf.sense, bound_min) + lf.c0
        gap = abs(best - bound_min) / max(1.0, abs(best))
        return Solution(status, best_x, obj, bnd, gap, self.name, dt, nodes=nodes)


BACKENDS = {"highs": HighsBackend, "highspy": HighsPyBackend, "bnb": BranchAndBoundBackend}


def default_backend() -> str:
    try:
        import highspy  # noqa: F401
    except ImportError:
        return "highs"
    return "highspy"


def solve(model: MicpModel, backend: str | None = None, budget: Budget | None = None,
          n_angles: int = 16, n_levels: int = 24, cone_rounds: int = 0,
          cone_tol: float = 1e-6, start=None) -> Solution:
    """Solve ``model`` on its polyhedral form, optionally tightening loss cones.

    Each extra round adds, for every rotated cone violated by more than
    ``cone_tol`` at the incumbent, the tangent plane of the cone at the
    incumbent's radial projection, then resolves from scratch.
    """
    budget = budget or Budget()
    backend = backend or default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {sorted(BACKENDS)}")
    eng = BACKENDS[backend]()
    lf = model.polyhedral(n_angles, n_levels)
    t0 = time.perf_counter()
    x0 = lf.complete(start) if start is not None else None
    sol = eng.solve_linear(lf, budget, x0)
    rounds = 0
    while sol.has_incumbent and rounds < cone_rounds:
        x = sol.x
        added = 0
        for k in model.cones:
            zs = np.array([x[z] for z in k.zs])
            yv = max(x[k.y], 1e-9)
            if x[k.x] * yv - zs @ zs >= -cone_tol:
                continue
            x0 = float(zs @ zs) / yv
            # tangent plane at (x0, y, z): y*x + x0*y_var >= 2 z.z_var
            terms = {k.x: yv, k.y: x0}
            for zi, zv in zip(k.zs, zs):
                terms[zi] = terms.get(zi, 0.0) - 2.0 * zv
            lf.add_row(terms, 0.0, INF)
            added += 1
        if not added:
            break
        rounds += 1
        remaining = budget.time_limit - (time.perf_counter() - t0)
        if remaining <= 1.0:
            break
        nxt = eng.solve_linear(lf, Budget(remaining, budget.mip_rel_gap, budget.node_limit,
                                          budget.seed, budget.verbose), None)
        if not nxt.has_incumbent:
            break
        sol = nxt
    sol.runtime = time.perf_counter() - t0
    sol.rounds = rounds
    if sol.has_incumbent:
        sol.x = np.asarray(sol.x[: model.n_vars])
    return sol


def relax_and_fix(model: MicpModel, n_angles: int = 16, n_levels: int = 24, window: int = 1,
                  lookahead: int | None = 3, stage_time: float = 30.0, stage_gap: float = 1e-3,
                  stage_bounds=None, time_budget: float | None = None,
                  freeze: bool = False) -> np.ndarray | None:
    """Construct a feasible point by solving stage by stage.

    At stage ``k`` the integer variables tagged ``k .. k+window-1`` keep their
    integrality, the next ``lookahead`` stages are LP-relaxed, anything later
    is left out, and earlier stages are fixed at the values found so far.
    ``stage_bounds(k, last)`` may return ``{index: (lb, ub)}`` overrides for the
    sub-problem whose last included stage is ``last`` (for example a terminal
    storage level).  Returns the point for ``model`` or ``None`` if a stage
    is infeasible.  ``time_budget`` caps the total wall time by shrinking the
    per-stage limit as stages complete (never below one second).  With
    ``freeze`` the continuous variables of a finished stage are fixed as well,
    which keeps every sub-problem small at some cost in quality.
    """
    t_end = None if time_budget is None else time.perf_counter() + time_budget
    lf = model.polyhedral(n_angles, n_levels)
    a, rlo, rhi, c, lb, ub, integ = lf.arrays()
    stages = np.full(lf.n, -1)
    stages[: model.n_vars] = model.stages
    a = a.tocsr()
    # auxiliary cone variables inherit the stage of their row partners
    row_stage = np.full(a.shape[0], -1)
    for r in range(a.shape[0]):
        cols = a.indices[a.indptr[r]:a.indptr[r + 1]]
        if len(cols):
            row_stage[r] = stages[cols].max()
    for s_idx, k in lf.cone_aux:
        stages[s_idx] = max(stages[k.x], stages[k.y], *(stages[z] for z in k.zs))
    for r in range(a.shape[0]):
        cols = a.indices[a.indptr[r]:a.indptr[r + 1]]
        if len(cols):
            row_stage[r] = stages[cols].max()
    ints = integ.astype(bool)
    lb, ub = lb.copy(), ub.copy()
    stages_eff = np.where(stages < 0, 0, stages)
    last = int(stages_eff.max(initial=0))
    for k in range(last + 1):
        top = last if lookahead is None else min(last, k + window - 1 + lookahead)
        rows = row_stage <= top
        cols = stages_eff <= top
        sub_a = a[rows][:, cols]
        lbk, ubk = lb[cols].copy(), ub[cols].copy()
        if stage_bounds is not None:
            pos = np.cumsum(cols) - 1
            for idx, (lo, hi) in stage_bounds(k, top).items():
                if cols[idx]:
                    lbk[pos[idx]] = max(lbk[pos[idx]], lo)
                    ubk[pos[idx]] = min(ubk[pos[idx]], hi)
        active = (ints & (stages_eff >= k) & (stages_eff < k + window))[cols]
        limit = stage_time
        if t_end is not None:
            limit = min(stage_time, max((t_end - time.perf_counter()) / (last + 1 - k), 1.0))
        res = milp(c[cols], constraints=LinearConstraint(sub_a, rlo[rows], rhi[rows]),
                   integrality=active.astype(int), bounds=Bounds(lbk, ubk),
                   options={"time_limit": limit, "mip_rel_gap": stage_gap, "presolve": True})
        if res.x is None:
            return None
        x_sub = np.zeros(lf.n)
        x_sub[cols] = res.x
        fix = ints & (stages_eff == k)
        val = np.clip(np.round(x_sub[fix]), lb[fix], ub[fix])
        lb[fix] = val
        ub[fix] = val
        if freeze:
            done = ~ints & (stages == k)
            lb[done] = ub[done] = np.clip(x_sub[done], lb[done], ub[done])
    res = milp(c, constraints=LinearConstraint(a, rlo, rhi), integrality=np.zeros(lf.n),
               bounds=Bounds(lb, ub))
    if res.x is None:
        return None
    x = res.x.copy()
    x[ints] = np.round(x[ints])
    return x[: model.n_vars]
