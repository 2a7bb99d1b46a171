"""Exact small-instance solvers for the two transport costs and related masses.

Everything here works on the dense coupling polytope over the product of a
discrete support: the integral cost is a linear program, the supremal cost is
a binary search over realized configuration costs with a feasibility oracle
(max-flow for two marginals, phase-one feasibility otherwise), and the minimum
costly-set mass is a 0/1-objective linear program.  Infinite-cost cells are
deleted before any LP; they are never big-M'd.

A rational mode re-runs feasibility decisions in exact fraction arithmetic so
borderline instances (e.g. pointwise concentration exactly 1/N) are decided
without rounding.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .cost import HFunction
from .errors import InstanceTooLarge, ValidationError
from .measures import DiscreteMeasure

MAX_CELLS = 200_000
MAX_RATIONAL_CELLS = 20_000
MARGINAL_TOL = 1e-9
FLOW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Coupling:
    """Dense transport plan over the product of a discrete support."""

    points: np.ndarray            # (M, d) atom coordinates
    n_marginals: int
    weights: np.ndarray           # shape (M,) * n_marginals

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.points.shape[0],) * self.n_marginals:
            raise ValidationError("coupling tensor shape does not match the support")
        if w.min() < -FLOW_TOL:
            raise ValidationError("negative coupling weight")
        object.__setattr__(self, "weights", w)

    def marginal(self, axis: int) -> np.ndarray:
        axes = tuple(k for k in range(self.n_marginals) if k != axis)
        return self.weights.sum(axis=axes)

    def total_mass(self) -> float:
        return float(self.weights.sum())

    def check_marginals(self, rho: DiscreteMeasure, tol: float = MARGINAL_TOL) -> float:
        """Largest marginal defect against rho over all axes."""
        worst = 0.0
        for k in range(self.n_marginals):
            worst = max(worst, float(np.abs(self.marginal(k) - rho.weights).max()))
        if worst > tol:
            raise ValidationError(f"marginal defect {worst:g} exceeds {tol:g}")
        return worst

    def support_cells(self, tol: float = FLOW_TOL):
        return [tuple(int(v) for v in idx) for idx in np.argwhere(self.weights > tol)]

    def to_json_obj(self) -> dict:
        m = self.points.shape[0]
        return {
            "N": self.n_marginals,
            "support": [[float(x) for x in p] for p in self.points],
            "weights_flat": [float(v) for v in self.weights.ravel()],
            "shape": [m] * self.n_marginals,
        }


@dataclass(frozen=True)
class SolveReport:
    value: float
    coupling: Coupling | None
    status: str            # "optimal" | "infeasible-finite" | "error"
    iterations: int


def _check_size(rho: DiscreteMeasure, n: int, rational: bool = False) -> None:
    if not 2 <= n <= 4:
        raise InstanceTooLarge("marginal count limited to 2 <= N <= 4")
    cells = rho.size**n
    if cells > MAX_CELLS:
        raise InstanceTooLarge(f"{cells} cells exceed the dense limit {MAX_CELLS}")
    if rational and n >= 3 and cells > MAX_RATIONAL_CELLS:
        raise InstanceTooLarge(
            f"{cells} cells exceed the rational feasibility limit {MAX_RATIONAL_CELLS}"
        )


# ---------------------------------------------------------------------------
# configuration tensors
# ---------------------------------------------------------------------------

def pair_cost_tensor(rho: DiscreteMeasure, h: HFunction, n: int) -> np.ndarray:
    """Configuration cost of every index tuple, shape (M,) * n."""
    m = rho.size
    hmat = h.pairwise(rho.distance_matrix())
    np.fill_diagonal(hmat, h.h0)
    total = np.zeros((m,) * n)
    for k, l in itertools.combinations(range(n), 2):
        shape = [1] * n
        shape[k] = m
        shape[l] = m
        total = total + hmat.reshape(shape)
    return total


def min_pair_distance_tensor(rho: DiscreteMeasure, n: int) -> np.ndarray:
    m = rho.size
    dmat = rho.distance_matrix()
    out = np.full((m,) * n, math.inf)
    for k, l in itertools.combinations(range(n), 2):
        shape = [1] * n
        shape[k] = m
        shape[l] = m
        out = np.minimum(out, dmat.reshape(shape))
    return out


def _marginal_system(m: int, n: int, cells: np.ndarray) -> sparse.csr_matrix:
    """Equality matrix: one row per (axis, atom), one column per kept cell."""
    ncells = cells.shape[0]
    rows = np.concatenate([k * m + cells[:, k] for k in range(n)])
    cols = np.tile(np.arange(ncells), n)
    data = np.ones(n * ncells)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n * m, ncells))


def _tensor_from_cells(m: int, n: int, cells: np.ndarray, values: np.ndarray) -> np.ndarray:
    out = np.zeros((m,) * n)
    out[tuple(cells[:, k] for k in range(n))] = values
    return out


# ---------------------------------------------------------------------------
# integral cost
# ---------------------------------------------------------------------------

def solve_integral(rho: DiscreteMeasure, h: HFunction, n: int) -> SolveReport:
    """Minimum expected configuration cost over the coupling polytope."""
    _check_size(rho, n)
    m = rho.size
    cost = pair_cost_tensor(rho, h, n)
    cells = np.argwhere(np.isfinite(cost))
    if cells.shape[0] == 0:
        return SolveReport(math.inf, None, "infeasible-finite", 0)
    c = cost[tuple(cells[:, k] for k in range(n))]
    a_eq = _marginal_system(m, n, cells)
    b_eq = np.tile(rho.weights, n)
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status == 2:
        return SolveReport(math.inf, None, "infeasible-finite", int(res.nit))
    if res.status != 0:
        return SolveReport(math.nan, None, "error", int(res.nit))
    x = np.maximum(res.x, 0.0)
    coupling = Coupling(rho.points, n, _tensor_from_cells(m, n, cells, x))
    coupling.check_marginals(rho)
    return SolveReport(float(c @ x), coupling, "optimal", int(res.nit))


# ---------------------------------------------------------------------------
# feasibility on a restricted support
# ---------------------------------------------------------------------------

def _maxflow_bipartite(weights, allowed: np.ndarray):
    """Transport feasibility as max-flow; generic over float and Fraction.

    Returns the row-to-column flow matrix (list of dicts) if the flow
    saturates the total mass, else None.
    """
    m = len(weights)
    exact = isinstance(weights[0], Fraction)
    zero = Fraction(0) if exact else 0.0
    total = sum(weights, zero)
    source, sink = 2 * m, 2 * m + 1
    inf_cap = total + (1 if exact else 1.0)
    cap: list[dict[int, object]] = [dict() for _ in range(2 * m + 2)]
    for i in range(m):
        cap[source][i] = weights[i]
        cap[m + i][sink] = weights[i]
        for j in range(m):
            if allowed[i, j]:
                cap[i][m + j] = inf_cap
    flow = zero
    while True:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v, c in cap[u].items():
                if v not in parent and c > zero:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        path = []
        v = sink
        while parent[v] is not None:
            path.append((parent[v], v))
            v = parent[v]
        push = min(cap[u][v] for u, v in path)
        for u, v in path:
            cap[u][v] -= push
            cap[v].setdefault(u, zero)
            cap[v][u] += push
        flow += push
    if exact:
        if flow != total:
            return None
    elif flow < total - FLOW_TOL:
        return None
    # residual back-edges col -> row hold the shipped amounts
    plan = [dict() for _ in range(m)]
    for j in range(m):
        for v, c in cap[m + j].items():
            if v < m and c > zero:
                plan[v][j] = c
    return plan


def _phase_one_fractions(cells: list[tuple[int, ...]], m: int, n: int,
                         weights: tuple[Fraction, ...]):
    """Exact phase-one simplex for the marginal system restricted to cells.

    Returns {cell: mass} if feasible, else None.  Bland's rule, dense
    fraction tableau; intended for modest instances only.
    """
    rows = n * m
    ncols = len(cells)
    tab = [[Fraction(0)] * (ncols + 1) for _ in range(rows)]
    for c_idx, cell in enumerate(cells):
        for k in range(n):
            tab[k * m + cell[k]][c_idx] = Fraction(1)
    for k in range(n):
        for i in range(m):
            tab[k * m + i][ncols] = weights[i]
    basis = [ncols + r for r in range(rows)]          # artificial variables
    obj = [sum(tab[r][j] for r in range(rows)) for j in range(ncols + 1)]
    while True:
        enter = next((j for j in range(ncols) if obj[j] > 0), None)
        if enter is None:
            break
        ratios = [(tab[r][ncols] / tab[r][enter], r)
                  for r in range(rows) if tab[r][enter] > 0]
        if not ratios:
            raise ValidationError("unbounded phase-one (inconsistent system)")
        _, leave = min(ratios, key=lambda t: (t[0], basis[t[1]]))
        piv = tab[leave][enter]
        tab[leave] = [v / piv for v in tab[leave]]
        for r in range(rows):
            if r != leave and tab[r][enter] != 0:
                f = tab[r][enter]
                tab[r] = [a - f * b for a, b in zip(tab[r], tab[leave])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, tab[leave])]
        basis[leave] = enter
    if obj[ncols] != 0:
        return None
    solution = {}
    for r, b in enumerate(basis):
        if b < ncols and tab[r][ncols] != 0:
            solution[cells[b]] = tab[r][ncols]
    return solution


def _allowed_mask(rho: DiscreteMeasure, n: int, allowed) -> np.ndarray:
    if isinstance(allowed, np.ndarray):
        if allowed.shape != (rho.size,) * n:
            raise ValidationError("allowed mask has the wrong shape")
        return allowed.astype(bool)
    mask = np.zeros((rho.size,) * n, dtype=bool)
    for idx in np.ndindex(*mask.shape):
        mask[idx] = bool(allowed(idx))
    return mask


def feasible_on_support(rho: DiscreteMeasure, n: int, allowed,
                        rational: bool = False) -> Coupling | None:
    """A coupling supported inside the allowed index set, or None.

    ``allowed`` is a predicate on index tuples or a boolean tensor of shape
    (M,) * n.  Two marginals run as a max-flow (exact in rational mode);
    more marginals run phase-one feasibility.
    """
    _check_size(rho, n, rational=rational)
    m = rho.size
    mask = _allowed_mask(rho, n, allowed)
    if n == 2:
        w = list(rho.exact_weights()) if rational else [float(x) for x in rho.weights]
        plan = _maxflow_bipartite(w, mask)
        if plan is None:
            return None
        tensor = np.zeros((m, m))
        for i, row in enumerate(plan):
            for j, v in row.items():
                tensor[i, j] = float(v)
        coupling = Coupling(rho.points, 2, tensor)
        coupling.check_marginals(rho)
        return coupling
    cells = [tuple(int(v) for v in idx) for idx in np.argwhere(mask)]
    if not cells:
        return None
    if rational:
        sol = _phase_one_fractions(cells, m, n, rho.exact_weights())
        if sol is None:
            return None
        tensor = np.zeros((m,) * n)
        for cell, v in sol.items():
            tensor[cell] = float(v)
    else:
        cells_arr = np.asarray(cells)
        a_eq = _marginal_system(m, n, cells_arr)
        b_eq = np.tile(rho.weights, n)
        res = linprog(np.zeros(len(cells)), A_eq=a_eq, b_eq=b_eq,
                      bounds=(0, None), method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise ValidationError(f"feasibility solve failed with status {res.status}")
        tensor = _tensor_from_cells(m, n, cells_arr, np.maximum(res.x, 0.0))
    coupling = Coupling(rho.points, n, tensor)
    coupling.check_marginals(rho)
    return coupling


# ---------------------------------------------------------------------------
# supremal cost
# ---------------------------------------------------------------------------

def solve_supremal(rho: DiscreteMeasure, h: HFunction, n: int,
                   rational: bool = False) -> SolveReport:
    """Minimum over couplings of the essential supremum of the configuration
    cost: binary search over the realized finite cost levels."""
    _check_size(rho, n, rational=rational)
    cost = pair_cost_tensor(rho, h, n)
    levels = np.unique(cost[np.isfinite(cost)])
    probes = 0

    def witness(level: float) -> Coupling | None:
        nonlocal probes
        probes += 1
        return feasible_on_support(rho, n, cost <= level, rational=rational)

    if levels.size == 0 or witness(float(levels[-1])) is None:
        return SolveReport(math.inf, None, "infeasible-finite", probes)
    lo, hi = 0, levels.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if witness(float(levels[mid])) is not None:
            hi = mid
        else:
            lo = mid + 1
    best = witness(float(levels[lo]))
    return SolveReport(float(levels[lo]), best, "optimal", probes)


# ---------------------------------------------------------------------------
# minimum costly mass
# ---------------------------------------------------------------------------

def min_bad_mass(rho: DiscreteMeasure, n: int, beta: float) -> float:
    """Exact minimum over couplings of the mass of configurations with some
    pair strictly closer than beta."""
    if not beta > 0:
        raise ValidationError("beta must be positive")
    _check_size(rho, n)
    m = rho.size
    bad = (min_pair_distance_tensor(rho, n) < beta).astype(float)
    cells = np.argwhere(np.ones((m,) * n, dtype=bool))
    c = bad[tuple(cells[:, k] for k in range(n))]
    a_eq = _marginal_system(m, n, cells)
    b_eq = np.tile(rho.weights, n)
    res = linprog(c, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if res.status != 0:
        raise ValidationError(f"costly-mass solve failed with status {res.status}")
    return float(c @ np.maximum(res.x, 0.0))


# ---------------------------------------------------------------------------
# vertex enumeration (independent oracle, two marginals)
# ---------------------------------------------------------------------------

MAX_VERTEX_ATOMS = 4


def transport_vertices(rho: DiscreteMeasure, exact: bool = False) -> list[np.ndarray]:
    """All vertices of the two-marginal transportation polytope Pi(rho, rho).

    Basic solutions correspond to spanning trees of the complete bipartite
    support graph; flows are solved by leaf stripping.  With ``exact`` the
    arithmetic is rational and vertices are returned as Fraction matrices.
    """
    m = rho.size
    if m > MAX_VERTEX_ATOMS:
        raise InstanceTooLarge(f"vertex enumeration limited to {MAX_VERTEX_ATOMS} atoms")
    w = list(rho.exact_weights()) if exact else [float(x) for x in rho.weights]
    zero = Fraction(0) if exact else 0.0
    cells = [(i, j) for i in range(m) for j in range(m)]
    nodes = 2 * m
    seen = set()
    out = []
    for tree in itertools.combinations(cells, nodes - 1):
        parent = list(range(nodes))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        acyclic = True
        for i, j in tree:
            ra, rb = find(i), find(m + j)
            if ra == rb:
                acyclic = False
                break
            parent[ra] = rb
        if not acyclic or len({find(k) for k in range(nodes)}) != 1:
            continue
        need = list(w) + list(w)
        adj = {k: [] for k in range(nodes)}
        for i, j in tree:
            adj[i].append((m + j, (i, j)))
            adj[m + j].append((i, (i, j)))
        deg = {k: len(adj[k]) for k in range(nodes)}
        solved = {}
        queue = [k for k in range(nodes) if deg[k] == 1]
        while queue:
            k = queue.pop()
            live = [(other, cell) for other, cell in adj[k] if cell not in solved]
            if not live:
                continue
            other, cell = live[0]
            solved[cell] = need[k]
            need[other] -= need[k]
            need[k] = zero
            deg[other] -= 1
            deg[k] -= 1
            if deg[other] == 1:
                queue.append(other)
        if len(solved) != len(tree):
            continue
        if exact:
            if any(v < 0 for v in solved.values()):
                continue
            key = tuple(sorted((c, v) for c, v in solved.items() if v != 0))
        else:
            if any(v < -1e-12 for v in solved.values()):
                continue
            key = tuple(sorted((c, round(v, 12)) for c, v in solved.items() if abs(v) > 1e-12))
        if key in seen:
            continue
        seen.add(key)
        mat = np.zeros((m, m), dtype=object if exact else float)
        if exact:
            mat[:] = Fraction(0)
        for (i, j), v in solved.items():
            mat[i, j] = max(v, zero)
        out.append(mat)
    return out
