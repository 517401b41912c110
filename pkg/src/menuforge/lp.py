"""The optimal-menu linear program for an explicitly supported distribution.

With support v_1..v_n (weights w_i) the truthful revenue-maximization
problem is linear: variables are a lottery x_i and a payment p_i per
support point, the objective is sum_i w_i p_i, and the constraints are
incentive compatibility (no type prefers another type's pair), individual
rationality, and lottery feasibility.  The optimal basic solution pools
types onto at most n distinct pairs, which :func:`extract_menu` turns
into an explicit menu.

:func:`brute_force_optimal` is an independent grid-search oracle: it
enumerates small menus whose entries come from finite price and lottery
grids and scores them by simulated buyer choice.  It lower-bounds the LP
optimum and converges to it as the grids refine.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .core import Menu, ValidationError, expected_revenue, revenue_batch
from .distributions import ExplicitDistribution


class LPError(RuntimeError):
    """Solver-level failure, with status diagnostics attached."""


class LPUnboundedError(LPError):
    pass


class BudgetExceededError(RuntimeError):
    """A brute-force enumeration would exceed its combinatorial budget."""


@dataclass(frozen=True)
class MenuLP:
    """Assembled LP data, kept in scipy's A_ub x <= b_ub form.

    Variable layout: for support point i, columns i*(m+1) .. i*(m+1)+m-1
    are the allocation x_i and column i*(m+1)+m is the payment p_i.
    Row order: the n(n-1) IC rows (i truthful vs reporting j), then n IR
    rows, then n lottery-mass rows.  Payments carry the explicit upper
    bound sum_l v_il, which keeps the program bounded.
    """

    n: int
    m: int
    objective: np.ndarray      # coefficients of the maximization objective
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def num_variables(self) -> int:
        return self.n * (self.m + 1)

    @property
    def num_ic_rows(self) -> int:
        return self.n * (self.n - 1)

    @property
    def num_ir_rows(self) -> int:
        return self.n

    def payment_index(self, i: int) -> int:
        return i * (self.m + 1) + self.m


def build_lp(dist: ExplicitDistribution) -> MenuLP:
    """Assemble the revenue LP for an explicit distribution."""
    V = dist.values
    w = dist.weights
    n, m = V.shape
    width = m + 1
    nv = n * width

    c = np.zeros(nv)
    c[np.arange(n) * width + m] = w

    # IC rows: -(v_i . x_i) + p_i + (v_i . x_j) - p_j <= 0 for i != j
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    n_ic = len(pairs)
    per_row = 2 * width
    rows = np.repeat(np.arange(n_ic), per_row)
    cols = np.empty((n_ic, per_row), dtype=np.int64)
    data = np.empty((n_ic, per_row))
    for r, (i, j) in enumerate(pairs):
        cols[r, :m] = i * width + np.arange(m)
        cols[r, m] = i * width + m
        cols[r, m + 1 : 2 * m + 1] = j * width + np.arange(m)
        cols[r, 2 * m + 1] = j * width + m
        data[r, :m] = -V[i]
        data[r, m] = 1.0
        data[r, m + 1 : 2 * m + 1] = V[i]
        data[r, 2 * m + 1] = -1.0
    ic = sp.csr_matrix((data.ravel(), (rows, cols.ravel())), shape=(n_ic, nv))

    # IR rows: -(v_i . x_i) + p_i <= 0
    rows = np.repeat(np.arange(n), width)
    cols = (np.arange(n) * width)[:, None] + np.arange(width)[None, :]
    data = np.hstack([-V, np.ones((n, 1))])
    ir = sp.csr_matrix((data.ravel(), (rows, cols.ravel())), shape=(n, nv))

    # lottery mass rows: sum_l x_il <= 1
    rows = np.repeat(np.arange(n), m)
    cols = (np.arange(n) * width)[:, None] + np.arange(m)[None, :]
    mass = sp.csr_matrix((np.ones(n * m), (rows, cols.ravel())), shape=(n, nv))

    A = sp.vstack([ic, ir, mass], format="csr")
    b = np.concatenate([np.zeros(n_ic + n), np.ones(n)])

    lower = np.zeros(nv)
    upper = np.ones(nv)
    upper[np.arange(n) * width + m] = V.sum(axis=1)
    return MenuLP(n=n, m=m, objective=c, A_ub=A, b_ub=b, lower=lower, upper=upper)


@dataclass(frozen=True)
class LPSolution:
    lotteries: np.ndarray     # (n, m) optimal allocation per support point
    payments: np.ndarray      # (n,)
    objective: float
    status: str


def solve_lp(lp: MenuLP, tol: float = 1e-7) -> LPSolution:
    """Solve to an optimal basic solution within ``tol`` of the optimum.

    Uses the HiGHS dual simplex via scipy with feasibility tolerances two
    orders below ``tol``.  Unboundedness cannot occur with the payment
    bounds in place but is still mapped to :class:`LPUnboundedError`.
    """
    res = linprog(
        -lp.objective,
        A_ub=lp.A_ub,
        b_ub=lp.b_ub,
        bounds=np.column_stack([lp.lower, lp.upper]),
        method="highs",
        options={
            "primal_feasibility_tolerance": min(tol * 1e-2, 1e-9),
            "dual_feasibility_tolerance": min(tol * 1e-2, 1e-9),
        },
    )
    if res.status == 3:
        raise LPUnboundedError("LP reported unbounded despite payment bounds")
    if res.status != 0 or res.x is None:
        coeffs = np.abs(lp.A_ub.data)
        diag = (
            f"status={res.status} message={res.message!r} "
            f"coeff range [{coeffs.min():.3g}, {coeffs.max():.3g}]"
        )
        raise LPError(f"LP solve failed: {diag}")
    width = lp.m + 1
    x = res.x.reshape(lp.n, width)
    return LPSolution(
        lotteries=x[:, : lp.m].copy(),
        payments=x[:, lp.m].copy(),
        objective=float(lp.objective @ res.x),
        status="optimal",
    )


def extract_menu(sol: LPSolution, dedup_tol: float = 1e-7) -> Menu:
    """Deduplicate the per-type pairs of an optimal solution into a menu.

    Pairs equal within ``dedup_tol`` (max over coordinates and price)
    collapse to one entry; the all-zero pair is dropped since the implicit
    zero entry covers it.  Tiny solver negatives are clipped to keep the
    menu valid.
    """
    entries: list[tuple[np.ndarray, float]] = []
    for x, p in zip(sol.lotteries, sol.payments):
        x = np.clip(x, 0.0, None)
        p = max(float(p), 0.0)
        if p <= dedup_tol and np.all(x <= dedup_tol):
            continue
        if any(abs(p - q) <= dedup_tol and np.max(np.abs(x - y)) <= dedup_tol for y, q in entries):
            continue
        entries.append((x, p))
    if not entries:
        return Menu.empty(sol.lotteries.shape[1])
    return Menu(np.array([e[0] for e in entries]), np.array([e[1] for e in entries]))


def optimal_menu(dist: ExplicitDistribution, tol: float = 1e-7) -> tuple[Menu, float]:
    """Convenience wrapper: build, solve, extract."""
    sol = solve_lp(build_lp(dist), tol=tol)
    return extract_menu(sol), sol.objective


def dump_lp(lp: MenuLP) -> str:
    """Dense text form for cross-checking against external solvers.

    First line: maximization objective coefficients.  Then one line per
    constraint row "a_1 ... a_nv <= b", then the variable bounds.
    """
    lines = ["maximize " + " ".join(f"{v:.17g}" for v in lp.objective)]
    A = lp.A_ub.toarray()
    for r in range(A.shape[0]):
        lines.append(" ".join(f"{v:.17g}" for v in A[r]) + f" <= {lp.b_ub[r]:.17g}")
    lines.append("bounds " + " ".join(f"[{lo:.17g},{hi:.17g}]" for lo, hi in zip(lp.lower, lp.upper)))
    return "\n".join(lines) + "\n"


def _grid_pairs(m: int, price_grid, lottery_grid) -> tuple[np.ndarray, np.ndarray]:
    """All (lottery, price) pairs with entries on the grids and mass <= 1."""
    levels = np.asarray(lottery_grid, dtype=float)
    prices = np.asarray(price_grid, dtype=float)
    combos = np.array(list(itertools.product(levels, repeat=m)))
    combos = combos[combos.sum(axis=1) <= 1.0 + 1e-12]
    L = np.repeat(combos, len(prices), axis=0)
    P = np.tile(prices, len(combos))
    keep = ~((P == 0) & np.any(L != 0, axis=1))  # zero price only on the zero lottery
    return L[keep], P[keep]


def brute_force_optimal(
    dist: ExplicitDistribution,
    price_grid,
    lottery_grid,
    max_menu_size: int | None = None,
    budget: int = 5_000_000,
    chunk: int = 200_000,
) -> tuple[Menu, float]:
    """Best grid-restricted menu of at most n entries, by exhaustive search.

    Menus are subsets of the grid pair set; each candidate is scored by
    exact buyer simulation (choice with tie-breaking) on the distribution,
    so incentive compatibility and rationality hold by construction.  The
    result lower-bounds the LP optimum and approaches it as grids refine.
    """
    V, w = dist.values, dist.weights
    n, m = V.shape
    size_cap = n if max_menu_size is None else min(max_menu_size, n)
    L, P = _grid_pairs(m, price_grid, lottery_grid)
    npairs = len(P)
    total = sum(math.comb(npairs, s) for s in range(1, size_cap + 1))
    if total > budget:
        raise BudgetExceededError(f"{total} candidate menus exceed budget {budget}")

    U = V @ L.T - P          # (n, npairs) utility of each pair for each type
    best_rev = 0.0
    best_idx: tuple[int, ...] = ()
    for s in range(1, size_cap + 1):
        it = itertools.combinations(range(npairs), s)
        while True:
            block = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64)
            if block.size == 0:
                break
            idx = block.reshape(-1, s)                   # (B, s)
            u = U[:, idx]                                # (n, B, s)
            topu = np.maximum(u.max(axis=2), 0.0)        # (n, B)
            cand = u >= topu[:, :, None] - 1e-9
            pr = np.where(cand, P[idx][None, :, :], -np.inf).max(axis=2)
            rev = w @ np.maximum(pr, 0.0)                # (B,)
            b = int(np.argmax(rev))
            if rev[b] > best_rev:
                best_rev = float(rev[b])
                best_idx = tuple(int(t) for t in idx[b])
    menu = Menu(L[list(best_idx)], P[list(best_idx)]) if best_idx else Menu.empty(m)
    return menu, best_rev
