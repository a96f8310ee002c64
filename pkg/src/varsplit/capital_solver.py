"""Minimal capital over contiguous interval tranches, with a brute oracle.

The search space here is deliberately narrow: cut the sorted support into at
most n contiguous groups and charge each group its strict quantile. Whether a
wider class of decompositions (randomized ones included) can do better is not
answered by this module, and every report built on it carries that caveat.

The dynamic program exploits one structural fact: the strict quantile of a
group depends only on its right edge. Reading the group (k+1..j) against the
prefix masses S, its quantile is zero exactly when S[k] > S[j] - (1 - alpha),
and otherwise equals the value of the first atom t with S[t] > S[j] - (1 -
alpha). That atom is the same for every left edge k, so each right edge j
carries a single precomputed cost and a single threshold index.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBounds, TooManyAtoms
from .loss_model import LossModel, order_stat_rank
from .risk_measures import RiskLevel, as_level
from .structuring import Partition

#: Largest finite support the dynamic program accepts.
MAX_SOLVER_ATOMS = 5000
#: Largest support the exhaustive oracle will enumerate.
MAX_ORACLE_ATOMS = 12


@dataclass(frozen=True)
class OverheadSchedule:
    """Nondecreasing cost of running n units, charged on top of capital."""

    variant: str
    rate: float = 0.0
    costs: tuple[float, ...] = ()

    def __post_init__(self):
        if self.variant not in ("none", "linear", "table"):
            raise InvalidBounds(f"unknown overhead variant {self.variant!r}")
        rate = float(self.rate)
        if not np.isfinite(rate) or rate < 0.0:
            raise InvalidBounds(f"overhead rate must be finite and >= 0, got {rate}")
        object.__setattr__(self, "rate", rate)
        costs = tuple(float(c) for c in self.costs)
        object.__setattr__(self, "costs", costs)
        if self.variant == "table":
            if not costs:
                raise InvalidBounds("table overhead needs at least one entry")
            if any(c < 0.0 or not np.isfinite(c) for c in costs):
                raise InvalidBounds("table overhead entries must be finite and >= 0")
            if any(b < a for a, b in zip(costs, costs[1:])):
                raise InvalidBounds("table overhead must be nondecreasing")

    @classmethod
    def none(cls) -> "OverheadSchedule":
        return cls(variant="none")

    @classmethod
    def linear(cls, rate: float) -> "OverheadSchedule":
        return cls(variant="linear", rate=rate)

    @classmethod
    def table(cls, costs) -> "OverheadSchedule":
        return cls(variant="table", costs=tuple(costs))

    def cost(self, n: int) -> float:
        if self.variant == "none":
            return 0.0
        if self.variant == "linear":
            return self.rate * n
        if n > len(self.costs):
            raise InvalidBounds(
                f"table overhead covers 1..{len(self.costs)} units, asked for {n}"
            )
        return self.costs[n - 1]


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a tranche search: capital plus any overhead charged."""

    best_n: int
    partition: Partition
    capital: float
    objective: float


def _float_tables(values: np.ndarray, masses: np.ndarray, alpha: float):
    """Right-edge cost tables from float prefix masses (atom lists)."""
    pos = values > 0.0
    pvals = np.asarray(values[pos], dtype=float)
    spre = np.concatenate(([0.0], np.cumsum(masses[pos])))
    thr = spre[1:] - (1.0 - alpha)
    tstar = np.searchsorted(spre, thr, side="right")
    return pvals, tstar


def _count_tables(samples: np.ndarray, alpha: float):
    """Right-edge cost tables from integer sample counts (empirical data).

    Working in counts keeps every comparison exact and reproduces the order
    statistic convention of the sample quantile: with rank r = floor(n *
    alpha) + 1 capped at n, a group is free exactly when its sample count
    stays at or below n - r.
    """
    n = samples.size
    vals, counts = np.unique(samples, return_counts=True)
    pos = vals > 0.0
    pvals = np.asarray(vals[pos], dtype=float)
    cpre = np.concatenate(([0], np.cumsum(counts[pos])))
    rank = order_stat_rank(n, alpha)
    thr = cpre[1:] - (n - rank)
    tstar = np.searchsorted(cpre, thr, side="left")
    return pvals, tstar


def _tranche_tables(model: LossModel, alpha: float):
    """Positive atom values and per-right-edge threshold indices.

    For a right edge j (1-based), the group (k+1..j) has zero quantile if and
    only if k >= tstar[j-1]; otherwise its quantile is pvals[tstar[j-1] - 1].
    """
    if model.kind == "uniform":
        raise TooManyAtoms(
            "continuous support has no finite atom list; discretize first"
        )
    if model.kind == "atoms":
        if model.values.size > MAX_SOLVER_ATOMS:
            raise TooManyAtoms(
                f"{model.values.size} atoms exceed the solver bound {MAX_SOLVER_ATOMS}"
            )
        return _float_tables(model.values, model.probs, alpha)
    distinct = np.unique(model.samples)
    if distinct.size > MAX_SOLVER_ATOMS:
        raise TooManyAtoms(
            f"{distinct.size} distinct sample values exceed the solver bound "
            f"{MAX_SOLVER_ATOMS}"
        )
    return _count_tables(model.samples, alpha)


def _dp_rows(tstar: np.ndarray, varpt: np.ndarray, rmax: int):
    """Suffix tables row by row: rows[r][i] covers atoms i..mp with r groups.

    Both branches of the recurrence are amortized O(1) per state. Free groups
    ending before index tstar reach the previous row through a sliding-window
    minimum whose ends only move left as i decreases; costly groups share a
    per-row array B[j] = varpt[j] + prev[j+1] folded right to left.
    """
    mp = varpt.size
    jz = np.searchsorted(tstar, np.arange(1, mp + 1), side="left") + 1
    prev = np.full(mp + 2, np.inf)
    prev[mp + 1] = 0.0
    rows = [prev]
    best = np.inf
    gstar = 0
    for r in range(1, rmax + 1):
        cur = np.full(mp + 2, np.inf)
        bcost = np.full(mp + 2, np.inf)
        bcost[1 : mp + 1] = varpt + prev[2:]
        window: deque[int] = deque()
        ptr = mp + 1
        rmin = np.inf
        for i in range(mp, 0, -1):
            k = i + 1
            v = prev[k]
            while window and prev[window[0]] >= v:
                window.popleft()
            window.appendleft(k)
            hi = min(int(jz[i - 1]), mp + 1)
            while window and window[-1] > hi:
                window.pop()
            zmin = prev[window[-1]] if window else np.inf
            lo = int(jz[i - 1])
            while ptr > lo:
                ptr -= 1
                if bcost[ptr] < rmin:
                    rmin = bcost[ptr]
            cur[i] = zmin if zmin <= rmin else rmin
        rows.append(cur)
        prev = cur
        if cur[1] < best:
            best = cur[1]
            gstar = r
        if best == 0.0:
            break
    return float(best), gstar, rows


def _walk_cuts(rows, tstar, varpt, pvals, gstar: int, max_loss: float) -> Partition:
    """Recover the lexicographically smallest cut vector achieving the optimum.

    Candidate values are recomputed with the same expressions the table used,
    so the equality test against the stored optimum is exact.
    """
    mp = varpt.size
    target = rows[gstar][1]
    cuts = [0.0]
    i = 1
    for r in range(gstar, 0, -1):
        nxt = rows[r - 1]
        for j in range(i, mp + 1):
            if tstar[j - 1] <= i - 1:
                cand = nxt[j + 1]
            else:
                cand = varpt[j - 1] + nxt[j + 1]
            if cand == target:
                if r > 1:
                    cuts.append((float(pvals[j - 1]) + float(pvals[j])) / 2.0)
                target = nxt[j + 1]
                i = j + 1
                break
        else:
            raise AssertionError("suffix table reconstruction lost the optimum")
    cuts.append(float(max_loss))
    return Partition(tuple(cuts))


def solve_tranche_dp(model: LossModel, level: RiskLevel | float, n: int) -> SolveResult:
    """Cheapest split of the support into at most n contiguous tranches.

    Ties break toward fewer groups first, then toward the lexicographically
    smallest cut vector, so the result is reproducible. Cuts land midway
    between adjacent support points.
    """
    lvl = as_level(level)
    if n < 1:
        raise InvalidBounds(f"need at least one tranche, got {n}")
    pvals, tstar = _tranche_tables(model, lvl.alpha)
    mp = pvals.size
    if mp == 0:
        raise InvalidBounds("all loss mass sits at zero; there is nothing to split")
    varpt = pvals[np.maximum(tstar, 1) - 1]
    best, gstar, rows = _dp_rows(tstar, varpt, min(n, mp))
    partition = _walk_cuts(rows, tstar, varpt, pvals, gstar, model.max_loss)
    return SolveResult(
        best_n=gstar, partition=partition, capital=best, objective=best
    )


def _group_var_direct(values, masses, a: int, b: int, alpha: float) -> float:
    """Strict quantile of one atom group, by direct cumulative scan."""
    seg = slice(a, b)
    pos = values[seg] > 0.0
    pv = values[seg][pos]
    pm = masses[seg][pos]
    if pv.size == 0:
        return 0.0
    cums = np.cumsum(np.concatenate(([1.0 - float(np.sum(pm))], pm)))
    idx = int(np.searchsorted(cums, alpha, side="right"))
    if idx == 0:
        return 0.0
    return float(pv[min(idx, pv.size) - 1])


def brute_force_oracle(model: LossModel, level: RiskLevel | float, n: int) -> float:
    """Minimal capital over at most n contiguous groups, by full enumeration.

    Exponential in the atom count, so capped hard; meant as an independent
    check on the dynamic program, not for production use.
    """
    alpha = as_level(level).alpha
    if model.kind != "atoms":
        raise InvalidBounds("the oracle enumerates explicit atom lists only")
    m = model.values.size
    if m > MAX_ORACLE_ATOMS:
        raise TooManyAtoms(f"{m} atoms exceed the oracle bound {MAX_ORACLE_ATOMS}")
    if n < 1:
        raise InvalidBounds(f"need at least one group, got {n}")
    values = model.values
    masses = model.probs
    best = np.inf
    for r in range(1, min(n, m) + 1):
        for inner in itertools.combinations(range(1, m), r - 1):
            bounds = (0, *inner, m)
            total = 0.0
            for a, b in zip(bounds, bounds[1:]):
                total += _group_var_direct(values, masses, a, b, alpha)
            if total < best:
                best = total
    return float(best)


def solve_with_overhead(
    model: LossModel,
    level: RiskLevel | float,
    n_max: int,
    overhead: OverheadSchedule | None = None,
) -> SolveResult:
    """Minimize capital(N) + overhead(N) over unit counts N = 1..n_max.

    Each N gets its own tranche solve; ties break toward smaller N. With a
    nondecreasing schedule the winning N always equals the number of groups
    its partition actually uses.
    """
    if n_max < 1:
        raise InvalidBounds(f"need at least one unit, got {n_max}")
    sched = overhead if overhead is not None else OverheadSchedule.none()
    if sched.variant == "table" and len(sched.costs) < n_max:
        raise InvalidBounds(
            f"table overhead covers 1..{len(sched.costs)} units, need {n_max}"
        )
    best: SolveResult | None = None
    for n_units in range(1, n_max + 1):
        res = solve_tranche_dp(model, level, n_units)
        obj = res.capital + sched.cost(n_units)
        if best is None or obj < best.objective:
            best = SolveResult(
                best_n=res.best_n,
                partition=res.partition,
                capital=res.capital,
                objective=float(obj),
            )
    return best
