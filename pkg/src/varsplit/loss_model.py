"""Bounded nonnegative loss distributions and their elementary queries.

Three model variants cover everything the rest of the package needs:

* ``atoms``: a finite discrete law given by strictly increasing values and
  strictly positive probabilities,
* ``empirical``: equally weighted observations, kept sorted,
* ``uniform``: a flat density on ``[lower, upper]``.

All losses live on ``[0, max_loss]``. Quantiles follow the strict-inequality
convention ``inf {x : P(X <= x) > p}``, which is what makes mass-starved
tranches carry a quantile of exactly zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import (
    CsvFormatError,
    EmptySupport,
    InvalidBounds,
    InvalidLevel,
    NegativeLoss,
    ProbsNotNormalized,
)

#: Absolute tolerance for "probabilities sum to one".
PROB_TOL = 1e-12

ModelKind = Literal["atoms", "empirical", "uniform"]


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Interval:
    """A slice ``[lo, hi)`` of the loss axis.

    ``closed_hi`` marks the final tranche of a partition, which also absorbs
    ``hi`` itself so that every realization lands in exactly one tranche.
    """

    lo: float
    hi: float
    closed_hi: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise InvalidBounds(
                f"interval bounds must be finite, got [{self.lo}, {self.hi})"
            )
        if self.lo < 0.0:
            raise InvalidBounds(f"interval must start at or above 0, got lo={self.lo}")
        if not self.lo < self.hi:
            raise InvalidBounds(f"interval needs lo < hi, got [{self.lo}, {self.hi})")

    def contains(self, x: float) -> bool:
        """Membership under the half-open closure rule."""
        if self.closed_hi and x == self.hi:
            return True
        return self.lo <= x < self.hi


def intervals_from_cuts(cuts: Sequence[float]) -> list[Interval]:
    """Turn increasing cut points into consecutive intervals.

    All intervals are half-open except the last, which is closed on the right
    so the top of the support is covered.
    """
    pts = [float(c) for c in cuts]
    if len(pts) < 2:
        raise InvalidBounds("need at least two cut points to form an interval")
    last = len(pts) - 2
    return [
        Interval(pts[k], pts[k + 1], closed_hi=(k == last)) for k in range(len(pts) - 1)
    ]


@dataclass(frozen=True, eq=False)
class LossModel:
    """A bounded loss distribution on ``[0, max_loss]``.

    Instances are immutable and should be built through :func:`atoms`,
    :func:`empirical`, :func:`uniform` or :func:`build_model`; the constructor
    validates but does not normalize its inputs.
    """

    kind: ModelKind
    values: np.ndarray | None = None
    probs: np.ndarray | None = None
    samples: np.ndarray | None = None
    lower: float = 0.0
    upper: float = 0.0
    max_loss: float = field(init=False, default=0.0)
    # Cumulative atom probabilities, with the final entry pinned to 1.0 so the
    # top of the support always answers cdf == 1 despite rounding dust.
    _cum: np.ndarray | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        if self.kind == "atoms":
            self._init_atoms()
        elif self.kind == "empirical":
            self._init_empirical()
        elif self.kind == "uniform":
            self._init_uniform()
        else:
            raise InvalidBounds(f"unknown model kind: {self.kind!r}")

    def _init_atoms(self):
        if self.values is None or self.probs is None:
            raise EmptySupport("atoms model needs values and probs")
        values = np.asarray(self.values, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if values.size == 0:
            raise EmptySupport("atoms model needs at least one support point")
        if values.shape != probs.shape:
            raise InvalidBounds(
                f"values and probs must align, got {values.size} vs {probs.size}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidBounds("atom values must be finite")
        if np.any(values < 0.0):
            raise NegativeLoss(f"atom values must be >= 0, got min {values.min()}")
        if values.size > 1 and not np.all(np.diff(values) > 0.0):
            raise InvalidBounds("atom values must be strictly increasing")
        if not np.all(np.isfinite(probs)) or np.any(probs <= 0.0):
            raise ProbsNotNormalized("atom probabilities must be strictly positive")
        total = float(np.sum(probs))
        if abs(total - 1.0) > PROB_TOL:
            raise ProbsNotNormalized(
                f"atom probabilities must sum to 1 within {PROB_TOL}, got {total!r}"
            )
        cum = np.cumsum(probs)
        cum[-1] = 1.0
        object.__setattr__(self, "_cum", _readonly(cum))
        object.__setattr__(self, "max_loss", float(values[-1]))

    def _init_empirical(self):
        if self.samples is None:
            raise EmptySupport("empirical model needs samples")
        samples = np.asarray(self.samples, dtype=float)
        if samples.size == 0:
            raise EmptySupport("empirical model needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise InvalidBounds("samples must be finite")
        if np.any(samples < 0.0):
            raise NegativeLoss(f"samples must be >= 0, got min {samples.min()}")
        if samples.size > 1 and np.any(np.diff(samples) < 0.0):
            raise InvalidBounds("samples must be sorted nondecreasing")
        object.__setattr__(self, "max_loss", float(samples[-1]))

    def _init_uniform(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidBounds("uniform bounds must be finite")
        if lo < 0.0:
            raise NegativeLoss(f"uniform lower bound must be >= 0, got {lo}")
        if not lo < hi:
            raise InvalidBounds(f"uniform needs lower < upper, got [{lo}, {hi}]")
        object.__setattr__(self, "max_loss", hi)


def atoms(values: Sequence[float], probs: Sequence[float]) -> LossModel:
    """Discrete loss law on strictly increasing nonnegative values."""
    return LossModel(kind="atoms", values=_readonly(values), probs=_readonly(probs))


def empirical(samples: Sequence[float]) -> LossModel:
    """Equally weighted observations; stored sorted."""
    arr = np.sort(np.asarray(samples, dtype=float))
    return LossModel(kind="empirical", samples=_readonly(arr))


def uniform(lower: float, upper: float) -> LossModel:
    """Flat density on ``[lower, upper]`` with ``0 <= lower < upper``."""
    return LossModel(kind="uniform", lower=float(lower), upper=float(upper))


def build_model(spec: dict) -> LossModel:
    """Build a model from a descriptor dict with a ``kind`` key.

    Accepted shapes: ``{"kind": "atoms", "values": [...], "probs": [...]}``,
    ``{"kind": "empirical", "samples": [...]}`` and
    ``{"kind": "uniform", "lower": a, "upper": b}``.
    """
    kind = spec.get("kind")
    if kind == "atoms":
        return atoms(spec["values"], spec["probs"])
    if kind == "empirical":
        return empirical(spec["samples"])
    if kind == "uniform":
        return uniform(spec["lower"], spec["upper"])
    raise InvalidBounds(f"unknown model kind: {kind!r}")


def describe(model: LossModel) -> str:
    """Short deterministic descriptor used in reports."""
    if model.kind == "atoms":
        pairs = ",".join(
            f"{float(v)}:{float(p)}" for v, p in zip(model.values, model.probs)
        )
        return f"atoms:{pairs}"
    if model.kind == "empirical":
        return f"empirical:n={model.samples.size}"
    return f"uniform:{model.lower},{model.upper}"


def cdf(model: LossModel, x: float) -> float:
    """Right-continuous distribution function ``P(X <= x)``."""
    x = float(x)
    if model.kind == "atoms":
        idx = int(np.searchsorted(model.values, x, side="right"))
        return float(model._cum[idx - 1]) if idx > 0 else 0.0
    if model.kind == "empirical":
        n = model.samples.size
        return float(np.searchsorted(model.samples, x, side="right")) / n
    if x < model.lower:
        return 0.0
    if x >= model.upper:
        return 1.0
    return (x - model.lower) / (model.upper - model.lower)


def order_stat_rank(n: int, p: float) -> int:
    """1-based order-statistic rank backing the strict quantile for samples."""
    return min(n, math.floor(n * p) + 1)


def quantile_strict(model: LossModel, p: float) -> float:
    """Strict-inequality quantile ``inf {x : cdf(x) > p}`` for p in (0, 1).

    For the empirical variant this is the order statistic of rank
    ``floor(n * p) + 1``.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidLevel(f"quantile level must lie in (0, 1), got {p}")
    if model.kind == "atoms":
        idx = int(np.searchsorted(model._cum, p, side="right"))
        return float(model.values[min(idx, model.values.size - 1)])
    if model.kind == "empirical":
        rank = order_stat_rank(model.samples.size, p)
        return float(model.samples[rank - 1])
    return model.lower + p * (model.upper - model.lower)


def mass_in(model: LossModel, iv: Interval) -> float:
    """Probability that a loss falls inside ``iv`` under its closure rule."""
    if model.kind == "uniform":
        lo = max(iv.lo, model.lower)
        hi = min(iv.hi, model.upper)
        if hi <= lo:
            return 0.0
        return (hi - lo) / (model.upper - model.lower)
    pts = model.values if model.kind == "atoms" else model.samples
    left = int(np.searchsorted(pts, iv.lo, side="left"))
    side = "right" if iv.closed_hi else "left"
    right = int(np.searchsorted(pts, iv.hi, side=side))
    if right <= left:
        return 0.0
    if model.kind == "atoms":
        return float(np.sum(model.probs[left:right]))
    return float(right - left) / pts.size


def sample(model: LossModel, seed: int, n: int) -> np.ndarray:
    """Draw ``n`` losses; identical (model, seed, n) gives identical output.

    Discrete variants use inverse-CDF transforms of one uniform stream, so a
    draw never leaves the declared support.
    """
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if model.kind == "uniform":
        return rng.uniform(model.lower, model.upper, size=n)
    u = rng.random(n)
    if model.kind == "atoms":
        idx = np.searchsorted(model._cum, u, side="right")
        idx = np.minimum(idx, model.values.size - 1)
        return model.values[idx].copy()
    m = model.samples.size
    idx = np.minimum((u * m).astype(np.int64), m - 1)
    return model.samples[idx].copy()


def distinct_atoms(model: LossModel) -> tuple[np.ndarray, np.ndarray]:
    """Distinct support points and their masses for a discrete model."""
    if model.kind == "atoms":
        return model.values.copy(), model.probs.copy()
    if model.kind == "empirical":
        vals, counts = np.unique(model.samples, return_counts=True)
        return vals, counts / model.samples.size
    raise InvalidBounds("a uniform model has no finite atom support")


def load_losses_csv(path) -> LossModel:
    """Read an empirical model from a single-column CSV.

    The file must carry the header ``loss`` followed by one nonnegative
    decimal per row. Errors name the offending row.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: file is empty, expected header 'loss'")
        if len(header) != 1 or header[0].strip().lstrip("﻿") != "loss":
            raise CsvFormatError(f"{path}: header must be 'loss', got {header!r}")
        losses = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 1:
                raise CsvFormatError(
                    f"{path}: row {lineno}: expected one column, got {len(row)}"
                )
            text = row[0].strip()
            try:
                value = float(text)
            except ValueError:
                raise CsvFormatError(f"{path}: row {lineno}: not a number: {text!r}")
            if not math.isfinite(value):
                raise CsvFormatError(f"{path}: row {lineno}: non-finite loss {text!r}")
            if value < 0.0:
                raise NegativeLoss(f"{path}: row {lineno}: negative loss {value}")
            losses.append(value)
    if not losses:
        raise EmptySupport(f"{path}: no loss rows found")
    return empirical(losses)
