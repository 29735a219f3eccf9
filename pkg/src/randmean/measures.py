"""Finite atomic base measures and mean-defining functions.

Every measure in this package is a finite weighted sum of point masses on the
real line.  Continuous base densities enter through midpoint discretization,
so integration against a measure is always a finite weighted sum.  Values are
immutable after construction and safe to share across threads.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "BaseMeasure",
    "MeanFunction",
    "build_atomic_measure",
    "discretize_density",
    "integrate",
    "mean_function",
    "measure_to_json",
    "measure_from_json",
]

_MERGE_TOL = 0.0  # locations must match exactly to merge


@dataclass(frozen=True)
class BaseMeasure:
    """A finite measure given by atoms (x_k, w_k) with strictly increasing x_k.

    ``locations`` and ``weights`` are read-only float arrays of equal length;
    ``total_mass`` equals ``weights.sum()``.  Construct through
    :func:`build_atomic_measure` or :func:`discretize_density`, which take
    care of sorting, merging duplicates and validation.
    """

    locations: np.ndarray
    weights: np.ndarray
    total_mass: float = field(default=0.0)

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if loc.ndim != 1 or w.shape != loc.shape or loc.size == 0:
            raise ValueError("atoms must be two equal-length non-empty 1-d arrays")
        if not np.all(np.isfinite(loc)):
            raise ValueError("non-finite atom location")
        if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
            raise ValueError("atom weights must be finite and positive")
        if np.any(np.diff(loc) <= 0.0):
            raise ValueError("atom locations must be strictly increasing")
        loc.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)
        mass = float(w.sum())
        if self.total_mass:
            if abs(self.total_mass - mass) > 1e-12 * max(1.0, abs(mass)):
                raise ValueError("total_mass inconsistent with atom weights")
        object.__setattr__(self, "total_mass", mass)

    @property
    def n_atoms(self) -> int:
        return self.locations.size

    def normalized(self) -> "BaseMeasure":
        """The probability measure with the same atoms (weights / total mass)."""
        return BaseMeasure(self.locations, self.weights / self.total_mass)

    def scaled(self, c: float) -> "BaseMeasure":
        """The measure with every weight multiplied by c > 0."""
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return BaseMeasure(self.locations, c * self.weights)


def build_atomic_measure(pairs: Iterable[tuple[float, float]]) -> BaseMeasure:
    """Build a canonical BaseMeasure from (location, weight) pairs.

    Pairs may arrive unsorted; duplicate locations are merged by adding their
    weights.  Raises ValueError on empty input, non-positive weights or
    non-finite locations.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty atom list")
    loc = np.array([p[0] for p in pairs], dtype=float)
    w = np.array([p[1] for p in pairs], dtype=float)
    if not np.all(np.isfinite(loc)):
        raise ValueError("non-finite atom location")
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        raise ValueError("atom weights must be finite and positive")
    order = np.argsort(loc, kind="stable")
    loc, w = loc[order], w[order]
    keep = np.empty(loc.size, dtype=bool)
    keep[0] = True
    np.not_equal(loc[1:], loc[:-1], out=keep[1:])
    idx = np.cumsum(keep) - 1
    merged_w = np.zeros(int(idx[-1]) + 1)
    np.add.at(merged_w, idx, w)
    return BaseMeasure(loc[keep], merged_w)


def discretize_density(
    density: Callable[[np.ndarray], np.ndarray],
    support: tuple[float, float],
    n_nodes: int,
    mass: float,
) -> BaseMeasure:
    """Midpoint-rule atomization of a density on [lo, hi], renormalized to ``mass``.

    The atoms sit at cell midpoints; weights are proportional to the density
    there and rescaled so they sum to ``mass`` exactly.
    """
    lo, hi = float(support[0]), float(support[1])
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    if not lo < hi:
        raise ValueError("support must satisfy lo < hi")
    if mass <= 0:
        raise ValueError("mass must be positive")
    edges = np.linspace(lo, hi, n_nodes + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = np.asarray(density(mids), dtype=float)
    if vals.shape != mids.shape:
        vals = np.array([float(density(x)) for x in mids])
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise ValueError("density must be finite and nonnegative on the support")
    raw = vals * np.diff(edges)
    total = raw.sum()
    if total <= 0:
        raise ValueError("density integrates to zero on the support")
    keep = raw > 0
    return BaseMeasure(mids[keep], raw[keep] * (mass / total))


def integrate(f: Callable[[np.ndarray], np.ndarray], m: BaseMeasure) -> complex | float:
    """Sum of f against the measure's atoms: sum_k f(x_k) w_k.

    ``f`` may return real or complex values; it is called once with the full
    location array (with a scalar fallback).  Non-finite values raise.
    """
    vals = _eval_at(f, m.locations)
    out = np.sum(vals * m.weights)
    if np.iscomplexobj(vals):
        return complex(out)
    return float(out)


def _eval_at(f, locations: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(locations))
        if vals.shape != locations.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.asarray([f(float(x)) for x in locations])
    if not np.all(np.isfinite(vals)):
        raise ValueError("function evaluates non-finite at an atom")
    return vals


@dataclass(frozen=True)
class MeanFunction:
    """g evaluated on the atoms of a paired BaseMeasure, plus a report tag.

    Keeps a location -> value table so the same g can later be looked up at
    observation points that coincide with atoms.  All values must be finite.
    """

    locations: np.ndarray
    values: np.ndarray
    tag: str | None = None

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if loc.shape != vals.shape or loc.ndim != 1:
            raise ValueError("locations/values shape mismatch")
        if not np.all(np.isfinite(vals)):
            raise ValueError("mean function must be finite at every atom")
        loc.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "values", vals)

    def __call__(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(self.locations, x_arr)
        idx = np.clip(idx, 0, self.locations.size - 1)
        ok = np.isclose(self.locations[idx], x_arr, rtol=0.0, atol=0.0)
        if not np.all(ok):
            missing = x_arr[~ok]
            raise KeyError(f"mean function not defined at {missing[:3]}")
        out = self.values[idx]
        return float(out[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else out


def mean_function(
    g: Callable[[np.ndarray], np.ndarray],
    measure: BaseMeasure,
    tag: str | None = None,
) -> MeanFunction:
    """Tabulate g on the atoms of ``measure``, rejecting non-finite values."""
    vals = _eval_at(g, measure.locations)
    return MeanFunction(measure.locations, np.asarray(vals, dtype=float), tag)


def g_values(g, locations: np.ndarray) -> np.ndarray:
    """Evaluate a callable or MeanFunction at the given locations (float array)."""
    if isinstance(g, MeanFunction):
        return np.asarray(g(locations), dtype=float)
    return np.asarray(_eval_at(g, np.asarray(locations, dtype=float)), dtype=float)


def measure_to_json(m: BaseMeasure) -> str:
    """Serialize to the wire format {"atoms": [[x, w], ...]}."""
    return json.dumps({"atoms": [[float(x), float(w)] for x, w in zip(m.locations, m.weights)]})


def measure_from_json(text: str | dict) -> BaseMeasure:
    """Parse the {"atoms": [[x, w], ...]} wire format."""
    obj = json.loads(text) if isinstance(text, str) else text
    if not isinstance(obj, dict) or "atoms" not in obj:
        raise ValueError("expected an object with an 'atoms' field")
    atoms = obj["atoms"]
    if not isinstance(atoms, list) or not all(
        isinstance(a, (list, tuple)) and len(a) == 2 for a in atoms
    ):
        raise ValueError("'atoms' must be a list of [location, weight] pairs")
    return build_atomic_measure([(float(a[0]), float(a[1])) for a in atoms])
