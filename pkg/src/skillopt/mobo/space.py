"""Mixed-variable design space and its encoding into the unit cube."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from ..world_model import LearnableParamSpec

Candidate = dict


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterSpace:
    dims: tuple[LearnableParamSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(self.dims))
        if not self.dims:
            raise SpaceError("a parameter space needs at least one dimension")
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise SpaceError("dimension names must be unique")

    @property
    def D(self) -> int:
        return len(self.dims)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dims]

    def widths(self) -> list[int]:
        return [len(d.values) if d.kind == "categorical" else 1 for d in self.dims]

    @property
    def d(self) -> int:
        """Width of the encoded vector."""
        return sum(self.widths())

    def slices(self) -> list[slice]:
        out, start = [], 0
        for w in self.widths():
            out.append(slice(start, start + w))
            start += w
        return out

    def contains(self, candidate: Mapping[str, Any]) -> bool:
        return set(candidate) == set(self.names) and all(d.contains(candidate[d.name]) for d in self.dims)

    def encode(self, candidate: Mapping[str, Any]) -> np.ndarray:
        if set(candidate) != set(self.names):
            raise SpaceError(f"candidate keys {sorted(candidate)} differ from {self.names}")
        x = np.zeros(self.d)
        for dim, sl in zip(self.dims, self.slices()):
            value = candidate[dim.name]
            if not dim.contains(value):
                raise SpaceError(f"{dim.name}={value!r} is out of bounds")
            if dim.kind in ("real", "integer"):
                lo, hi = dim.bounds
                x[sl] = (float(value) - lo) / (hi - lo)
            elif dim.kind == "ordinal":
                m = len(dim.values)
                x[sl] = dim.values.index(value) / (m - 1) if m > 1 else 0.0
            else:
                x[sl.start + dim.values.index(value)] = 1.0
        return x

    def decode(self, x: Sequence[float]) -> Candidate:
        """Nearest legal candidate: clip, round integers/ordinals, argmax one-hot blocks."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise SpaceError(f"expected an encoded vector of width {self.d}")
        out: Candidate = {}
        for dim, sl in zip(self.dims, self.slices()):
            block = x[sl]
            if dim.kind == "real":
                lo, hi = dim.bounds
                u = min(max(float(block[0]), 0.0), 1.0)
                out[dim.name] = min(max(lo + u * (hi - lo), lo), hi)
            elif dim.kind == "integer":
                lo, hi = dim.bounds
                u = min(max(float(block[0]), 0.0), 1.0)
                out[dim.name] = int(min(max(round(lo + u * (hi - lo)), lo), hi))
            elif dim.kind == "ordinal":
                m = len(dim.values)
                u = min(max(float(block[0]), 0.0), 1.0)
                out[dim.name] = dim.values[int(round(u * (m - 1)))]
            else:
                out[dim.name] = dim.values[int(np.argmax(block))]
        return out

    def snap(self, x: Sequence[float]) -> np.ndarray:
        """Project an arbitrary point of the cube onto the encodings of legal candidates."""
        return self.encode(self.decode(x))

    def snap_many(self, X) -> np.ndarray:
        """Vectorized ``snap`` over the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise SpaceError(f"expected encoded rows of width {self.d}")
        out = np.clip(X, 0.0, 1.0)
        for dim, sl in zip(self.dims, self.slices()):
            if dim.kind == "integer":
                lo, hi = dim.bounds
                span = hi - lo
                if span > 0:
                    steps = np.clip(np.round(lo + out[:, sl] * span), lo, hi) - lo
                    out[:, sl] = steps / span
                else:
                    out[:, sl] = 0.0
            elif dim.kind == "ordinal":
                m = len(dim.values)
                out[:, sl] = np.round(out[:, sl] * (m - 1)) / (m - 1) if m > 1 else 0.0
            elif dim.kind == "categorical":
                block = np.zeros((len(X), sl.stop - sl.start))
                block[np.arange(len(X)), np.argmax(X[:, sl], axis=1)] = 1.0
                out[:, sl] = block
        return out

    def key(self, candidate: Mapping[str, Any]) -> tuple:
        return tuple(candidate[n] for n in self.names)

    def sample(self, rng: np.random.Generator) -> Candidate:
        """Uniform draw per dimension."""
        out: Candidate = {}
        for dim in self.dims:
            if dim.kind == "real":
                out[dim.name] = float(rng.uniform(*dim.bounds))
            elif dim.kind == "integer":
                out[dim.name] = int(rng.integers(dim.bounds[0], dim.bounds[1] + 1))
            else:
                out[dim.name] = dim.values[int(rng.integers(len(dim.values)))]
        return out

    def nominal(self) -> Candidate:
        """Planner defaults: each spec's nominal value, else the lower bound / first value."""
        out: Candidate = {}
        for dim in self.dims:
            if dim.nominal is not None:
                out[dim.name] = dim.nominal
            elif dim.kind in ("real", "integer"):
                out[dim.name] = dim.bounds[0]
            else:
                out[dim.name] = dim.values[0]
        return out


def sobol_points(d: int, n: int, seed: int) -> np.ndarray:
    """``n`` scrambled Sobol points in [0, 1]^d (n need not be a power of two)."""
    m = max(int(np.ceil(np.log2(max(n, 1)))), 0)
    pts = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(seed)).random_base2(m)
    return pts[:n]


def initial_design(space: ParameterSpace, n: int, seed: int) -> list[Candidate]:
    """Space-filling design decoded to legal candidates; duplicates are re-drawn from later points."""
    pts = sobol_points(space.d, max(4 * n, 64), seed)
    out: list[Candidate] = []
    seen: set = set()
    for x in pts:
        c = space.decode(x)
        k = space.key(c)
        if k in seen:
            continue
        seen.add(k)
        out.append(c)
        if len(out) == n:
            return out
    # tiny discrete spaces: allow repeats
    i = 0
    while len(out) < n:
        out.append(space.decode(pts[i % len(pts)]))
        i += 1
    return out
