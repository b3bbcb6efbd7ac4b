"""Graded radial meshes on (0, R].

Radially symmetric functions on a ball B_R(0) in R^N are stored on a
one-dimensional mesh of radii.  The origin itself is never a node; the
smallest node is the inner cutoff ``eps``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_DIMENSIONS = (4, 6, 8)
MIN_CELLS = 16
DEFAULT_RATIO = 0.97


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing radii ``nodes`` with ``nodes[-1] == R``.

    ``grading`` is ``"uniform"`` or ``"geometric"``; for geometric grids
    ``ratio`` is the constant quotient ``nodes[i] / nodes[i+1]``.
    """

    N: int
    R: float
    nodes: np.ndarray = field(repr=False)
    grading: str = "geometric"
    ratio: float | None = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a radial grid needs at least 3 nodes")
        if nodes[0] <= 0.0:
            raise ValueError("the origin is never stored; nodes must be > 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")

    @property
    def eps(self) -> float:
        return float(self.nodes[0])

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def m(self) -> int:
        """Polyharmonic order paired with this dimension (N = 2m)."""
        return self.N // 2

    @property
    def cells(self) -> int:
        """The ``n`` passed to :func:`build_grid`."""
        return self.n - 1 if self.grading == "geometric" else self.n

    def nodes_per_decade(self) -> float:
        span = np.log10(self.nodes[-1] / self.nodes[0])
        return (self.n - 1) / span if span > 0 else float("inf")

    def bracket(self, r: float) -> tuple[int, int]:
        """Indices ``(i, i+1)`` with ``nodes[i] <= r <= nodes[i+1]``."""
        if not self.eps <= r <= self.R:
            raise ValueError(f"r={r!r} outside [{self.eps}, {self.R}]")
        i = int(np.searchsorted(self.nodes, r, side="right")) - 1
        i = min(max(i, 0), self.n - 2)
        return i, i + 1

    def truncate(self, r_max: float) -> "RadialGrid":
        """Sub-grid of all nodes ``<= r_max``; ``r_max`` must be a node."""
        k = int(np.searchsorted(self.nodes, r_max, side="right"))
        if k == 0 or not np.isclose(self.nodes[k - 1], r_max, rtol=1e-12, atol=0.0):
            raise ValueError(f"{r_max!r} is not a node of this grid")
        return RadialGrid(self.N, float(self.nodes[k - 1]), self.nodes[:k].copy(),
                          self.grading, self.ratio)

    def descriptor(self) -> dict:
        out = {"N": self.N, "R": self.R, "n": self.cells, "grading": self.grading}
        if self.ratio is not None:
            out["q"] = self.ratio
        return out


def build_grid(N: int, R: float, n: int, grading: str = "geometric",
               q: float | None = None, eps: float | None = None) -> RadialGrid:
    """Build a radial grid on (0, R] in R^N.

    ``n`` counts cells.  A uniform grid has the ``n`` nodes ``R*i/n``,
    ``i = 1..n``.  A geometric grid has the ``n + 1`` nodes ``R*q**k``,
    ``k = n..0``, so that ``eps = R*q**n``.  For geometric grading either
    ``q`` or the inner cutoff ``eps`` may be given (``q`` then follows from
    ``eps = R*q**n``); with neither, ``q`` defaults to 0.97.
    """
    if N not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"dimension N={N} not in {SUPPORTED_DIMENSIONS}")
    if n < MIN_CELLS:
        raise ValueError(f"n={n} is below the minimum resolution {MIN_CELLS}")
    if not R > 0:
        raise ValueError("R must be positive")
    if grading == "uniform":
        nodes = R * np.arange(1, n + 1) / n
        nodes[-1] = R
        return RadialGrid(N, float(R), nodes, "uniform", None)
    if grading != "geometric":
        raise ValueError(f"unknown grading {grading!r}")
    if q is not None and eps is not None:
        raise ValueError("give q or eps, not both")
    if eps is not None:
        if not 0 < eps < R:
            raise ValueError("eps must lie in (0, R)")
        q = (eps / R) ** (1.0 / n)
    elif q is None:
        q = DEFAULT_RATIO
    if not 0.0 < q < 1.0:
        raise ValueError(f"geometric ratio q={q!r} must lie in (0, 1)")
    k = np.arange(n, -1, -1)
    nodes = R * np.exp(k * np.log(q))
    nodes[-1] = R
    return RadialGrid(N, float(R), nodes, "geometric", float(q))


def grid_from_descriptor(desc: dict) -> RadialGrid:
    q = desc.get("q")
    eps = None if q is not None else desc.get("eps")
    return build_grid(int(desc["N"]), float(desc.get("R", 1.0)), int(desc["n"]),
                      desc.get("grading", "geometric"),
                      q=None if q is None else float(q),
                      eps=None if eps is None else float(eps))
