"""Depth-``m`` disk approximation of a limit set, stored as a flat tree."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..conformal import SystemSpec, all_words, fold_words
from ..errors import InsufficientDepth

HULL_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class DiskApproximation:
    """Enclosing disks of ``psi_X(closed unit disk)`` for every word of
    length ``<= depth`` at ``offset``, level by level in lexicographic order.

    ``hull`` bounds every descendant leaf disk (slightly inflated for internal
    nodes), which makes branch-and-bound nearest-disk search exact. Leaves
    (the last level) keep their own radius.
    """

    offset: int
    depth: int
    degrees: tuple
    cx: np.ndarray
    cy: np.ndarray
    radius: np.ndarray
    hull: np.ndarray
    first_child: np.ndarray
    n_child: np.ndarray
    level_start: np.ndarray

    @property
    def leaf_start(self) -> int:
        return int(self.level_start[self.depth])

    @property
    def n_leaves(self) -> int:
        return len(self.cx) - self.leaf_start

    def level(self, n: int) -> slice:
        return slice(int(self.level_start[n]), int(self.level_start[n + 1]))

    def disks(self, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(centers, radii)`` of the level-``n`` enclosures (default: leaves)."""
        sl = self.level(self.depth if n is None else n)
        return self.cx[sl] + 1j * self.cy[sl], self.radius[sl]

    def ancestor(self, leaves: np.ndarray, n: int) -> np.ndarray:
        """Index among depth-``n`` words of each leaf's length-``n`` prefix."""
        width = 1
        for d in self.degrees[n:]:
            width *= d
        return np.asarray(leaves) // width

    @property
    def max_stack(self) -> int:
        return 2 + sum(self.degrees)

    @classmethod
    def build(cls, system: SystemSpec, offset: int, depth: int) -> "DiskApproximation":
        if depth < 1:
            raise ValueError("approximation depth must be at least 1")
        if offset + depth > system.depth_limit:
            raise InsufficientDepth(
                f"approximation needs generations up to {offset + depth}, system has {system.depth_limit}")
        degrees = tuple(system.degrees(offset, depth))
        centers, radii = [], []
        for n in range(depth + 1):
            digits = all_words(degrees[:n])
            z, _, r = fold_words(system, offset, digits)
            centers.append(z)
            radii.append(r)
        sizes = [len(c) for c in centers]
        level_start = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        hulls = [None] * (depth + 1)
        hulls[depth] = radii[depth].copy()
        for n in range(depth - 1, -1, -1):
            d = degrees[n]
            child_c = centers[n + 1].reshape(-1, d)
            child_h = hulls[n + 1].reshape(-1, d)
            reach = (np.abs(child_c - centers[n][:, None]) + child_h).max(axis=1)
            hulls[n] = np.maximum(radii[n], reach) * (1.0 + HULL_SLACK)
        first_child = np.full(level_start[-1], -1, dtype=np.int64)
        n_child = np.zeros(level_start[-1], dtype=np.int64)
        for n in range(depth):
            d = degrees[n]
            idx = np.arange(sizes[n])
            first_child[level_start[n]:level_start[n + 1]] = level_start[n + 1] + idx * d
            n_child[level_start[n]:level_start[n + 1]] = d
        allc = np.concatenate(centers)
        return cls(
            offset=offset,
            depth=depth,
            degrees=degrees,
            cx=np.ascontiguousarray(allc.real),
            cy=np.ascontiguousarray(allc.imag),
            radius=np.ascontiguousarray(np.concatenate(radii)),
            hull=np.ascontiguousarray(np.concatenate(hulls)),
            first_child=first_child,
            n_child=n_child,
            level_start=level_start,
        )

    def leaves_disjoint(self) -> bool:
        c, r = self.disks()
        if len(c) > 4096:
            raise ValueError("pairwise check limited to 4096 leaves")
        gap = np.abs(c[:, None] - c[None, :]) - r[:, None] - r[None, :]
        np.fill_diagonal(gap, np.inf)
        return bool(gap.min() > 0)

    def nested(self) -> bool:
        """Every level-``n+1`` enclosure lies inside its parent's enclosure."""
        for n in range(self.depth):
            c, r = self.disks(n)
            cc, rc = self.disks(n + 1)
            d = self.degrees[n]
            parent_c = np.repeat(c, d)
            parent_r = np.repeat(r, d)
            if np.any(np.abs(cc - parent_c) + rc > parent_r * (1 + 1e-12)):
                return False
        return True
