"""Geometry of the Sierpinski gasket.

The gasket is the attractor of the three half-scale contractions
``u_i(t) = (t + x_i) / 2`` toward the corners of the unit equilateral
triangle.  Vertex lattices V_m are enumerated exactly: every vertex of V_m is
``(p * x_2 + q * x_3) / 2**m`` for integers ``p, q >= 0`` with
``p + q <= 2**m``, so deduplication compares integers rather than floats.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator

import numpy as np

from errors import DepthTooLarge, NegativeDepth, NotOnGasket, OutOfCell
from models import Address, Point2, VertexId

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)
HEIGHT = SQRT3 / 2

X1 = Point2(0.0, 0.0)
X2 = Point2(1.0, 0.0)
X3 = Point2(0.5, HEIGHT)
CORNERS = {1: X1, 2: X2, 3: X3}
CELLS = (1, 2, 3)

MAX_DEPTH = 12
MEMBERSHIP_TOL = 1e-9
DEDUP_TOL = 1e-12


def base_vertices() -> tuple[Point2, Point2, Point2]:
    """Return the corners x_1, x_2, x_3 of the unit equilateral triangle."""
    return X1, X2, X3


def corner(j: int) -> Point2:
    try:
        return CORNERS[j]
    except KeyError:
        raise ValueError(f"cell index must be 1, 2 or 3, got {j!r}") from None


def apply_map(i: int, t: Point2) -> Point2:
    c = corner(i)
    return Point2((t.x + c.x) / 2, (t.y + c.y) / 2)


def barycentric(x, y):
    """Barycentric coordinates (l1, l2, l3) with respect to x_1, x_2, x_3.

    Works for floats and numpy arrays alike; each coordinate is exactly 0 or
    1 at the corners.
    """
    l3 = 2 * y / SQRT3
    l2 = x - l3 / 2
    l1 = 1 - x - l3 / 2
    return l1, l2, l3


def in_triangle(t: Point2, tol: float = MEMBERSHIP_TOL) -> bool:
    return min(barycentric(t.x, t.y)) >= -tol


def in_cell(i: int, t: Point2, tol: float = MEMBERSHIP_TOL) -> bool:
    c = corner(i)
    return in_triangle(Point2(2 * t.x - c.x, 2 * t.y - c.y), 2 * tol)


def invert_map(i: int, t: Point2, tol: float = MEMBERSHIP_TOL) -> Point2:
    if not in_cell(i, t, tol):
        raise OutOfCell(f"({t.x}, {t.y}) is not in cell u_{i}")
    c = corner(i)
    return Point2(2 * t.x - c.x, 2 * t.y - c.y)


def address_to_point(v: VertexId | Address, corner_index: int | None = None) -> Point2:
    """Evaluate u_{i1} o ... o u_{im}(x_j) for a vertex id or an address."""
    if isinstance(v, VertexId):
        address, j = v.address, v.corner
    else:
        address, j = v, corner_index or 1
    point = corner(j)
    for letter in reversed(address.word):
        point = apply_map(letter, point)
    return point


def cell_contains(address: Address, t: Point2, tol: float = MEMBERSHIP_TOL) -> bool:
    """True when ``t`` lies in the closed cell named by ``address``."""
    scaled_tol = tol
    s = t
    for letter in address.word:
        c = corner(letter)
        s = Point2(2 * s.x - c.x, 2 * s.y - c.y)
        scaled_tol *= 2
    return in_triangle(s, scaled_tol)


def locate(t: Point2, depth: int, tol: float = MEMBERSHIP_TOL) -> Address:
    """Return the depth-``depth`` cell containing ``t``.

    Shared boundary points resolve to the smallest cell index at each level.
    """
    if depth < 0:
        raise NegativeDepth(depth)
    if not in_triangle(t, tol):
        raise NotOnGasket(f"({t.x}, {t.y}) is outside the base triangle")

    def descend(s: Point2, scaled_tol: float, remaining: int) -> tuple[int, ...] | None:
        if remaining == 0:
            return ()
        for i in CELLS:
            if not in_cell(i, s, scaled_tol):
                continue
            c = corner(i)
            inner = Point2(2 * s.x - c.x, 2 * s.y - c.y)
            rest = descend(inner, scaled_tol * 2, remaining - 1)
            if rest is not None:
                return (i,) + rest
        return None

    word = descend(t, tol, depth)
    if word is None:
        raise NotOnGasket(f"no depth-{depth} cell contains ({t.x}, {t.y})")
    return Address(word)


@dataclass(frozen=True, eq=False)
class VmLattice:
    """Canonical vertices of V_m in lexicographic (word, corner) order."""

    m: int
    p: np.ndarray
    q: np.ndarray
    corners: np.ndarray
    words: tuple[str, ...]

    def __len__(self) -> int:
        return int(self.p.shape[0])

    @property
    def scale(self) -> int:
        return 2 ** self.m

    @cached_property
    def xy(self) -> np.ndarray:
        n = self.scale
        xy = np.empty((len(self), 2))
        xy[:, 0] = (self.p + self.q / 2) / n
        xy[:, 1] = self.q * HEIGHT / n
        xy.setflags(write=False)
        return xy

    @property
    def x(self) -> np.ndarray:
        return self.xy[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.xy[:, 1]

    def _encode(self, p, q):
        return np.asarray(p, dtype=np.int64) * (self.scale + 1) + np.asarray(q, dtype=np.int64)

    @cached_property
    def _sorted(self) -> tuple[np.ndarray, np.ndarray]:
        keys = self._encode(self.p, self.q)
        order = np.argsort(keys, kind="stable")
        return keys[order], order

    def lookup(self, p, q) -> np.ndarray:
        """Indices of the vertices with integer coordinates ``(p, q)``."""
        keys = self._encode(p, q)
        sorted_keys, order = self._sorted
        pos = np.searchsorted(sorted_keys, keys)
        pos = np.clip(pos, 0, len(sorted_keys) - 1)
        if not np.array_equal(sorted_keys[pos], keys):
            raise KeyError("coordinates not in lattice")
        return order[pos]

    def vertex_id(self, k: int) -> VertexId:
        word = Address(tuple(int(ch) for ch in self.words[k]))
        return VertexId(word, int(self.corners[k]))

    def vertex_ids(self) -> Iterator[VertexId]:
        for k in range(len(self)):
            yield self.vertex_id(k)

    def point(self, k: int) -> Point2:
        return Point2(float(self.xy[k, 0]), float(self.xy[k, 1]))

    def sublattice(self, k: int) -> np.ndarray:
        """Indices of the V_k vertices inside this V_m lattice."""
        if k > self.m:
            raise ValueError(f"V_{k} is not contained in V_{self.m}")
        step = 2 ** (self.m - k)
        mask = (self.p % step == 0) & (self.q % step == 0)
        return np.flatnonzero(mask)

    @cached_property
    def branch_parents(self) -> tuple[np.ndarray, np.ndarray]:
        """For each vertex t: the smallest i with t in u_i(gasket) and the
        index of u_i^{-1}(t), which lies in V_{m-1} and hence in V_m."""
        n = self.scale
        p, q = self.p, self.q
        branch = np.where(2 * (p + q) <= n, 1, np.where(2 * p >= n, 2, 3))
        pp = 2 * p - np.where(branch == 2, n, 0)
        qq = 2 * q - np.where(branch == 3, n, 0)
        parent = self.lookup(pp, qq)
        branch.setflags(write=False)
        parent.setflags(write=False)
        return branch, parent


def _freeze(*arrays: np.ndarray) -> None:
    for arr in arrays:
        arr.setflags(write=False)


def vertex_count(m: int) -> int:
    return (3 ** (m + 1) + 3) // 2


@lru_cache(maxsize=None)
def enumerate_vm(m: int) -> VmLattice:
    """All distinct vertices u_w(x_j), |w| = m, with canonical ids."""
    if m < 0:
        raise NegativeDepth(m)
    if m > MAX_DEPTH:
        raise DepthTooLarge(m, MAX_DEPTH)
    if m == 0:
        p = np.array([0, 1, 0], dtype=np.int64)
        q = np.array([0, 0, 1], dtype=np.int64)
        corners = np.array([1, 2, 3], dtype=np.int8)
        _freeze(p, q, corners)
        return VmLattice(0, p, q, corners, ("", "", ""))

    prev = enumerate_vm(m - 1)
    half = 2 ** (m - 1)
    cand_p = np.concatenate([prev.p + (half if i == 2 else 0) for i in CELLS])
    cand_q = np.concatenate([prev.q + (half if i == 3 else 0) for i in CELLS])
    keys = cand_p * (2 ** m + 1) + cand_q
    _, first = np.unique(keys, return_index=True)
    # first occurrence in (branch, canonical parent) order is the
    # lexicographically smallest (word, corner) representation
    first.sort()

    size = len(prev)
    branch = first // size + 1
    source = first % size
    words = tuple(str(b) + prev.words[s] for b, s in zip(branch.tolist(), source.tolist()))
    p, q = cand_p[first], cand_q[first]
    corners = prev.corners[source]
    _freeze(p, q, corners)
    lattice = VmLattice(m, p, q, corners, words)
    logger.debug("enumerated V_%d with %d vertices", m, len(lattice))
    return lattice


def vertex_coordinates(v: VertexId) -> tuple[int, int, int]:
    """Integer coordinates (p, q) of ``v`` at scale 2**depth, plus the scale."""
    j = v.corner
    p, q, s = int(j == 2), int(j == 3), 1
    for letter in reversed(v.address.word):
        # u_i maps (p, q) at scale s to (p, q) + s * x_i at scale 2s
        p += s if letter == 2 else 0
        q += s if letter == 3 else 0
        s *= 2
    return p, q, s


def representations(m: int) -> Iterator[tuple[VertexId, int]]:
    """Every (word, corner) pair of depth ``m`` with its lattice index.

    Non-canonical pairs are the duplicate names of shared vertices.
    """
    lattice = enumerate_vm(m)
    for word in itertools.product(CELLS, repeat=m):
        text = "".join(str(i) for i in word)
        for j in CELLS:
            p, q, _ = vertex_coordinates(VertexId(Address(word), j))
            k = int(lattice.lookup([p], [q])[0])
            canonical = lattice.words[k] == text and int(lattice.corners[k]) == j
            yield VertexId(Address(word), j, canonical), k


__all__ = [
    "SQRT3",
    "X1",
    "X2",
    "X3",
    "CELLS",
    "MAX_DEPTH",
    "MEMBERSHIP_TOL",
    "DEDUP_TOL",
    "base_vertices",
    "corner",
    "apply_map",
    "barycentric",
    "in_triangle",
    "in_cell",
    "invert_map",
    "address_to_point",
    "cell_contains",
    "locate",
    "VmLattice",
    "vertex_count",
    "enumerate_vm",
    "vertex_coordinates",
    "representations",
]
