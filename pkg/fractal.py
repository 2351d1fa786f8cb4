"""Construction and evaluation of alpha-fractal functions on the gasket.

For an original function ``f``, a base function ``b`` agreeing with ``f`` on
V_0 and a scale vector ``alpha`` with max-norm below 1, the fractal function
is the unique continuous solution of

    F(t) = f(t) + alpha_i * (F - b)(u_i^{-1}(t))    for t in u_i(gasket).

Three independent evaluators are provided: exact forward recursion over the
vertex lattices (``vm_table``), iteration of the fixed-point operator on a
lattice (``rb_iterate``) and truncated unrolling along an address
(``eval_point``).  ``chaos_game`` samples the graph stochastically.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

import config
from errors import (
    ConsistencyFailure,
    DepthTooLarge,
    DomainError,
    IncompatibleBase,
    InvalidArgument,
    NegativeDepth,
    NotOnGasket,
)
from field_expr import ScalarField
from gasket import (
    CELLS,
    MAX_DEPTH,
    VmLattice,
    address_to_point,
    apply_map,
    barycentric,
    base_vertices,
    enumerate_vm,
    vertex_coordinates,
)
from models import Address, GraphSample, ScaleVector, VertexId

logger = logging.getLogger(__name__)

DEFAULT_COMPAT_TOL = 1e-9
RESIDUAL_TOL = 1e-10
RB_MAX_DEPTH = 10
SUP_NORM_MAX_DEPTH = 10
# Largest V_0 gap of b from f the shared-vertex check absorbs. The figure
# bases write 0.866 for sqrt(3)/2, leaving about 6.35e-6 at x_3.
VERTEX_GAP_ALLOWANCE = 1e-5
# Number of most recent map choices kept as a chaos-game point's address.
ADDRESS_MEMORY = 64


def v0_deviations(f: ScalarField, b: ScalarField) -> list[float]:
    return [abs(b.at(p) - f.at(p)) for p in base_vertices()]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    f: ScalarField
    b: ScalarField
    alpha: ScaleVector
    compat_tol: float = DEFAULT_COMPAT_TOL

    @cached_property
    def v0_deviation(self) -> float:
        return max(v0_deviations(self.f, self.b))

    @property
    def consistency_tol(self) -> float:
        return RESIDUAL_TOL + 2 * self.alpha.norm * min(self.compat_tol, VERTEX_GAP_ALLOWANCE)

    @property
    def residual_tol(self) -> float:
        return RESIDUAL_TOL + self.alpha.norm * self.v0_deviation

    @cached_property
    def norm_bounds(self) -> tuple[float, float, float]:
        """Sampled ``(|f|, |b|, U)`` where U bounds the fixed point a priori."""
        big_f = sup_norm_estimate(self.f)
        big_b = sup_norm_estimate(self.b)
        r = self.alpha.norm
        return big_f, big_b, (big_f + r * big_b) / (1 - r)

    def tail_bound(self, n: int) -> float:
        """|alpha|^n * (U + B): bound on a dropped remainder after n steps."""
        _, big_b, big_u = self.norm_bounds
        return self.alpha.norm ** n * (big_u + big_b)

    def with_alpha(self, alpha: ScaleVector) -> "ProblemSpec":
        return validate(self.f, self.b, alpha, self.compat_tol)

    def with_base(self, b: ScalarField) -> "ProblemSpec":
        return validate(self.f, b, self.alpha, self.compat_tol)

    def params(self) -> dict:
        return {
            "f": self.f.label,
            "b": self.b.label,
            "alpha": self.alpha.to_list(),
            "compat_tol": self.compat_tol,
        }


def validate(
    f: ScalarField,
    b: ScalarField,
    alpha: ScaleVector,
    tol: float = DEFAULT_COMPAT_TOL,
) -> ProblemSpec:
    alpha.require_contractive()
    deviations = v0_deviations(f, b)
    if not np.all(np.isfinite(deviations)):
        raise DomainError("f or b is not finite on V_0")
    worst = max(range(3), key=lambda j: deviations[j])
    if deviations[worst] > tol:
        raise IncompatibleBase(worst + 1, deviations[worst], tol)
    spec = ProblemSpec(f, b, alpha, tol)
    if deviations[worst] > DEFAULT_COMPAT_TOL:
        logger.warning(
            "base agrees with f on V_0 only to %.3g (tolerance %.3g)",
            deviations[worst],
            tol,
        )
    return spec


# -- exact lattice tables ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class VmTable:
    m: int
    lattice: VmLattice
    values: np.ndarray
    spec: ProblemSpec

    def __len__(self) -> int:
        return len(self.lattice)

    def index_of(self, v: VertexId) -> int:
        p, q, scale = vertex_coordinates(v)
        if scale > self.lattice.scale:
            raise NotOnGasket(f"vertex of depth {v.address.depth} is not in V_{self.m}")
        factor = self.lattice.scale // scale
        return int(self.lattice.lookup([p * factor], [q * factor])[0])

    def value_at(self, v: VertexId) -> float:
        return float(self.values[self.index_of(v)])

    def residuals(self) -> np.ndarray:
        """|F(t) - f(t) - alpha_i (F - b)(u_i^{-1} t)| at every vertex."""
        lat = self.lattice
        branch, parent = lat.branch_parents
        f_vals = self.spec.f(lat.x, lat.y)
        b_vals = self.spec.b(lat.x, lat.y)
        alpha = self.spec.alpha.as_array()[branch - 1]
        predicted = f_vals + alpha * (self.values[parent] - b_vals[parent])
        return np.abs(self.values - predicted)

    def as_field(self) -> "TableField":
        return TableField(self)


def _check_depth(m: int, limit: int) -> None:
    if m < 0:
        raise NegativeDepth(m)
    if m > limit:
        raise DepthTooLarge(m, limit)


def vm_table(spec: ProblemSpec, m: int) -> VmTable:
    """Exact values on V_m by forward recursion of the functional equation."""
    _check_depth(m, MAX_DEPTH)
    alpha = spec.alpha.as_array()
    prev = enumerate_vm(0)
    # F = f on V_0: each corner is the fixed point of its own map
    values = np.array(spec.f(prev.x, prev.y), dtype=float)

    for k in range(1, m + 1):
        lat = enumerate_vm(k)
        half = 2 ** (k - 1)
        cand_p = np.concatenate([prev.p + (half if i == 2 else 0) for i in CELLS])
        cand_q = np.concatenate([prev.q + (half if i == 3 else 0) for i in CELLS])
        cand_idx = lat.lookup(cand_p, cand_q)

        f_lat = spec.f(lat.x, lat.y)
        offset = values - spec.b(prev.x, prev.y)
        cand_vals = f_lat[cand_idx] + np.repeat(alpha, len(prev)) * np.tile(offset, 3)

        chosen = np.empty(len(lat))
        # candidates are ordered by branch, so the first one per vertex comes
        # from the smallest cell index
        _, first = np.unique(cand_idx, return_index=True)
        chosen[cand_idx[first]] = cand_vals[first]
        chosen[lat.lookup(2 * prev.p, 2 * prev.q)] = values

        spread = float(np.max(np.abs(cand_vals - chosen[cand_idx])))
        if spread > spec.consistency_tol:
            raise ConsistencyFailure(k, spread, spec.consistency_tol)

        values, prev = chosen, lat

    values.setflags(write=False)
    logger.debug("built V_%d table with %d values", m, len(values))
    return VmTable(m, prev, values, spec)


class TableField(ScalarField):
    """A scalar field known only at the vertices of a V_m table."""

    kind = "table-backed"

    def __init__(self, table: VmTable) -> None:
        self.table = table
        self.label = f"table(V_{table.m})"

    def __call__(self, x, y):
        lat = self.table.lattice
        n = lat.scale
        _, l2, l3 = barycentric(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        p = np.rint(l2 * n)
        q = np.rint(l3 * n)
        if np.any(np.abs(l2 * n - p) > 1e-6) or np.any(np.abs(l3 * n - q) > 1e-6):
            raise NotOnGasket(f"point is not a vertex of V_{self.table.m}")
        try:
            idx = lat.lookup(p.astype(np.int64), q.astype(np.int64))
        except KeyError:
            raise NotOnGasket(f"point is not a vertex of V_{self.table.m}") from None
        values = self.table.values[idx]
        return float(values) if np.ndim(x) == 0 else values.copy()


def sup_norm_estimate(g: ScalarField | VmTable, sample_depth: int | None = None) -> float:
    """Max of |g| over the V_M vertices.

    A lower estimate of the true sup norm; table-backed fields use their
    stored values.
    """
    if isinstance(g, VmTable):
        g = g.as_field()
    if isinstance(g, TableField):
        return float(np.max(np.abs(g.table.values)))
    depth = config.SUP_NORM_DEPTH if sample_depth is None else sample_depth
    _check_depth(depth, SUP_NORM_MAX_DEPTH)
    lat = enumerate_vm(depth)
    return float(np.max(np.abs(g(lat.x, lat.y))))


# -- pointwise evaluation ---------------------------------------------------


def eval_point(
    spec: ProblemSpec,
    addr: Address,
    expansion_depth: int,
    corner: int = 1,
) -> tuple[float, float]:
    """Unroll the functional equation ``expansion_depth`` times.

    The address is anchored at the image of corner ``x_corner`` and extended
    with the letter ``corner`` (which fixes that corner) past its length.
    Returns the truncated value and the bound on the dropped remainder.
    """
    n = expansion_depth
    if n < 1:
        raise InvalidArgument("expansion depth must be at least 1")
    letters = list(addr.word[:n]) + [corner] * max(0, n - addr.depth)

    # suffix points t_k = u_{w_k+1} o ... (x_corner), innermost first
    points = [None] * (len(letters) + 1)
    tail = Address(tuple(addr.word[n:]))
    points[-1] = address_to_point(tail, corner)
    for k in range(len(letters) - 1, -1, -1):
        points[k] = apply_map(letters[k], points[k + 1])

    value = spec.f.at(points[0])
    weight = 1.0
    for k in range(1, n):
        weight *= spec.alpha[letters[k - 1]]
        if weight == 0.0:
            break
        t = points[k]
        value += weight * (spec.f.at(t) - spec.b.at(t))
    return value, spec.tail_bound(n)


class RBIteration(NamedTuple):
    tables: tuple[np.ndarray, ...]
    deltas: tuple[float, ...]


def rb_iterate(spec: ProblemSpec, m: int, iters: int) -> RBIteration:
    """Iterate g -> f + alpha_i (g - b) o u_i^{-1} on V_m, starting at g = f."""
    if iters < 1:
        raise InvalidArgument("at least one iteration is required")
    _check_depth(m, RB_MAX_DEPTH)
    lat = enumerate_vm(m)
    branch, parent = lat.branch_parents
    f_vals = spec.f(lat.x, lat.y)
    b_parent = spec.b(lat.x, lat.y)[parent]
    alpha = spec.alpha.as_array()[branch - 1]

    g = f_vals
    tables = [g]
    deltas = []
    for _ in range(iters):
        g_next = f_vals + alpha * (g[parent] - b_parent)
        deltas.append(float(np.max(np.abs(g_next - g))))
        tables.append(g_next)
        g = g_next
    logger.debug("rb iteration on V_%d: deltas %s", m, deltas)
    return RBIteration(tuple(tables), tuple(deltas))


# -- chaos game -------------------------------------------------------------


def chaos_game(
    spec: ProblemSpec,
    count: int,
    seed: int,
    burn_in: int | None = None,
) -> GraphSample:
    """Sample graph(F) by applying randomly chosen maps H_i.

    H_i(t, z) = (u_i(t), alpha_i z + f(u_i(t)) - alpha_i b(t)).
    """
    if count < 1:
        raise InvalidArgument("count must be at least 1")
    burn_in = config.CHAOS_BURN_IN if burn_in is None else burn_in
    if burn_in < 0:
        raise InvalidArgument("burn-in must be non-negative")
    rng = np.random.default_rng(seed)
    choices = rng.integers(1, 4, size=burn_in + count).tolist()

    t = base_vertices()[0]
    z = spec.f.at(t)
    history: deque[int] = deque(maxlen=ADDRESS_MEMORY)
    points = np.empty((count, 3))
    addresses = []
    for step, i in enumerate(choices):
        a = spec.alpha[i]
        t_next = apply_map(i, t)
        z = a * z + spec.f.at(t_next) - a * spec.b.at(t)
        t = t_next
        history.appendleft(i)
        row = step - burn_in
        if row >= 0:
            points[row] = (t.x, t.y, z)
            addresses.append("".join(str(letter) for letter in history))
    points.setflags(write=False)
    return GraphSample(points, "chaos-game", seed, tuple(addresses))


def chaos_error_bound(spec: ProblemSpec, burn_in: int) -> float:
    return spec.tail_bound(burn_in)


def table_sample(table: VmTable) -> GraphSample:
    lat = table.lattice
    points = np.column_stack([lat.x, lat.y, table.values])
    points.setflags(write=False)
    return GraphSample(points, "table")


__all__ = [
    "DEFAULT_COMPAT_TOL",
    "RESIDUAL_TOL",
    "ProblemSpec",
    "validate",
    "v0_deviations",
    "VmTable",
    "vm_table",
    "TableField",
    "sup_norm_estimate",
    "eval_point",
    "RBIteration",
    "rb_iterate",
    "chaos_game",
    "chaos_error_bound",
    "table_sample",
]
