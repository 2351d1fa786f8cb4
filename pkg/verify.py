"""Empirical checks of the stability bounds for fractal functions.

Every check compares exact lattice tables and reports the two sides of the
inequality it tests.  Sup norms are maxima over vertex lattices, so each
report is labelled ``sampled-norm`` and a pass is a necessary-condition
check rather than a certificate.
"""

from __future__ import annotations

import json
import logging
import math
from typing import Iterable, Sequence

import numpy as np

import config
from errors import InvalidArgument, ScaleOutOfRange
from field_expr import ScalarField
from fractal import (
    DEFAULT_COMPAT_TOL,
    RESIDUAL_TOL,
    ProblemSpec,
    rb_iterate,
    validate,
    vm_table,
)
from gasket import enumerate_vm
from models import PASS_SLACK, BoundReport, ScaleVector, SweepReport

logger = logging.getLogger(__name__)

# Deltas at or below this level are rounding noise, not contraction.
DELTA_FLOOR = 1e-13
RATIO_SLACK = 1e-9


def _norm_depth(m: int) -> int:
    return max(m, config.SUP_NORM_DEPTH)


def _lattice_sup(field: ScalarField, depth: int) -> float:
    lat = enumerate_vm(depth)
    return float(np.max(np.abs(field(lat.x, lat.y))))


def _fractal_sup(spec: ProblemSpec, m: int) -> float:
    return float(np.max(np.abs(vm_table(spec, _norm_depth(m)).values)))


def _sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def check_interpolation(
    spec: ProblemSpec, m_probe: int = 1, tol: float = RESIDUAL_TOL
) -> BoundReport:
    """max over V_1 of |F - f| against ``tol``."""
    depth = max(1, m_probe)
    table = vm_table(spec, depth)
    lat = table.lattice
    idx = lat.sublattice(1)
    f_vals = spec.f(lat.x[idx], lat.y[idx])
    lhs = float(np.max(np.abs(table.values[idx] - f_vals)))
    return BoundReport.build(
        "interpolation", lhs, tol, depth, {**spec.params(), "tol": tol}
    )


def check_alpha_continuity(
    f: ScalarField,
    b: ScalarField,
    alpha: ScaleVector,
    beta: ScaleVector,
    m: int,
    tol: float = DEFAULT_COMPAT_TOL,
) -> BoundReport:
    """|F^alpha - F^beta| <= |alpha - beta| / (1 - r) * (|F^alpha| + |b|)."""
    spec_a = validate(f, b, alpha, tol)
    spec_b = validate(f, b, beta, tol)
    lhs = _sup_distance(vm_table(spec_a, m).values, vm_table(spec_b, m).values)

    r = max(alpha.norm, beta.norm)
    coefficient = alpha.distance(beta) / (1 - r)
    norm_fa = _fractal_sup(spec_a, m)
    norm_b = _lattice_sup(b, _norm_depth(m))
    rhs = coefficient * (norm_fa + norm_b)
    logger.debug("alpha continuity %s vs %s: %g <= %g", alpha, beta, lhs, rhs)
    return BoundReport.build(
        "alpha-continuity",
        lhs,
        rhs,
        m,
        {
            "alpha": alpha.to_list(),
            "beta": beta.to_list(),
            "f": f.label,
            "b": b.label,
            "r": r,
            "coefficient": coefficient,
            "norm_f_alpha": norm_fa,
            "norm_b": norm_b,
        },
    )


def check_base_lipschitz(
    f: ScalarField,
    b: ScalarField,
    c: ScalarField,
    alpha: ScaleVector,
    m: int,
    tol: float = DEFAULT_COMPAT_TOL,
) -> BoundReport:
    """|F_b - F_c| <= |alpha| / (1 - |alpha|) * |b - c|."""
    spec_b = validate(f, b, alpha, tol)
    spec_c = validate(f, c, alpha, tol)
    lhs = _sup_distance(vm_table(spec_b, m).values, vm_table(spec_c, m).values)

    lipschitz = alpha.norm / (1 - alpha.norm)
    norm_diff = _lattice_sup(b - c, _norm_depth(m))
    rhs = lipschitz * norm_diff
    return BoundReport.build(
        "base-lipschitz",
        lhs,
        rhs,
        m,
        {
            "alpha": alpha.to_list(),
            "f": f.label,
            "b": b.label,
            "c": c.label,
            "lipschitz_constant": lipschitz,
            "norm_b_minus_c": norm_diff,
        },
    )


def _unit(direction: Sequence[float]) -> tuple[float, float, float]:
    if len(direction) != 3:
        raise InvalidArgument("sweep directions need three components")
    length = math.sqrt(sum(d * d for d in direction))
    if length == 0:
        raise InvalidArgument("sweep direction must be non-zero")
    return tuple(d / length for d in direction)


def modulus_sweep(
    f: ScalarField,
    b: ScalarField,
    alpha: ScaleVector,
    directions: Iterable[Sequence[float]],
    radii: Iterable[float],
    m: int,
    tol: float = DEFAULT_COMPAT_TOL,
) -> SweepReport:
    """Tabulate |F^alpha - F^beta| for beta = alpha + radius * direction and
    check the linear envelope K * |alpha - beta|."""
    radii = list(radii)
    probes = [
        alpha.shifted(radius, unit)
        for unit in (_unit(d) for d in directions)
        for radius in radii
    ]
    for beta in probes:
        if not beta.norm < 1.0:
            raise ScaleOutOfRange(beta.norm)

    spec_a = validate(f, b, alpha, tol)
    table_a = vm_table(spec_a, m).values
    r_max = max([alpha.norm] + [beta.norm for beta in probes])
    envelope = (_fractal_sup(spec_a, m) + _lattice_sup(b, _norm_depth(m))) / (1 - r_max)

    rows = []
    ok = True
    for beta in probes:
        distance = _sup_distance(table_a, vm_table(spec_a.with_alpha(beta), m).values)
        rows.append((beta, distance))
        if distance > envelope * alpha.distance(beta) + PASS_SLACK:
            ok = False
    return SweepReport(alpha, tuple(rows), ok, envelope, m)


def check_functional_residual(spec: ProblemSpec, m: int) -> BoundReport:
    """Largest functional-equation residual of the V_m table."""
    lhs = float(np.max(vm_table(spec, m).residuals()))
    return BoundReport.build(
        "functional-equation",
        lhs,
        spec.residual_tol,
        m,
        {**spec.params(), "v0_deviation": spec.v0_deviation},
    )


def contraction_ratios(tables: Sequence[np.ndarray], deltas: Sequence[float]) -> list[float]:
    """Ratios of successive deltas, ignoring deltas at rounding level.

    Each delta carries an absolute rounding error of a few ulps of the table
    magnitude; that amount is taken off the numerator before dividing.
    """
    scale = max(1.0, max(float(np.max(np.abs(g))) for g in tables))
    noise = 8 * np.finfo(float).eps * scale
    return [
        max(later - noise, 0.0) / earlier
        for earlier, later in zip(deltas, deltas[1:])
        if earlier > DELTA_FLOOR
    ]


def check_rb_contraction(spec: ProblemSpec, m: int, iters: int) -> BoundReport:
    """Worst ratio of successive operator-iteration deltas against |alpha|."""
    result = rb_iterate(spec, m, iters)
    lhs = max(contraction_ratios(result.tables, result.deltas), default=0.0)
    return BoundReport.build(
        "rb-contraction",
        lhs,
        spec.alpha.norm + RATIO_SLACK,
        m,
        {**spec.params(), "iterations": iters, "deltas": list(result.deltas)},
    )


def reports_to_json(reports: Iterable[BoundReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


__all__ = [
    "check_interpolation",
    "check_alpha_continuity",
    "check_base_lipschitz",
    "modulus_sweep",
    "check_functional_residual",
    "contraction_ratios",
    "check_rb_contraction",
    "reports_to_json",
]
