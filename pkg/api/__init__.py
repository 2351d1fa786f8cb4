"""API blueprint for the gasket fractal tools.

JSON endpoints mirroring the command-line commands.  Request fields follow
the CLI flags: ``figure`` or ``f``/``b``, ``alpha``, ``m``, ``tol``.
"""

from __future__ import annotations

from flask import Blueprint, Response, jsonify, request

import config
from cli import resolve_fields, table_csv
from errors import FractalError, InvalidArgument, NegativeDepth
from field_expr import FIGURE_COMPAT_TOL, ExprField
from fractal import (
    RESIDUAL_TOL,
    chaos_error_bound,
    chaos_game,
    eval_point,
    table_sample,
    validate,
    vm_table,
)
from models import Address, RunManifest, ScaleVector
from verify import (
    check_alpha_continuity,
    check_base_lipschitz,
    check_functional_residual,
    check_interpolation,
    check_rb_contraction,
)

MAX_CHAOS_POINTS = 100_000

api_bp = Blueprint("api", __name__, url_prefix="/api")


@api_bp.errorhandler(FractalError)
def fractal_error(exc: FractalError):
    return jsonify({"error": str(exc)}), 400


def _payload() -> dict:
    if not request.is_json:
        raise InvalidArgument("invalid JSON")
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise InvalidArgument("invalid JSON")
    return data


def _scale(value, name: str = "alpha") -> ScaleVector:
    if value is None:
        raise InvalidArgument(f"{name} is required")
    if isinstance(value, str):
        return ScaleVector.parse(value)
    try:
        return ScaleVector.from_sequence(value)
    except (TypeError, ValueError):
        raise InvalidArgument(f"invalid {name} {value!r}") from None


def _int(data: dict, key: str, default: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidArgument(f"{key} must be an integer")
    return value


def _depth(data: dict, default: int) -> int:
    m = _int(data, "m", default)
    if m < 0:
        raise NegativeDepth(m)
    return m


def _fields(data: dict):
    tol = data.get("tol")
    if tol is not None:
        try:
            tol = float(tol)
        except (TypeError, ValueError):
            raise InvalidArgument(f"invalid tol {tol!r}") from None
    return resolve_fields(data.get("figure"), data.get("f"), data.get("b"), tol)


@api_bp.route("/table", methods=["POST"])
def table():
    """Exact V_m table as CSV; cached per computation."""
    from app import cached_table_csv

    data = _payload()
    f, b, f_text, b_text, tol = _fields(data)
    alpha = _scale(data.get("alpha"))
    m = _depth(data, 6)
    spec = validate(f, b, alpha, tol)
    manifest = RunManifest("table", f_text, b_text, alpha, m, None, config.TOOL_VERSION, tol=tol)
    body = cached_table_csv(
        manifest, lambda: table_csv(table_sample(vm_table(spec, m)).points)
    )
    return Response(body, mimetype="text/csv")


@api_bp.route("/eval", methods=["POST"])
def evaluate():
    data = _payload()
    address = Address.parse(str(data.get("address", "")))
    f, b, _, _, tol = _fields(data)
    spec = validate(f, b, _scale(data.get("alpha")), tol)
    n = _int(data, "n", config.EVAL_DEPTH)
    corner = _int(data, "corner", 1)
    if n < 1:
        raise InvalidArgument("n must be at least 1")
    if corner not in (1, 2, 3):
        raise InvalidArgument(f"invalid corner {corner!r}")
    value, bound = eval_point(spec, address, n, corner)
    return jsonify({"value": value, "error_bound": bound})


@api_bp.route("/verify/<kind>", methods=["POST"])
def verify(kind: str):
    """Run one family of checks and return its reports."""
    data = _payload()
    f, b, _, _, tol = _fields(data)
    alpha = _scale(data.get("alpha"))
    m = _depth(data, 1 if kind == "interp" else 6)

    if kind == "alpha":
        reports = [
            check_alpha_continuity(f, b, alpha, _scale(data.get("beta"), "beta"), m, tol)
        ]
    elif kind == "base":
        c_texts = data.get("c")
        if isinstance(c_texts, str):
            c_texts = [c_texts]
        if not c_texts:
            raise InvalidArgument("c is required")
        reports = [
            check_base_lipschitz(f, b, ExprField.from_text(c), alpha, m, tol)
            for c in c_texts
        ]
    elif kind == "interp":
        bound = FIGURE_COMPAT_TOL if data.get("figure") is not None else RESIDUAL_TOL
        reports = [check_interpolation(validate(f, b, alpha, tol), m, bound)]
    elif kind == "residual":
        reports = [check_functional_residual(validate(f, b, alpha, tol), m)]
    elif kind == "contraction":
        iters = _int(data, "iters", 10)
        reports = [check_rb_contraction(validate(f, b, alpha, tol), m, iters)]
    else:
        return jsonify({"error": f"unknown check {kind!r}"}), 404

    return jsonify(
        {
            "reports": [r.to_dict() for r in reports],
            "pass": all(r.passed for r in reports),
        }
    )


@api_bp.route("/chaos", methods=["POST"])
def chaos():
    data = _payload()
    f, b, _, _, tol = _fields(data)
    spec = validate(f, b, _scale(data.get("alpha")), tol)
    count = _int(data, "points", 1000)
    if not 1 <= count <= MAX_CHAOS_POINTS:
        raise InvalidArgument(f"points must be between 1 and {MAX_CHAOS_POINTS}")
    seed = _int(data, "seed", 42)
    burn_in = _int(data, "burn_in", config.CHAOS_BURN_IN)
    if burn_in < 0:
        raise InvalidArgument("burn_in must be non-negative")
    sample = chaos_game(spec, count, seed, burn_in)
    return jsonify(
        {
            "points": sample.points.tolist(),
            "addresses": list(sample.addresses),
            "seed": seed,
            "z_error_bound": chaos_error_bound(spec, burn_in),
        }
    )
