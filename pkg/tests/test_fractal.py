import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from conftest import figure_spec
from errors import (
    ConsistencyFailure,
    DepthTooLarge,
    DomainError,
    IncompatibleBase,
    InvalidArgument,
    NegativeDepth,
    NotOnGasket,
    ScaleOutOfRange,
)
from field_expr import ConstantField, ExprField, builtin_figure_fields
from fractal import (
    ProblemSpec,
    chaos_error_bound,
    chaos_game,
    eval_point,
    rb_iterate,
    sup_norm_estimate,
    table_sample,
    validate,
    vm_table,
)
from gasket import enumerate_vm, in_triangle
from models import Address, Point2, ScaleVector, VertexId
from verify import contraction_ratios


def _max_dev_from_f(table):
    lat = table.lattice
    return float(np.max(np.abs(table.values - table.spec.f(lat.x, lat.y))))


def test_validate_figure_one():
    f, b = builtin_figure_fields(1)
    spec = validate(f, b, ScaleVector.uniform(0.3), 1e-9)
    assert spec.v0_deviation <= 1e-12


def test_validate_rejects_offset_base():
    f = ExprField.from_text('x*y + 2')
    b = f + ConstantField(1.0)
    with pytest.raises(IncompatibleBase) as exc:
        validate(f, b, ScaleVector.uniform(0.1))
    assert exc.value.deviation == pytest.approx(1.0)
    assert exc.value.vertex in (1, 2, 3)
    assert exc.value.exit_code == 3


def test_validate_rejects_unit_scale():
    f, b = builtin_figure_fields(1)
    with pytest.raises(ScaleOutOfRange):
        validate(f, b, ScaleVector(1.0, 0.0, 0.0))


def test_figure_bases_need_lenient_tolerance():
    f, b = builtin_figure_fields(2)
    with pytest.raises(IncompatibleBase) as exc:
        validate(f, b, ScaleVector.uniform(0.3))
    assert exc.value.vertex == 3


def test_zero_alpha_reproduces_f():
    f, b = builtin_figure_fields(3)
    spec = validate(f, b, ScaleVector.uniform(0.0), 1e-3)
    assert _max_dev_from_f(vm_table(spec, 6)) <= 1e-12


def test_equal_base_reproduces_f(random_specs):
    for spec in random_specs[:5]:
        same = validate(spec.f, spec.f, spec.alpha)
        assert _max_dev_from_f(vm_table(same, 6)) <= 1e-12


def test_v1_values_equal_f(random_specs):
    for spec in random_specs:
        table = vm_table(spec, 1)
        assert len(table) == 6
        assert _max_dev_from_f(table) <= 1e-10


def test_hand_expanded_vertex_value(fig1_half):
    table = vm_table(fig1_half, 4)
    value = table.value_at(VertexId(Address((3, 2)), 3))
    assert value == pytest.approx(0.298784, abs=1e-5)


def test_residual_random_specs(random_specs):
    for spec in random_specs:
        assert vm_table(spec, 6).residuals().max() <= 1e-10


def test_residual_figure_matrix(figure_specs):
    for spec in figure_specs:
        assert vm_table(spec, 6).residuals().max() <= spec.residual_tol


def test_non_uniform_alpha_residual():
    f, b = builtin_figure_fields(1)
    spec = validate(f, b, ScaleVector(0.2, -0.5, 0.7))
    assert vm_table(spec, 6).residuals().max() <= 1e-10


def test_shared_vertices_agree_across_parents(random_specs):
    from gasket import representations

    for spec in random_specs[:3]:
        table = vm_table(spec, 3)
        for vid, k in representations(3):
            # every name of a vertex unrolls to the same value
            value, bound = eval_point(spec, vid.address, 40, vid.corner)
            assert abs(value - table.values[k]) <= bound + 1e-10


def test_inconsistent_spec_raises():
    f = ExprField.from_text('y')
    b = f + ExprField.from_text('x')
    spec = ProblemSpec(f, b, ScaleVector.uniform(0.5), 1e-9)
    with pytest.raises(ConsistencyFailure) as exc:
        vm_table(spec, 2)
    assert exc.value.level == 1


@pytest.mark.parametrize('offset', ['0.3', '0.3*x'])
def test_loose_compat_tol_still_checks_shared_vertices(offset):
    f = ExprField.from_text('x*y')
    b = f + ExprField.from_text(offset)
    spec = validate(f, b, ScaleVector.uniform(0.5), 0.5)
    with pytest.raises(ConsistencyFailure) as exc:
        vm_table(spec, 3)
    assert exc.value.level == 1
    assert exc.value.tol < 1e-4


def test_validate_rejects_non_finite_fields():
    f = ConstantField(float('inf'))
    with pytest.raises(DomainError):
        validate(f, f, ScaleVector.uniform(0.5))
    overflow = ExprField.from_text('1e200*1e200*(x+1)')
    with pytest.raises(DomainError):
        validate(overflow, overflow, ScaleVector.uniform(0.5))


def test_negative_depth(fig1_half):
    with pytest.raises(NegativeDepth):
        vm_table(fig1_half, -1)
    with pytest.raises(NegativeDepth):
        rb_iterate(fig1_half, -1, 1)
    with pytest.raises(NegativeDepth):
        enumerate_vm(-2)


def test_depth_guard(fig1_half):
    with pytest.raises(DepthTooLarge):
        vm_table(fig1_half, 13)
    with pytest.raises(DepthTooLarge):
        rb_iterate(fig1_half, 11, 1)


def test_table_field(fig1_half):
    table = vm_table(fig1_half, 3)
    field = table.as_field()
    lat = table.lattice
    assert np.array_equal(field(lat.x, lat.y), table.values)
    assert field.at(lat.point(5)) == table.values[5]
    with pytest.raises(NotOnGasket):
        field.at(Point2(0.3, 0.1))


def test_sup_norm_estimate():
    assert sup_norm_estimate(ConstantField(2.5), 3) == 2.5
    assert sup_norm_estimate(ExprField.from_text('x/4 + y/9'), 6) == 0.25
    table = vm_table(figure_spec(1, 0.6), 5)
    assert sup_norm_estimate(table) == float(np.max(np.abs(table.values)))
    with pytest.raises(DepthTooLarge):
        sup_norm_estimate(ConstantField(1.0), 11)


def test_eval_point_zero_alpha():
    f, b = builtin_figure_fields(1)
    spec = validate(f, b, ScaleVector.uniform(0.0))
    value, bound = eval_point(spec, Address((1,)), 40)
    assert value == f.at(Point2(0, 0))
    assert bound == 0.0


def test_eval_point_empty_address(random_specs):
    for spec in random_specs:
        value, _ = eval_point(spec, Address(()), 25)
        assert value == spec.f.at(Point2(0, 0))


def test_eval_point_hand_computed_value(fig1_half):
    value, bound = eval_point(fig1_half, Address((3, 2)), 40, corner=3)
    assert value == pytest.approx(0.298784, abs=1e-5)
    assert bound < 1e-10
    assert abs(value - vm_table(fig1_half, 2).value_at(VertexId(Address((3, 2)), 3))) <= bound + 1e-12


def test_eval_point_requires_positive_depth(fig1_half):
    with pytest.raises(InvalidArgument):
        eval_point(fig1_half, Address(()), 0)


@pytest.mark.parametrize('word', [(), (2,), (3, 1, 2), (2, 2, 3, 1, 3, 3, 1)])
def test_eval_point_geometric_decay(word):
    spec = figure_spec(4, 0.9)
    for n in (5, 10, 20):
        a, _ = eval_point(spec, Address(word), n)
        b, _ = eval_point(spec, Address(word), n + 5)
        assert abs(a - b) <= spec.tail_bound(n)


def test_evaluators_agree_on_v5(random_specs, figure_specs):
    for spec in random_specs[:4] + figure_specs[:4:2]:
        table = vm_table(spec, 5)
        iterated = rb_iterate(spec, 5, 7).tables[-1]
        assert np.max(np.abs(iterated - table.values)) <= 1e-12
        lat = table.lattice
        for k in range(len(lat)):
            value, bound = eval_point(spec, Address.parse(lat.words[k]), 40, int(lat.corners[k]))
            assert abs(value - table.values[k]) <= bound + 1e-10


def test_rb_matches_table_figure_one():
    spec = figure_spec(1, 0.3)
    result = rb_iterate(spec, 6, 10)
    assert len(result.tables) == 11
    assert len(result.deltas) == 10
    assert np.max(np.abs(result.tables[-1] - vm_table(spec, 6).values)) <= 1e-12


def test_rb_equal_base_is_fixed(random_specs):
    spec = random_specs[0]
    same = validate(spec.f, spec.f, spec.alpha)
    assert rb_iterate(same, 5, 4).deltas == (0.0, 0.0, 0.0, 0.0)


def test_rb_contraction_ratios(random_specs, figure_specs):
    for spec in random_specs + figure_specs:
        result = rb_iterate(spec, 6, 10)
        for ratio in contraction_ratios(result.tables, result.deltas):
            assert ratio <= spec.alpha.norm + 1e-9


def test_chaos_zero_alpha_lies_on_f():
    f, b = builtin_figure_fields(1)
    spec = validate(f, b, ScaleVector.uniform(0.0))
    sample = chaos_game(spec, 500, 7)
    pts = sample.points
    assert np.allclose(pts[:, 2], f(pts[:, 0], pts[:, 1]), rtol=0, atol=1e-12)


def test_chaos_equal_base_lies_on_f(random_specs):
    spec = random_specs[1]
    same = validate(spec.f, spec.f, spec.alpha)
    pts = chaos_game(same, 500, 3).points
    assert np.allclose(pts[:, 2], spec.f(pts[:, 0], pts[:, 1]), rtol=0, atol=1e-12)


def test_chaos_is_deterministic(fig1_half):
    a = chaos_game(fig1_half, 200, 11)
    b = chaos_game(fig1_half, 200, 11)
    c = chaos_game(fig1_half, 200, 12)
    assert np.array_equal(a.points, b.points)
    assert a.addresses == b.addresses
    assert not np.array_equal(a.points, c.points)
    assert a.provenance == 'chaos-game' and a.seed == 11


def test_chaos_points_on_triangle(fig1_half):
    sample = chaos_game(fig1_half, 1000, 5, burn_in=0)
    assert len(sample) == 1000
    for x, y, _ in sample.points.tolist():
        assert in_triangle(Point2(x, y))


def test_chaos_matches_eval_point(fig1_half):
    burn_in = 50
    sample = chaos_game(fig1_half, 10000, 42, burn_in)
    slack = chaos_error_bound(fig1_half, burn_in) + 1e-9
    for (x, y, z), word in zip(sample.points.tolist(), sample.addresses):
        addr = Address.parse(word)
        value, bound = eval_point(fig1_half, addr, 30)
        assert abs(z - value) <= bound + slack


def test_table_sample(fig1_half):
    table = vm_table(fig1_half, 3)
    sample = table_sample(table)
    assert sample.provenance == 'table'
    assert sample.points.shape == (len(enumerate_vm(3)), 3)
