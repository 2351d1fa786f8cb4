import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
from field_expr import BarycentricBump, ExprField, FIGURE_ALPHAS, FIGURE_COMPAT_TOL, builtin_figure_fields
from fractal import validate
from models import ScaleVector

F_POOL = [
    'x/4 + y/9',
    'sin(x + 3.7) + 1.3*x',
    'cos(2*x + 5) + sin(x + 2.7) - 1.5 + 1.3*x',
    'exp(-x)*y + x^2',
    'sqrt(1 + x^2 + y^2)',
    'x*y - y^2/3 + 0.2',
]

RANDOM_SEED = 20240607


def make_random_specs(count=20, seed=RANDOM_SEED):
    """Specs with b = f + c*l1*l2*l3, so b = f on V_0 exactly."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        f = ExprField.from_text(F_POOL[rng.integers(len(F_POOL))])
        scale = rng.uniform(0.5, 3.0) * rng.choice([-1.0, 1.0])
        b = f + BarycentricBump(scale)
        alpha = ScaleVector(*rng.uniform(-0.9, 0.9, size=3))
        specs.append(validate(f, b, alpha))
    return specs


def figure_spec(figure, alpha):
    f, b = builtin_figure_fields(figure)
    return validate(f, b, ScaleVector.uniform(alpha), FIGURE_COMPAT_TOL)


@pytest.fixture(scope='session')
def random_specs():
    return make_random_specs()


@pytest.fixture(scope='session')
def figure_specs():
    return [figure_spec(fig, a) for fig in (1, 2, 3, 4) for a in FIGURE_ALPHAS]


@pytest.fixture
def fig1_half():
    return figure_spec(1, 0.5)
