import numpy as np
import pytest

from editplan import (
    OptimizerConfig,
    ParamSpace,
    apply_brightness,
    l1_cost,
    nelder_mead,
)
from editplan.ops import DEFAULT_SPACES, OpKind

from conftest import photo_like


def box(lo, hi, dim=1, identity=None):
    ident = np.zeros(dim) if identity is None else np.full(dim, identity)
    return ParamSpace(lower=np.full(dim, lo), upper=np.full(dim, hi),
                      identity=ident)


class TestConvergence:
    def test_quadratic(self):
        space = box(-10.0, 10.0)
        x, f = nelder_mead(lambda p: (p[0] - 2.0) ** 2, space,
                           start=np.array([0.0]))
        assert abs(x[0] - 2.0) < 1e-4

    def test_quadratic_within_120_evals(self):
        evals = [0]

        def obj(p):
            evals[0] += 1
            return (p[0] - 2.0) ** 2

        space = box(-10.0, 10.0)
        x, _ = nelder_mead(obj, space, start=np.array([0.0]),
                           cfg=OptimizerConfig(max_evals=120))
        assert evals[0] <= 120
        assert abs(x[0] - 2.0) < 1e-4

    def test_rosenbrock(self):
        def rosen(p):
            return (1.0 - p[0]) ** 2 + 100.0 * (p[1] - p[0] ** 2) ** 2

        space = box(-2.0, 2.0, dim=2)
        x, f = nelder_mead(rosen, space, start=np.array([-1.0, 1.0]),
                           cfg=OptimizerConfig(max_evals=500, x_tol=1e-8,
                                               f_tol=1e-10))
        assert f < 1e-3

    def test_brightness_parameter_recovery(self, rng):
        img = photo_like(rng, size=32)
        target = apply_brightness(img, 0.3)
        space = DEFAULT_SPACES[OpKind.BRIGHTNESS]

        def obj(p):
            return l1_cost(apply_brightness(img, p[0]), target)

        x, f = nelder_mead(obj, space)
        assert abs(x[0] - 0.3) < 5e-3


class TestContract:
    def test_never_worse_than_start(self, rng):
        space = box(-1.0, 1.0, dim=3)
        for _ in range(10):
            shift = rng.standard_normal(3)

            def obj(p, _s=shift):
                return float(np.sin(5 * p @ _s) + 0.1 * p @ p)

            start = space.clip(rng.uniform(-1, 1, 3))
            f_start = obj(start)
            _, f = nelder_mead(obj, space, start=start,
                               cfg=OptimizerConfig(max_evals=60))
            assert f <= f_start + 1e-15

    def test_monotone_incumbent(self):
        best_seen = [np.inf]
        incumbents = []

        def obj(p):
            f = (p[0] + 0.4) ** 2 + (p[1] - 0.1) ** 2
            best_seen[0] = min(best_seen[0], f)
            incumbents.append(best_seen[0])
            return f

        nelder_mead(obj, box(-1.0, 1.0, dim=2))
        assert all(a >= b for a, b in zip(incumbents, incumbents[1:]))

    def test_all_evaluated_points_in_bounds(self):
        seen = []

        def obj(p):
            seen.append(p.copy())
            # Minimum outside the box pulls the simplex against the bound.
            return (p[0] - 5.0) ** 2

        space = box(-1.0, 1.0)
        x, _ = nelder_mead(obj, space, cfg=OptimizerConfig(max_evals=80))
        assert all(-1.0 <= p[0] <= 1.0 for p in seen)
        assert x[0] == pytest.approx(1.0, abs=1e-6)

    def test_deterministic(self, rng):
        img = photo_like(rng, size=16)
        target = apply_brightness(img, -0.25)
        space = DEFAULT_SPACES[OpKind.BRIGHTNESS]

        def obj(p):
            return l1_cost(apply_brightness(img, p[0]), target)

        r1 = nelder_mead(obj, space)
        r2 = nelder_mead(obj, space)
        assert np.array_equal(r1[0], r2[0]) and r1[1] == r2[1]

    def test_budget_exhaustion_returns_best(self):
        def obj(p):
            return float(np.sum(p**2))

        space = box(-1.0, 1.0, dim=4)
        _, f = nelder_mead(obj, space, cfg=OptimizerConfig(max_evals=6))
        assert np.isfinite(f)

    def test_start_outside_bounds_rejected(self):
        with pytest.raises(ValueError):
            nelder_mead(lambda p: 0.0, box(-1.0, 1.0), start=np.array([2.0]))


class TestConfig:
    def test_bad_coefficients(self):
        with pytest.raises(ValueError):
            OptimizerConfig(expansion=0.5, reflection=1.0)

    def test_dimension_defaults(self):
        cfg = OptimizerConfig()
        assert cfg.evals_for_dim(1) == 120
        assert cfg.evals_for_dim(8) == 400
        assert cfg.evals_for_dim(24) == 800
