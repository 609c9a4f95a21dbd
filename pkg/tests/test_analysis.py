import math

import numpy as np
import pytest

from bigjump.analysis import (
    GvEvaluator,
    NonConvergence,
    calibrate_dds_constant,
    corollary_rhs,
    estimate_lambda,
    gv_tail_asymptotic,
    karamata_crosscheck,
    prop1_rhs,
    wilson_interval,
    xmax_tail_exact,
)
from bigjump.heavytail import ScaleSpec, StepLaw
from bigjump.offspring import OffspringLaw, make_zeta_stable
from bigjump.treegen import sample_free_sizes
from bigjump.harness.stats import log_log_slope
from conftest import rng_from

GH = OffspringLaw("geometric_half")
Z15 = make_zeta_stable(1.5)
SYM3 = StepLaw(alpha=3.0, shape="symmetric")
ONE3 = StepLaw(alpha=3.0, shape="one_sided")


def gv_closed_form(s):
    # quadratic fixed point for the geometric family
    return 1.0 - math.sqrt(1.0 - s)


class TestGv:
    def test_endpoints(self):
        ev = GvEvaluator(GH)
        assert ev(0.0) == 0.0
        assert ev(1.0) == 1.0
        assert GvEvaluator(Z15)(1.0) == 1.0

    def test_geometric_closed_form(self):
        ev = GvEvaluator(GH)
        assert ev(0.75) == pytest.approx(0.5, abs=1e-12)
        for s in np.arange(0.01, 1.0, 0.01):
            assert abs(ev(s) - gv_closed_form(s)) < 1e-10

    def test_fixed_point_identity(self):
        for law in (GH, Z15):
            ev = GvEvaluator(law)
            for s in (0.1, 0.5, 0.9, 0.99):
                g = ev(s)
                assert abs(g - s * law.gen_Z(g)) < 10 * ev.tol

    def test_below_diagonal_and_convex(self):
        ev = GvEvaluator(GH)
        grid = np.linspace(0.02, 0.98, 49)
        vals = np.array([ev(s) for s in grid])
        assert np.all(vals <= grid)
        assert np.all(np.diff(vals) > 0)
        assert np.all(np.diff(vals, 2) >= -1e-9)

    def test_nonconvergence(self):
        ev = GvEvaluator(GH, max_iter=50)
        with pytest.raises(NonConvergence):
            ev(0.999)

    def test_validation(self):
        with pytest.raises(ValueError):
            GvEvaluator(GH, tol=1e-3)
        with pytest.raises(ValueError):
            GvEvaluator(GH)(-0.1)


class TestAsymptotic:
    def test_geometric_value(self):
        # sqrt(2)/sigma * sqrt(s) with sigma^2 = 2
        assert gv_tail_asymptotic(GH, 0.01) == pytest.approx(0.1, rel=1e-12)

    def test_matches_fixed_point(self):
        # the geometric asymptotic is exact (1 - g_V(1-s) = sqrt(s)), so the
        # ratio is 1 at every s up to solver tolerance
        ev = GvEvaluator(GH)
        ratios = []
        for s in (1e-2, 1e-3, 1e-4):
            ratios.append((1.0 - ev(1.0 - s)) / gv_tail_asymptotic(GH, s))
        assert abs(ratios[-1] - 1.0) < 0.02
        assert all(abs(r - 1) >= abs(r2 - 1) - 1e-9
                   for r, r2 in zip(ratios, ratios[1:]))

    def test_zeta_lambda_estimator(self):
        lam = estimate_lambda(Z15)
        assert lam > 0
        # consistency across two small t values (the limit exists)
        l2 = Z15.kappa_Zm1(1e-4) / 1e-4 ** 1.5
        assert lam == pytest.approx(l2, rel=0.05)
        asym = gv_tail_asymptotic(Z15, 1e-3)
        ev = GvEvaluator(Z15)
        assert (1.0 - ev(1.0 - 1e-3)) / asym == pytest.approx(1.0, rel=0.05)


class TestXmaxTail:
    def test_exact_rational_value(self):
        # p = 4^-3 = 1/64; g_V(1-p) = 7/8; nonroot tail = 1 - (7/8)/(63/64) = 1/9
        val = xmax_tail_exact(GH, ONE3, 4.0, mode="pos", convention="nonroot")
        assert val == pytest.approx(1.0 / 9.0, rel=1e-10)

    def test_root_convention(self):
        val = xmax_tail_exact(GH, ONE3, 4.0, mode="pos", convention="root")
        assert val == pytest.approx(1.0 - 7.0 / 8.0, rel=1e-10)

    def test_below_onset(self):
        assert xmax_tail_exact(GH, ONE3, 0.5, convention="root") == 1.0
        assert xmax_tail_exact(GH, ONE3, 0.5, convention="nonroot") == \
            pytest.approx(1.0 - GH.pmf(0))

    def test_loglog_slope(self):
        # root-convention tail of the symmetric law decays with index
        # -beta*alpha = -1.5
        xs = np.geomspace(10.0, 100.0, 25)
        ev = GvEvaluator(GH)
        ys = [1.0 - ev(1.0 - SYM3.tail_pos(x)) for x in xs]
        assert log_log_slope(xs, ys) == pytest.approx(-1.5, abs=0.02)

    def test_monte_carlo_cross_check(self):
        # free trees, steps checked against the closed-form tail at x = 4
        rng = rng_from(500)
        p = ONE3.tail_pos(4.0)
        n = 200000
        cap = 10 ** 6
        sizes = sample_free_sizes(GH, rng, cap, n)
        hits = 0
        capped = 0
        for v in sizes:
            if v < 0:
                capped += 1  # counted as exceedance upper bracket below
                continue
            if v == 1:
                continue
            m = int(v) - 1
            if m > 5000:
                # exact per-tree exceedance law of the max of m iid steps
                if rng.random() < -math.expm1(m * math.log1p(-p)):
                    hits += 1
            else:
                if np.any(rng.random(m) < p):
                    hits += 1
        target = xmax_tail_exact(GH, ONE3, 4.0, convention="nonroot")
        sd = math.sqrt(target * (1 - target) / n)
        assert hits / n - 4 * sd <= target <= (hits + capped) / n + 4 * sd


class TestBoundFormulas:
    def test_prop1_rhs_value(self):
        law = StepLaw(alpha=2.0, shape="symmetric")
        val = prop1_rhs(H=10, V=100, z=10.0, y=100.0, C=1.0, step=law)
        assert val == pytest.approx(0.05 + 100 * math.exp(-10), rel=1e-12)
        assert val == pytest.approx(0.054540, abs=1e-6)

    def test_prop1_edge_cases(self):
        law = StepLaw(alpha=2.0, shape="symmetric")
        y0 = prop1_rhs(H=3, V=7, z=5.0, y=0.0, C=2.0, step=law)
        assert y0 == pytest.approx(0.5 * 21 * law.tail_abs(5.0) ** 2 + 14.0)
        assert prop1_rhs(H=5, V=0, z=2.0, y=1.0, C=1.0, step=law) == 0.0

    def test_corollary_value(self):
        val = corollary_rhs(H=10, V=100, y=10.0, epsilon=0.5, C=1.0, step=ONE3)
        assert val == pytest.approx(1000 * 10 ** -4.5, rel=1e-12)
        assert val == pytest.approx(0.031623, abs=1e-6)

    def test_corollary_edges(self):
        assert corollary_rhs(H=0, V=5, y=2.0, epsilon=0.5, C=1.0, step=ONE3) == 0.0
        tiny_eps = corollary_rhs(H=1, V=1, y=10.0, epsilon=1e-9, C=1.0, step=ONE3)
        assert tiny_eps == pytest.approx(1e-6, rel=1e-6)
        with pytest.raises(ValueError):
            corollary_rhs(H=1, V=1, y=10.0, epsilon=1.5, C=1.0, step=ONE3)


class TestKappaConsistency:
    def test_gv_against_kappa_inverse(self):
        # -log g_V(e^-t) equals the inverse log-Laplace transform
        ev = GvEvaluator(GH)
        for t in np.geomspace(1e-3, 5.0, 30):
            lhs = -math.log(ev(math.exp(-t)))
            rhs = GH.kappa_inv(t)
            assert abs(lhs - rhs) < 1e-8


class TestCalibration:
    def test_impossible_cells_are_zero(self):
        rng = rng_from(600)
        scale = ScaleSpec.for_law(SYM3, 0.1)
        rep = calibrate_dds_constant(SYM3, scale, n_grid=(1,), x_over_y=(2.0, 5.0),
                                     y_rule=None, reps=500, rng=rng)
        assert rep.c_hat == 0.0
        assert all(c["impossible"] for c in rep.cells)

    def test_stability_across_repetitions(self):
        scale = ScaleSpec.for_law(SYM3, 0.1)
        values = []
        for rep_idx in range(10):
            rng = rng_from(601, rep_idx)
            rep = calibrate_dds_constant(SYM3, scale, n_grid=(100, 1000),
                                         x_over_y=(1.0, 2.0, 3.0, 4.0, 5.0),
                                         y_rule=None, reps=1000, rng=rng)
            values.append(rep.c_hat)
        values = np.asarray(values)
        assert np.all(np.isfinite(values)) and np.all(values > 0)
        assert values.std() / values.mean() < 0.20

    def test_subgrid_monotonicity(self):
        rng = rng_from(602)
        scale = ScaleSpec.for_law(SYM3, 0.1)
        rep = calibrate_dds_constant(SYM3, scale, n_grid=(100, 1000),
                                     x_over_y=(1.0, 2.0, 3.0, 4.0, 5.0),
                                     y_rule=None, reps=1000, rng=rng)
        sub = max(math.exp(c["x"] / c["y"]) * c["wilson_hi"]
                  for c in rep.cells if c["n"] == 100 and not c["impossible"])
        assert sub <= rep.c_hat + 1e-12

    def test_y_rule_validated(self):
        rng = rng_from(603)
        scale = ScaleSpec.for_law(SYM3, 0.1)
        with pytest.raises(ValueError):
            calibrate_dds_constant(SYM3, scale, n_grid=(100,), x_over_y=(1.0,),
                                   y_rule=lambda n: 0.5, reps=100, rng=rng)


class TestKaramata:
    def test_gamma_half_is_sqrt_pi(self):
        assert math.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)

    def test_geometric_target_matches_catalan(self):
        rep = karamata_crosscheck(GH, (100, 10 ** 4),
                                  sample_tail=lambda n: 1 / math.sqrt(math.pi * n))
        # the transform itself reproduces 1/sqrt(pi n) up to O(1/n)
        assert rep.max_abs_rel_dev < 0.01
        assert rep.beta == 0.5

    def test_free_sample_crosscheck(self):
        sizes = sample_free_sizes(GH, rng_from(604), cap=10 ** 6, count=10 ** 5)

        def tail(n):
            return float(np.mean((sizes > n) | (sizes < 0)))

        rep = karamata_crosscheck(GH, (100, 1000, 10 ** 4), tail)
        assert all(abs(d) < 0.1 for d in rep.rel_dev)
        # regular variation ratio test: index -1/2 means tail(4n)/tail(n) -> 1/2
        assert tail(400) / tail(100) == pytest.approx(0.5, abs=0.05)

    def test_requires_stable_index(self):
        dead = OffspringLaw("custom", probs=[0.5, 0.5])
        with pytest.raises(ValueError):
            karamata_crosscheck(dead, (10,), lambda n: 0.1)


class TestReportJson:
    def test_karamata_json_fields(self):
        import json
        rep = karamata_crosscheck(GH, (100,),
                                  sample_tail=lambda n: 1 / math.sqrt(math.pi * n))
        d = json.loads(rep.to_json())
        assert {"grid", "estimates", "confidence", "convention"} <= set(d)

    def test_calibration_json_fields(self):
        import json
        rng = rng_from(605)
        scale = ScaleSpec.for_law(SYM3, 0.1)
        rep = calibrate_dds_constant(SYM3, scale, n_grid=(10,), x_over_y=(1.0,),
                                     y_rule=None, reps=200, rng=rng)
        d = json.loads(rep.to_json())
        assert {"grid", "estimates", "confidence", "convention", "c_hat"} <= set(d)


class TestWilson:
    def test_zero_successes(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert hi == pytest.approx(3.8415 / (100 + 3.8415), rel=1e-3)

    def test_symmetric_at_half(self):
        lo, hi = wilson_interval(50, 100)
        assert lo + hi == pytest.approx(1.0, abs=1e-12)
        assert lo < 0.5 < hi
