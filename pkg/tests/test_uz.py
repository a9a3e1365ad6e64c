import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpe.core import constancy_chisq
from lpe.paths import ParamPathSpec
from lpe.simulate import TickSeries, UzSimSpec, simulate_uncertainty_zones
from lpe.uz import (AltContCounts, continuation_prob, corrected_rv, count_alt_cont,
                    eta_bias_sd, eta_hat, realized_variance, uz_constancy_test, uz_lpe)
from oracles import delta_method_eta_sd, enumerate_eta_hat

C = ParamPathSpec.constant


def from_moves(moves, tick=0.01):
    z = np.concatenate([[0], np.cumsum(moves)]).astype(np.int64)
    return TickSeries(tick, np.arange(len(z), dtype=float), z)


@pytest.fixture(scope="module")
def uz_path():
    return simulate_uncertainty_zones(UzSimSpec(0.03, C([0.155]), C([1.0]), seed=2024))


class TestCounts:
    def test_pure_alternation(self):
        c = count_alt_cont(from_moves([1, -1, 1, -1]))
        assert c.per_size == {1: (3, 0)}

    def test_pure_continuation(self):
        c = count_alt_cont(from_moves([1, 1, 1, 1]))
        assert c.per_size == {1: (0, 3)}

    def test_tallied_under_own_size(self):
        c = count_alt_cont(from_moves([1, 2, -1, -2, 1]))
        # changes 2..5: cont size 2, alt size 1, cont size 2, alt size 1
        assert c.per_size == {1: (2, 0), 2: (0, 2)}

    @given(st.lists(st.sampled_from([-3, -2, -1, 1, 2, 3]), min_size=2, max_size=200))
    def test_total_is_changes_minus_one(self, moves):
        c = count_alt_cont(from_moves(moves))
        assert c.total == len(moves) - 1
        assert c.weights().sum() == pytest.approx(1.0, abs=1e-15)

    def test_needs_two_changes(self):
        with pytest.raises(ValueError):
            count_alt_cont(from_moves([1]))


class TestEtaHat:
    def test_balanced(self):
        assert eta_hat(AltContCounts([10], [10])) == 0.5

    def test_no_continuations(self):
        assert eta_hat(AltContCounts([10], [0])) == 0.0

    def test_no_alternations_sets_u_to_one(self):
        # size 1 has u = 1; size 2 has u = (2 (5/5 - 1) + 1) / 2
        assert eta_hat(AltContCounts([0, 5], [3, 5])) == pytest.approx(3 / 13 + 10 / 13 * 0.5)

    def test_empty(self):
        with pytest.raises(ValueError):
            eta_hat(AltContCounts([0], [0]))

    @given(st.lists(st.tuples(st.integers(0, 500), st.integers(0, 500)), min_size=1, max_size=4)
           .filter(lambda v: sum(a + c for a, c in v) > 0))
    def test_in_unit_interval(self, pairs):
        a, c = zip(*pairs)
        assert 0.0 <= eta_hat(AltContCounts(a, c)) <= 1.0

    @given(st.integers(1, 10_000), st.integers(0, 10_000))
    def test_single_size_closed_form(self, na, nc):
        assert eta_hat(AltContCounts([na], [nc])) == pytest.approx(min(1.0, nc / (2 * na)), abs=1e-15)

    def test_simulated_operating_point(self, uz_path):
        assert uz_path.n_changes >= 3306
        assert abs(eta_hat(count_alt_cont(uz_path)) - 0.155) < 3 * 0.008


class TestCorrectedRv:
    def test_half_is_plain_rv(self, uz_path):
        assert corrected_rv(uz_path, 0.5) == pytest.approx(
            np.sum(np.diff(uz_path.prices[1:]) ** 2), rel=1e-12)
        assert realized_variance(uz_path) == corrected_rv(uz_path, 0.5)

    def test_hand_computed(self):
        # +1, -1, +1 ticks with eta = 0: de-rounding puts every price at 0.5 ticks
        ts = from_moves([1, -1, 1], tick=0.1)
        x = np.array([1, 0, 1]) - 0.5 * np.array([1, -1, 1])
        assert corrected_rv(ts, 0.0) == pytest.approx(0.01 * np.sum(np.diff(x) ** 2))
        assert corrected_rv(ts, 0.0) == pytest.approx(0.0)

    @given(st.lists(st.sampled_from([-2, -1, 1, 2]), min_size=3, max_size=50),
           st.integers(-1000, 1000), st.floats(0, 1))
    def test_shift_invariance(self, moves, shift, eta):
        a = from_moves(moves)
        b = TickSeries(a.tick, a.times, a.ticks + shift)
        assert corrected_rv(a, eta) == pytest.approx(corrected_rv(b, eta), rel=1e-12, abs=1e-15)

    def test_invalid_eta(self, uz_path):
        with pytest.raises(ValueError):
            corrected_rv(uz_path, 1.5)


class TestBiasSd:
    def test_continuation_prob(self):
        assert continuation_prob(0.5, 1) == 0.5
        # a size-k change continues with probability (2 eta + k - 1) / (2 eta + 2k - 1)
        assert continuation_prob(0.25, 2) == pytest.approx(1.5 / 3.5)

    def test_hand_enumeration_n10(self):
        res = eta_bias_sd(0.5, AltContCounts([5], [5]), method="exact")
        mean, var = enumerate_eta_hat(0.5, 10)
        assert res.bias == pytest.approx(mean - 0.5, abs=1e-13)
        assert res.sd == pytest.approx(math.sqrt(var), rel=1e-12)
        assert res.method == "exact"

    def test_delta_method(self):
        res = eta_bias_sd(0.155, AltContCounts([2500], [805]))
        ref = delta_method_eta_sd(0.155, 3305)
        assert ref == pytest.approx(0.0063, abs=1e-4)
        assert abs(res.sd / ref - 1) < 0.10

    @pytest.mark.parametrize("eta,n", [(0.155, 3305), (0.3, 500), (0.05, 2000)])
    def test_exact_matches_mc(self, eta, n):
        c = AltContCounts([n // 2], [n - n // 2])
        ex = eta_bias_sd(eta, c, method="exact")
        mc = eta_bias_sd(eta, c, method="mc", seed=5)
        assert mc.method == "mc" and mc.mc_se > 0
        assert abs(ex.bias - mc.bias) < 3 * mc.mc_se

    def test_mixed_sizes_enumerate_per_size(self):
        c = AltContCounts([300, 100], [100, 50])
        ex = eta_bias_sd(0.2, c, method="exact")
        mc = eta_bias_sd(0.2, c, method="mc", seed=1)
        assert abs(ex.bias - mc.bias) < 3 * mc.mc_se
        assert ex.sd == pytest.approx(mc.sd, rel=0.02)

    def test_large_counts_use_mc_and_shrink(self):
        sds, biases = [], []
        for n in (10 ** 5, 10 ** 6, 10 ** 8):
            r = eta_bias_sd(0.155, AltContCounts([n // 2], [n // 2]))
            assert r.method == "mc"
            sds.append(r.sd)
            biases.append(abs(r.bias))
        assert sds[0] > sds[1] > sds[2]
        assert biases[-1] < 1e-4

    def test_validation(self):
        with pytest.raises(ValueError):
            eta_bias_sd(0.0, AltContCounts([1], [1]))
        with pytest.raises(ValueError):
            eta_bias_sd(0.3, AltContCounts([0], [0]))
        with pytest.raises(ValueError):
            eta_bias_sd(0.3, AltContCounts([1], [1]), method="bogus")


class TestUzLpe:
    def test_constant_path(self, uz_path):
        res = uz_lpe(uz_path, uz_path.tick, 53, 1.0)
        assert res.names == ("sigma2", "eta")
        g = eta_hat(count_alt_cont(uz_path))
        sd = eta_bias_sd(g, count_alt_cont(uz_path)).sd
        # small blocks carry a positive finite-sample bias in the friction ratio
        assert abs(res.theta_hat[1] - g) < 2 * sd + eta_bias_sd(g, AltContCounts([0], [53])).bias
        assert abs(res.theta_hat[0] - 1.0) < 0.15

    def test_block_durations_sum_to_last_event(self, uz_path):
        res = uz_lpe(uz_path, uz_path.tick, 50, 1.0)
        assert res.partition.block_lengths.sum() == pytest.approx(uz_path.times[-1])

    def test_too_few_events(self, uz_path):
        with pytest.raises(ValueError):
            uz_lpe(uz_path, uz_path.tick, uz_path.n_changes, 1.0)

    def test_constancy_test_shape(self, uz_path):
        res = uz_lpe(uz_path, uz_path.tick, 53, 1.0)
        test = uz_constancy_test(uz_path, 53, res)
        assert test.df == res.partition.n_blocks - 1
        g = eta_hat(count_alt_cont(uz_path))
        sd = eta_bias_sd(g, AltContCounts([0], [53])).sd
        ref = constancy_chisq([l.theta[1] for l in res.locals[:-1]], g, sd)
        assert test.stat == pytest.approx(ref.stat)

    def test_detects_time_varying_friction(self):
        ts = simulate_uncertainty_zones(UzSimSpec(0.03, ParamPathSpec.cosine([0.155], [0.1], [1.0]),
                                                  C([1.0]), seed=4))
        assert uz_constancy_test(ts, 53).pvalue < 1e-6
