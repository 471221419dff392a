"""End-to-end chain simulation: determinism, distributional sanity, closed-form agreement."""
import math

import numpy as np
import pytest

from coopsense.fusion import FusionConfig, fused_qf, fused_qm
from coopsense.local_sensing import SensingParams, local_pf, local_pm
from coopsense.montecarlo import (
    SimScenario,
    run_grid,
    run_sim,
    run_sweep,
    sample_energy_statistic,
)
from coopsense.reporting import channel_from_snr_db, perfect_channel


def scenario(k=4, n=2, m=6, lam=12.0, gbar=100.0, snr_r_db=10.0, trials=100_000, seed=321,
             perfect=False):
    return SimScenario(
        sensing=SensingParams(samples_m=m, threshold_lambda=lam, avg_snr_gamma=gbar),
        channel=perfect_channel() if perfect else channel_from_snr_db(snr_r_db),
        fusion=FusionConfig(num_radios_k=k, vote_threshold_n=n),
        trials=trials,
        seed=seed,
    )


def within_4se(estimate, truth, stderr):
    if stderr == 0.0:
        return estimate == truth
    return abs(estimate - truth) <= 4.0 * stderr


class TestValidation:
    def test_scenario_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            scenario(trials=0)
        with pytest.raises(ValueError):
            scenario(seed=-1)
        with pytest.raises(ValueError):
            scenario(seed=2**64)

    def test_grid_rejects_bad_axes(self):
        s = scenario(trials=100)
        with pytest.raises(ValueError):
            run_grid(s, [], [1])
        with pytest.raises(ValueError):
            run_grid(s, [2.0, 1.0], [1])
        with pytest.raises(ValueError):
            run_grid(s, [1.0], [0])
        with pytest.raises(ValueError):
            run_grid(s, [1.0], [2, 2])
        with pytest.raises(ValueError):
            run_sweep(s, [1.0, 1.0])


class TestDeterminism:
    def test_identical_scenario_is_bit_identical(self):
        a = run_sim(scenario(trials=30_000, seed=99))
        b = run_sim(scenario(trials=30_000, seed=99))
        assert a == b

    def test_independent_of_worker_count(self):
        a = run_sim(scenario(trials=70_000, seed=5), workers=1)
        b = run_sim(scenario(trials=70_000, seed=5), workers=4)
        assert a == b

    def test_sweep_entries_match_standalone_runs(self):
        base = scenario(trials=40_000, seed=17)
        lambdas = [6.0, 12.0, 20.0]
        sweep = run_sweep(base, lambdas)
        for lam, res in zip(lambdas, sweep):
            single = run_sim(scenario(trials=40_000, seed=17, lam=lam))
            assert res == single

    def test_grid_cells_match_standalone_runs(self):
        base = scenario(trials=40_000, seed=23)
        grid = run_grid(base, [8.0, 16.0], [1, 3])
        for li, lam in enumerate([8.0, 16.0]):
            for ni, n in enumerate([1, 3]):
                single = run_sim(scenario(trials=40_000, seed=23, lam=lam, n=n))
                assert grid[li][ni] == single

    def test_seed_changes_the_draws(self):
        a = run_sim(scenario(trials=30_000, seed=1))
        b = run_sim(scenario(trials=30_000, seed=2))
        assert a != b


class TestDegenerateCases:
    def test_zero_threshold_perfect_reports(self):
        # every radio always asserts and every report arrives intact
        res = run_sim(scenario(lam=0.0, perfect=True, trials=20_000, seed=3))
        assert float(res.qf_hat) == 1.0
        assert float(res.qm_hat) == 0.0
        assert float(res.report_error_rate_hat) == 0.0

    def test_single_trial_is_well_formed(self):
        res = run_sim(scenario(trials=1, seed=8))
        assert res.trials_h0 + res.trials_h1 == 1
        assert 0.0 <= float(res.qf_hat) <= 1.0
        assert 0.0 <= float(res.qm_hat) <= 1.0


class TestDistributionalSanity:
    def test_idle_statistic_is_chi_square_2m(self):
        m = 6
        n_samples = 400_000
        t = sample_energy_statistic(
            SensingParams(samples_m=m, threshold_lambda=0.0, avg_snr_gamma=1.0),
            occupied=False, trials=n_samples, seed=77,
        )
        dof = 2 * m
        mean_se = math.sqrt(2.0 * dof / n_samples)
        assert abs(float(t.mean()) - dof) <= 4.0 * mean_se
        # Var(s^2) ~ (mu4 - sigma^4)/N with mu4 = (3 + 12/dof) * (2*dof)^2
        mu4 = (3.0 + 12.0 / dof) * (2.0 * dof) ** 2
        var_se = math.sqrt((mu4 - (2.0 * dof) ** 2) / n_samples)
        assert abs(float(t.var(ddof=1)) - 2.0 * dof) <= 4.0 * var_se

    def test_report_error_rate_matches_channel(self):
        res = run_sim(scenario(trials=400_000, seed=31))
        pe = float(channel_from_snr_db(10.0).pe)
        n_bits = 4 * 400_000
        assert abs(float(res.report_error_rate_hat) - pe) <= 4.0 * math.sqrt(pe * (1 - pe) / n_bits)


class TestClosedFormAgreement:
    @pytest.mark.parametrize("channel", [perfect_channel(), channel_from_snr_db(200.0)],
                             ids=["perfect", "snr_r_200dB"])
    def test_single_radio_clean_chain_matches_false_alarm_tail(self, channel):
        base = scenario(k=1, n=1, lam=12.0, trials=1_000_000, seed=41)
        res = run_sim(SimScenario(sensing=base.sensing, channel=channel, fusion=base.fusion,
                                  trials=base.trials, seed=base.seed))
        pf = float(local_pf(SensingParams(samples_m=6, threshold_lambda=12.0, avg_snr_gamma=100.0)))
        assert within_4se(float(res.qf_hat), pf, res.qf_stderr)

    @pytest.mark.parametrize("m,lam,gbar,seed", [
        (6, 12.0, 100.0, 101),   # 20 dB average SNR operating point
        (1, 2.0, 99.0, 102),
        (2, 5.0, 10.0, 103),
        (12, 30.0, 10.0, 104),
        (6, 4.0, 1.0, 105),
    ])
    def test_local_rates_match_closed_forms(self, m, lam, gbar, seed):
        res = run_sim(scenario(k=1, n=1, m=m, lam=lam, gbar=gbar, trials=1_000_000, seed=seed))
        p = SensingParams(samples_m=m, threshold_lambda=lam, avg_snr_gamma=gbar)
        pf, pm = float(local_pf(p)), float(local_pm(p))
        se_f = math.sqrt(pf * (1 - pf) / res.trials_h0)
        se_m = math.sqrt(pm * (1 - pm) / res.trials_h1)
        assert abs(float(res.per_radio_pf_hat) - pf) <= 4.0 * max(se_f, 1e-12)
        assert abs(float(res.per_radio_pm_hat) - pm) <= 4.0 * max(se_m, 1e-12)

    def test_fused_point_matches_closed_forms(self):
        res = run_sim(scenario(trials=300_000, seed=51))
        p = SensingParams(samples_m=6, threshold_lambda=12.0, avg_snr_gamma=100.0)
        cfg = FusionConfig(num_radios_k=4, vote_threshold_n=2)
        pe = channel_from_snr_db(10.0).pe
        qf = float(fused_qf(cfg, local_pf(p), pe))
        qm = float(fused_qm(cfg, local_pm(p), pe))
        assert within_4se(float(res.qf_hat), qf, res.qf_stderr)
        assert within_4se(float(res.qm_hat), qm, res.qm_stderr)


class TestCommonRandomNumbers:
    def test_sweep_false_alarms_are_monotone_per_realization(self):
        # shared draws and nested decision regions force monotone empirical curves
        base = scenario(trials=50_000, seed=61)
        sweep = run_sweep(base, [4.0, 8.0, 12.0, 16.0, 24.0])
        qf = [float(r.qf_hat) for r in sweep]
        qm = [float(r.qm_hat) for r in sweep]
        assert all(b <= a for a, b in zip(qf, qf[1:]))
        assert all(b >= a for a, b in zip(qm, qm[1:]))

    def test_twenty_point_sweep_tracks_the_analytic_curve(self):
        from coopsense.local_sensing import threshold_for_pf
        from coopsense.roc import analytic_roc

        lambdas = sorted(threshold_for_pf(float(q), 6) for q in np.geomspace(1e-4, 0.95, 20))
        base = scenario(trials=200_000, seed=87)
        sweep = run_sweep(base, lambdas)
        curve = analytic_roc(base.fusion, base.sensing, base.channel, lambdas)
        for res, (_, qf, qm) in zip(sweep, curve.points):
            se_f = math.sqrt(float(qf) * (1.0 - float(qf)) / res.trials_h0)
            se_m = math.sqrt(float(qm) * (1.0 - float(qm)) / res.trials_h1)
            assert abs(float(res.qf_hat) - float(qf)) <= 4.0 * se_f
            assert abs(float(res.qm_hat) - float(qm)) <= 4.0 * se_m
