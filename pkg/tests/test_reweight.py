import numpy as np
import pytest
from scipy.special import expit

from conftest import APR, FEB, household, person, sample, single_household
from incomenowcast.errors import ConvergenceError, DataError, SeparationError, SingularModelError
from incomenowcast.records import LabourState, Sex, State
from incomenowcast.reweight import (
    CovariateSpec,
    calibrate_total,
    compute_ratios,
    default_gamma,
    effective_sample_size,
    fit_membership,
    reweight_diagnostics,
)


def cells_sample(counts, month, prefix, weight=1.0, by_state=True):
    """Single-adult households distributed over discrete cells.

    counts: mapping cell label -> number of households; the label steers a
    discrete covariate (state when by_state, else sex).
    """
    states = list(State)
    households = []
    i = 0
    for label, n in counts.items():
        for _ in range(n):
            hid = f"{prefix}{i:04d}"
            kw = {}
            if by_state:
                kw["state"] = states[label]
            households.append(single_household(hid, weight=weight, **kw))
            i += 1
    return sample(households, month)


class TestFitMembership:
    def test_identical_sources_give_flat_probabilities(self):
        base = cells_sample({0: 30, 1: 30}, FEB, "b")
        panel = cells_sample({0: 20, 1: 20}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        assert model.converged
        probs = model.predict_prob([(h, h.members[0]) for h in base.households])
        assert np.allclose(probs, 40 / 100, atol=1e-6)
        assert np.allclose(model.coefficients, 0.0, atol=1e-5)

    def test_saturated_cell_probabilities_match_shares(self):
        base = cells_sample({0: 30, 1: 10}, FEB, "b")
        panel = cells_sample({0: 10, 1: 30}, APR, "p")
        model = fit_membership(
            base, panel, CovariateSpec(terms=("state",), saturated=True)
        )
        by_cell = {0: 10 / 40, 1: 30 / 40}
        for label, h in ((0, base.households[0]), (1, base.households[-1])):
            prob = model.predict_prob([(h, h.members[0])])[0]
            assert prob == pytest.approx(by_cell[label], abs=1e-8)

    def test_recovers_known_logit_coefficients(self):
        rng = np.random.default_rng(2024)
        n = 50_000
        beta = np.array([-0.4, 0.8, -0.6])  # intercept, age effect, male effect
        ages = rng.integers(20, 60, n)
        males = rng.random(n) < 0.5
        x_age = (ages - 40) / 10.0
        eta = beta[0] + beta[1] * x_age + beta[2] * males
        y = rng.random(n) < expit(eta)

        # fit through the public surface: one person per household, with the
        # panel containing the y=1 rows
        base_h, panel_h = [], []
        for i in range(n):
            kw = dict(
                age=int(ages[i]),
                sex=Sex.MALE if males[i] else Sex.FEMALE,
            )
            target = panel_h if y[i] else base_h
            target.append(single_household(f"h{i:06d}", **kw))
        base = sample(base_h, FEB)
        panel = sample(panel_h, APR)
        model = fit_membership(base, panel, CovariateSpec(terms=("age", "male")))
        assert model.converged
        # translate the generating coefficients to the raw-age scale
        b_age = beta[1] / 10.0
        b0 = beta[0] - beta[1] * 4.0
        from incomenowcast.mle import fit_binary_mle
        # standard errors from an independent refit on the exact design
        X = np.column_stack([np.ones(n), ages.astype(float), males.astype(float)])
        refit = fit_binary_mle(X, y.astype(float), np.ones(n), link="logit")
        se = np.sqrt(np.diag(refit.cov))
        est = np.array([model.intercept, *model.coefficients])
        assert np.allclose(est, refit.coefficients, atol=1e-6)
        for got, true, s in zip(est, (b0, b_age, beta[2]), se):
            assert abs(got - true) <= 3 * s

    def test_constant_column_rejected(self):
        base = cells_sample({0: 10}, FEB, "b")
        panel = cells_sample({0: 10}, APR, "p")
        with pytest.raises(DataError, match="constant"):
            fit_membership(base, panel, CovariateSpec(terms=("age",)))

    def test_separation_raises(self):
        base = cells_sample({0: 25}, FEB, "b")
        panel = cells_sample({1: 25}, APR, "p")
        with pytest.raises(SeparationError, match="separation"):
            fit_membership(base, panel, CovariateSpec(terms=("state",)))

    def test_singular_design_names_terms(self):
        # only two distinct ages: intercept, age and age squared are collinear
        base = sample(
            [single_household(f"b{i}", age=30 if i % 2 else 50) for i in range(20)], FEB
        )
        panel = sample(
            [single_household(f"p{i}", age=30 if i % 3 else 50) for i in range(20)], APR
        )
        with pytest.raises(SingularModelError) as err:
            fit_membership(base, panel, CovariateSpec(terms=("age", "age_sq")))
        assert "age" in str(err.value)


class TestComputeRatios:
    def test_all_zero_model_and_unit_gamma_keep_weights(self):
        # odds of 1 everywhere: ratios collapse to gamma
        base = cells_sample({0: 10, 1: 10}, FEB, "b", weight=2.5)
        panel = cells_sample({0: 10, 1: 10}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        model.intercept = 0.0
        model.coefficients[:] = 0.0
        update = compute_ratios(model, base, gamma=1.0, trim_quantile=None)
        for w in update.new_weights.values():
            assert w == pytest.approx(2.5, rel=1e-12)

    def test_zero_coefficients_and_unit_gamma_keep_weights(self):
        base = cells_sample({0: 20, 1: 20}, FEB, "b", weight=3.0)
        panel = cells_sample({0: 15, 1: 15}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        update = compute_ratios(model, base, gamma=1.0, trim_quantile=None)
        odds = 30.0 / 120.0  # flat odds: panel mass over baseline mass
        for w in update.new_weights.values():
            assert w == pytest.approx(3.0 * odds, rel=1e-6)
        # gamma chosen as the mass prior restores the original weights
        gamma = default_gamma(base, panel)
        update = compute_ratios(model, base, gamma=gamma, trim_quantile=None)
        for w in update.new_weights.values():
            assert w == pytest.approx(3.0, rel=1e-6)

    def test_cell_proportion_oracle(self):
        # panel shares {A: 0.25, B: 0.75}, baseline {A: 0.5, B: 0.5}
        base = cells_sample({0: 20, 1: 20}, FEB, "b")
        panel = cells_sample({0: 10, 1: 30}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        gamma = default_gamma(base, panel)  # equal masses: gamma = 1
        assert gamma == pytest.approx(1.0)
        update = compute_ratios(model, base, gamma, trim_quantile=None)
        factors = update.household_factors
        a = [factors[h.household_id] for h in base.households[:20]]
        b = [factors[h.household_id] for h in base.households[20:]]
        assert np.allclose(a, 0.5, atol=1e-6)
        assert np.allclose(b, 1.5, atol=1e-6)
        total = sum(update.new_weights.values())
        assert total == pytest.approx(base.total_weight(), rel=1e-9)

    def test_gamma_linearity(self):
        base = cells_sample({0: 12, 1: 8}, FEB, "b")
        panel = cells_sample({0: 9, 1: 11}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        one = compute_ratios(model, base, gamma=1.0, trim_quantile=None)
        two = compute_ratios(model, base, gamma=2.0, trim_quantile=None)
        for hid in one.new_weights:
            assert two.new_weights[hid] == pytest.approx(2 * one.new_weights[hid])

    def test_unconverged_model_rejected(self):
        base = cells_sample({0: 10, 1: 10}, FEB, "b")
        panel = cells_sample({0: 8, 1: 12}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        model.converged = False
        with pytest.raises(ConvergenceError):
            compute_ratios(model, base, 1.0)

    def test_trim_caps_extremes(self):
        rng = np.random.default_rng(5)
        base_h = [
            single_household(f"b{i:03d}", age=int(a))
            for i, a in enumerate(rng.integers(20, 70, 400))
        ]
        panel_h = [
            single_household(f"p{i:03d}", age=int(a))
            for i, a in enumerate(rng.integers(20, 40, 400))
        ]
        base, panel = sample(base_h, FEB), sample(panel_h, APR)
        model = fit_membership(base, panel, CovariateSpec(terms=("age",)))
        untrimmed = compute_ratios(model, base, 1.0, trim_quantile=None)
        trimmed = compute_ratios(model, base, 1.0, trim_quantile=0.9)
        assert max(trimmed.person_ratios.values()) < max(untrimmed.person_ratios.values())


class TestCalibrateTotal:
    def test_scale_to_target(self):
        base = cells_sample({0: 8}, FEB, "b", weight=100.0)  # total 800
        # calibration is independent of the model: build an update directly
        from incomenowcast.reweight import WeightUpdate

        update = WeightUpdate(
            gamma=1.0,
            person_ratios={},
            household_factors={},
            new_weights={h.household_id: h.weight for h in base.households},
            base_sample=base,
            target_month=APR,
        )
        out = calibrate_total(update, 1000.0)
        assert out.total_weight() == pytest.approx(1000.0, rel=1e-12)
        assert all(h.weight == pytest.approx(125.0) for h in out.households)
        assert out.month == APR

    def test_identity_when_target_equals_sum(self):
        base = cells_sample({0: 5}, FEB, "b", weight=7.0)
        from incomenowcast.reweight import WeightUpdate

        update = WeightUpdate(1.0, {}, {}, {h.household_id: h.weight for h in base.households}, base, APR)
        out = calibrate_total(update, 35.0)
        for h_in, h_out in zip(base.households, out.households):
            assert h_out.weight == pytest.approx(h_in.weight, rel=1e-12)

    def test_random_targets_hit_exactly(self):
        rng = np.random.default_rng(11)
        from incomenowcast.reweight import WeightUpdate

        for _ in range(100):
            n = int(rng.integers(1, 50))
            weights = rng.uniform(0.01, 100, n)
            hs = [single_household(f"h{i:03d}", weight=float(w)) for i, w in enumerate(weights)]
            s = sample(hs, FEB)
            update = WeightUpdate(1.0, {}, {}, {h.household_id: h.weight for h in s.households}, s, APR)
            target = float(rng.uniform(0.1, 1e7))
            out = calibrate_total(update, target)
            assert abs(out.total_weight() - target) <= 1e-9 * target

    def test_zero_mass_errors(self):
        base = cells_sample({0: 2}, FEB, "b", weight=0.0)
        from incomenowcast.reweight import WeightUpdate

        update = WeightUpdate(1.0, {}, {}, {h.household_id: 0.0 for h in base.households}, base, APR)
        with pytest.raises(DataError):
            calibrate_total(update, 10.0)


class TestDiagnostics:
    def test_identical_sources_reproduce_baseline_shares(self):
        base = cells_sample({0: 30, 1: 30}, FEB, "b")
        panel = cells_sample({0: 20, 1: 20}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        update = compute_ratios(model, base, default_gamma(base, panel), trim_quantile=None)
        after = calibrate_total(update, base.total_weight())
        diag = reweight_diagnostics(base, after, panel)
        for name, b, p, m in diag.rows:
            assert m == pytest.approx(b, abs=1e-9), name

    def test_neff_of_equal_weights_is_n(self):
        assert effective_sample_size([2.0] * 17) == pytest.approx(17.0)

    def test_employment_share_tracks_panel_with_saturated_fit(self):
        # discrete covariates: sex x employment; saturated membership model
        def build(prefix, month, counts):
            households = []
            i = 0
            for (sex, state), n in counts.items():
                for _ in range(n):
                    hid = f"{prefix}{i:04d}"
                    kw = dict(sex=sex)
                    if state is not LabourState.EMPLOYED:
                        kw.update(
                            labour_state=state,
                            industry=None,
                            occupation=None,
                            usual_hours=0.0,
                            n_jobs=0,
                            wage_income=0.0,
                        )
                    households.append(single_household(hid, **kw))
                    i += 1
            return sample(households, month)

        E, U, N = LabourState.EMPLOYED, LabourState.UNEMPLOYED, LabourState.NOT_IN_LABOUR_FORCE
        base = build("b", FEB, {
            (Sex.MALE, E): 40, (Sex.MALE, U): 3, (Sex.MALE, N): 10,
            (Sex.FEMALE, E): 35, (Sex.FEMALE, U): 3, (Sex.FEMALE, N): 15,
        })
        panel = build("p", APR, {
            (Sex.MALE, E): 33, (Sex.MALE, U): 9, (Sex.MALE, N): 11,
            (Sex.FEMALE, E): 30, (Sex.FEMALE, U): 7, (Sex.FEMALE, N): 16,
        })
        model = fit_membership(
            base, panel, CovariateSpec(terms=("sex", "employment"), saturated=True)
        )
        update = compute_ratios(model, base, default_gamma(base, panel), trim_quantile=None)
        after = calibrate_total(update, base.total_weight())
        diag = reweight_diagnostics(base, after, panel).as_mapping()
        assert abs(
            diag["unemployment_rate"][2] - diag["unemployment_rate"][1]
        ) < 0.005

    def test_reweighting_preserves_records(self):
        base = cells_sample({0: 10, 1: 10}, FEB, "b")
        panel = cells_sample({0: 5, 1: 15}, APR, "p")
        model = fit_membership(base, panel, CovariateSpec(terms=("state",)))
        update = compute_ratios(model, base, 1.0)
        after = calibrate_total(update, 123.0)
        for h_in, h_out in zip(base.households, after.households):
            assert h_in.members == h_out.members
            assert h_in.household_id == h_out.household_id
