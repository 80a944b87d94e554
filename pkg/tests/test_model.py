import math

import numpy as np
import pytest

from sidare.model import (
    INITIAL_STATE,
    EpidemicState,
    ModelParams,
    Stability,
    basic_reproduction_number,
    beta_from_r0,
    capacity_mortality,
    classify_equilibrium,
    vector_field,
)


def test_default_reproduction_number(params):
    r0 = basic_reproduction_number(params)
    assert abs(r0 - 3.27) < 0.02


def test_reproduction_number_uses_testing_rate(params):
    slow = params.replace(nu=0.05)
    assert basic_reproduction_number(slow) < basic_reproduction_number(params)
    expected = params.beta * INITIAL_STATE.s / (params.gamma_i + params.xi_i
                                                + 0.05)
    assert basic_reproduction_number(slow) == pytest.approx(expected, rel=1e-12)


def test_beta_from_r0_round_trip(params):
    for r0 in (1.0, 3.17, 3.27, 3.38):
        p2 = params.replace(beta=beta_from_r0(r0, params))
        assert basic_reproduction_number(p2) == pytest.approx(r0, rel=1e-12)


def test_beta_from_r0_pins_testing_to_zero(params):
    """The onset convention ignores nu, so slow testing maps identically."""
    assert beta_from_r0(3.38, params.replace(nu=0.05)) == beta_from_r0(
        3.38, params)


def test_beta_from_r0_rejects_bad_inputs(params):
    with pytest.raises(ValueError):
        beta_from_r0(0.0, params)
    with pytest.raises(ValueError):
        beta_from_r0(3.0, params, s0=0.0)


def test_capacity_mortality_branches(params):
    h = params.h_bar
    assert capacity_mortality(0.0, params) == 0.0
    assert capacity_mortality(0.5 * h, params) == pytest.approx(
        params.mu * 0.5 * h, rel=1e-15)
    # the kink belongs to the sub-capacity branch
    assert capacity_mortality(h, params) == pytest.approx(params.mu * h,
                                                          rel=1e-15)
    above = capacity_mortality(2.0 * h, params)
    assert above == pytest.approx(params.mu * h + params.mu_hat * h, rel=1e-15)
    # continuity across the kink
    eps = 1e-12
    assert capacity_mortality(h + eps, params) == pytest.approx(
        capacity_mortality(h, params), abs=1e-13)


def test_capacity_mortality_rejects_out_of_range(params):
    with pytest.raises(ValueError):
        capacity_mortality(-0.1, params)
    with pytest.raises(ValueError):
        capacity_mortality(1.1, params)


def test_disease_free_states_are_fixed_points(params):
    rng = np.random.default_rng(42)
    for _ in range(100):
        s = float(rng.uniform(0.0, 1.0))
        r = float(rng.uniform(0.0, 1.0 - s))
        e = 1.0 - s - r
        x = EpidemicState(s=s, i=0.0, d=0.0, a=0.0, r=r, e=e)
        assert vector_field(x, 0.0, params) == (0.0, 0.0, 0.0, 0.0, 0.0)
        assert vector_field(x, params.u_max, params) == (0.0,) * 5


def test_vector_field_conserves_population(params):
    x = EpidemicState(s=0.8, i=0.1, d=0.03, a=0.02, r=0.04, e=0.01)
    dx = vector_field(x, 0.3, params)
    dr = params.gamma_i * x.i + params.gamma_d * x.d + params.gamma_a * x.a
    # the terms cancel pairwise in exact arithmetic; the float regrouping
    # (one (gamma_i + xi_i + nu) * i product on the i side vs separate
    # products in dr) leaves a few ulps of the ~1e-2 rate terms
    assert sum(dx) + dr == pytest.approx(0.0, abs=1e-16)


def test_vector_field_control_shuts_off_transmission(params):
    x = EpidemicState(s=0.9, i=0.05, d=0.0, a=0.0, r=0.05, e=0.0)
    p_full = params.replace(u_max=1.0)
    ds, di, *_ = vector_field(x, 1.0, p_full)
    assert ds == 0.0
    assert di == pytest.approx(-(params.gamma_i + params.xi_i) * x.i,
                               rel=1e-15)


def test_vector_field_rejects_inadmissible_control(params):
    with pytest.raises(ValueError):
        vector_field(INITIAL_STATE, -0.1, params)
    with pytest.raises(ValueError):
        vector_field(INITIAL_STATE, params.u_max + 0.01, params)


def test_classification_matches_growth_sign(params):
    rng = np.random.default_rng(7)
    threshold = (params.gamma_i + params.xi_i + params.nu) / params.beta
    for _ in range(100):
        s_star = float(rng.uniform(0.0, 1.0))
        cls = classify_equilibrium(s_star, params)
        growth = params.beta * s_star - params.gamma_i - params.xi_i - params.nu
        if growth > 0:
            assert cls.stability is Stability.UNSTABLE
        else:
            assert cls.stability is Stability.LOCALLY_STABLE
        assert cls.threshold == pytest.approx(threshold, rel=1e-12)
        assert cls.eigenvalues[2] == pytest.approx(growth, rel=1e-12)
        assert cls.eigenvalues[0] == -params.gamma_d - params.xi_d
        assert cls.eigenvalues[1] == -params.gamma_a - params.mu


def test_classification_marginal_and_zero_beta(params):
    threshold = (params.gamma_i + params.xi_i + params.nu) / params.beta
    assert classify_equilibrium(threshold, params).stability is \
        Stability.MARGINAL
    p0 = ModelParams(beta=0.0)
    cls = classify_equilibrium(1.0, p0)
    assert cls.stability is Stability.LOCALLY_STABLE
    assert math.isinf(cls.threshold)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(beta=-0.1)
    with pytest.raises(ValueError):
        ModelParams(mu=0.02, mu_hat=0.01)
    with pytest.raises(ValueError):
        ModelParams(u_max=0.0)
    with pytest.raises(ValueError):
        ModelParams(h_bar=0.0)


def test_epidemic_state_validation():
    with pytest.raises(ValueError):
        EpidemicState(s=0.5, i=0.5, d=0.2, a=0.0, r=0.0, e=0.0)
    with pytest.raises(ValueError):
        EpidemicState(s=-0.2, i=0.8, d=0.2, a=0.1, r=0.1, e=0.0)
    x = EpidemicState.from_vector((0.7, 0.1, 0.05, 0.05, 0.02))
    assert x.r == pytest.approx(1.0 - 0.7 - 0.1 - 0.05 - 0.05 - 0.02)
    assert x.as_vector() == (0.7, 0.1, 0.05, 0.05, 0.02)


def test_initial_state_is_outbreak_onset():
    assert INITIAL_STATE.i == 1e-5
    assert INITIAL_STATE.s == 1.0 - 1e-5
    assert INITIAL_STATE.d == INITIAL_STATE.a == INITIAL_STATE.e == 0.0
