import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from bellbound.errors import BudgetError, ValidationError
from bellbound.quantum import QuantumModel, quantum_behavior, qubit_observable_povm, singlet
from bellbound.scenario import (
    Behavior,
    BellFunctional,
    BellScenario,
    bell_value,
    behavior_from_json,
    behavior_to_json,
    builtin_functional,
    chsh,
    correlation_function,
    correlation_functional,
    deterministic_behavior,
    functional_from_json,
    functional_to_json,
    is_nonsignaling,
    lhv_constants,
    mermin_klyshko,
    pr_box,
)
from bellbound.tensor import make_rng


def all_strategies(sc):
    tables = [list(itertools.product(range(sc.outcomes[n]), repeat=sc.settings[n])) for n in range(sc.parties)]
    return itertools.product(*tables)


def brute_constants(f):
    vals = [bell_value(f, deterministic_behavior(f.scenario, s)) for s in all_strategies(f.scenario)]
    return max(vals), min(vals)


def random_functional(seed, settings_, outcomes):
    sc = BellScenario(settings_, outcomes)
    return BellFunctional(sc, make_rng(seed).standard_normal(sc.shape))


def random_lhv_behavior(seed, sc, k=4):
    rng = make_rng(seed)
    strategies = list(all_strategies(sc))
    w = rng.dirichlet(np.ones(k))
    picks = rng.choice(len(strategies), size=k)
    p = sum(wi * deterministic_behavior(sc, strategies[i]).probs for wi, i in zip(w, picks))
    return Behavior(sc, p)


def test_scenario_validation():
    with pytest.raises(ValidationError):
        BellScenario((2,), (2,))
    with pytest.raises(ValidationError):
        BellScenario((2, 0), (2, 2))
    with pytest.raises(ValidationError):
        BellScenario((2, 2), (2, 1))
    with pytest.raises(ValidationError):
        BellScenario((2, 2), (2, 2, 2))


def test_scenario_shape_and_count():
    sc = BellScenario((2, 3), (2, 4))
    assert sc.parties == 2
    assert sc.shape == (2, 3, 2, 4)
    assert sc.strategy_count == 2**2 * 4**3
    assert len(list(sc.joint_settings())) == 6
    assert BellScenario.from_json(sc.to_json()) == sc


def test_behavior_rejects_bad_tables():
    sc = BellScenario.uniform(2)
    p = np.full(sc.shape, 0.25)
    Behavior(sc, p)
    bad = p.copy()
    bad[0, 0, 0, 0] = -0.1
    bad[0, 0, 1, 1] += 0.1
    with pytest.raises(ValidationError, match="negative"):
        Behavior(sc, bad)
    with pytest.raises(ValidationError, match="sum to 1"):
        Behavior(sc, p * 1.01)
    with pytest.raises(ValidationError, match="shape"):
        Behavior(sc, p[..., :1])


def test_functional_rejects_non_finite():
    sc = BellScenario.uniform(2)
    c = np.zeros(sc.shape)
    c[0, 0, 0, 0] = np.nan
    with pytest.raises(ValidationError):
        BellFunctional(sc, c)


def test_bell_value_zero_functional():
    sc = BellScenario.uniform(2)
    assert bell_value(BellFunctional(sc, np.zeros(sc.shape)), pr_box()) == 0


def test_bell_value_chsh_all_plus_one():
    sc = BellScenario.uniform(2)
    assert bell_value(chsh(), deterministic_behavior(sc, [(0, 0), (0, 0)])) == 2


def test_bell_value_tsirelson_behavior():
    m = QuantumModel(
        (2, 2),
        np.outer(singlet(), singlet().conj()),
        [[qubit_observable_povm(0), qubit_observable_povm(np.pi / 2)],
         [qubit_observable_povm(-3 * np.pi / 4), qubit_observable_povm(3 * np.pi / 4)]],
    )
    assert abs(bell_value(chsh(), quantum_behavior(m)) - 2 * np.sqrt(2)) <= 1e-9


def test_bell_value_scenario_mismatch():
    with pytest.raises(ValidationError, match="mismatch"):
        bell_value(chsh(), Behavior(BellScenario.uniform(3), np.full((2,) * 6, 1 / 8)))


def test_correlation_uniform_coins_is_zero():
    sc = BellScenario.uniform(2)
    assert correlation_function(Behavior(sc, np.full(sc.shape, 0.25)), (0, 1)) == 0


def test_correlation_perfectly_correlated_is_one():
    sc = BellScenario.uniform(2, settings=1)
    p = np.zeros(sc.shape)
    p[0, 0, 0, 0] = p[0, 0, 1, 1] = 0.5
    assert correlation_function(Behavior(sc, p), (0, 0)) == 1


def test_correlation_singlet_equal_axes_is_minus_one():
    m = QuantumModel((2, 2), np.outer(singlet(), singlet().conj()),
                     [[qubit_observable_povm(0.3)], [qubit_observable_povm(0.3)]])
    assert abs(correlation_function(quantum_behavior(m), (0, 0)) + 1) <= 1e-9


def test_correlation_marginal_and_custom_values():
    sc = BellScenario.uniform(2, settings=1)
    p = np.zeros(sc.shape)
    p[0, 0, 0, 1] = 0.75
    p[0, 0, 1, 0] = 0.25
    b = Behavior(sc, p)
    assert_allclose(correlation_function(b, (0, 0), sites=[0]), 0.5)
    assert_allclose(correlation_function(b, (0, 0), sites=[1], outcome_values=[None, [0.0, 3.0]]), 2.25)
    with pytest.raises(ValidationError):
        correlation_function(b, (0, 0), sites=[])


def test_lhv_chsh():
    c = lhv_constants(chsh())
    assert (c.sup, c.inf, c.lhv_norm) == (2.0, -2.0, 2.0)
    sc = chsh().scenario
    assert bell_value(chsh(), deterministic_behavior(sc, c.argsup)) == 2.0
    assert bell_value(chsh(), deterministic_behavior(sc, c.arginf)) == -2.0


def test_lhv_mermin_klyshko_three():
    c = lhv_constants(mermin_klyshko(3))
    assert c.lhv_norm == 2.0
    assert (c.sup, c.inf) == brute_constants(mermin_klyshko(3))


def test_lhv_single_party_dependence():
    # f(lambda) = lambda for one party with one setting; the second party is a spectator
    sc = BellScenario((1, 1), (2, 2))
    c = np.zeros(sc.shape)
    c[0, 0, 0, :] = 1.0
    c[0, 0, 1, :] = -1.0
    k = lhv_constants(BellFunctional(sc, c))
    assert (k.sup, k.inf) == (1.0, -1.0)


def test_lhv_budget_fault_carries_count():
    f = mermin_klyshko(6)
    with pytest.raises(BudgetError, match="enumeration too large") as info:
        lhv_constants(f, budget=1000)
    assert info.value.required == 4**6


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 3), min_size=2, max_size=3), st.integers(2, 3))
def test_lhv_matches_brute_force(seed, settings_, d):
    f = random_functional(seed, settings_, [d] * len(settings_))
    c = lhv_constants(f)
    assert_allclose((c.sup, c.inf), brute_constants(f), rtol=1e-12, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_lhv_negation_and_scaling(seed, scale):
    f = random_functional(seed, (2, 2), (2, 3))
    c = lhv_constants(f)
    n = lhv_constants(-f)
    assert_allclose((n.sup, n.inf, n.lhv_norm), (-c.inf, -c.sup, c.lhv_norm), rtol=1e-13)
    s = lhv_constants(scale * f)
    assert_allclose((s.sup, s.inf, s.lhv_norm), (scale * c.sup, scale * c.inf, scale * c.lhv_norm), rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lhv_behaviors_stay_in_lhv_range(seed):
    f = random_functional(seed, (2, 2, 2), (2, 2, 2))
    c = lhv_constants(f)
    p = random_lhv_behavior(seed + 1, f.scenario)
    v = bell_value(f, p)
    assert c.inf - 1e-12 <= v <= c.sup + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_bell_value_is_bilinear(seed, w):
    f = random_functional(seed, (2, 2), (2, 2))
    g = random_functional(seed + 1, (2, 2), (2, 2))
    p = random_lhv_behavior(seed + 2, f.scenario)
    q = random_lhv_behavior(seed + 3, f.scenario)
    assert abs(bell_value(f + 3.0 * g, p) - bell_value(f, p) - 3.0 * bell_value(g, p)) <= 1e-12
    mixed = bell_value(f, p.mix(q, w))
    assert abs(mixed - w * bell_value(f, p) - (1 - w) * bell_value(f, q)) <= 1e-12


def test_pr_box_is_nonsignaling_and_beats_tsirelson():
    assert is_nonsignaling(pr_box())
    assert bell_value(chsh(), pr_box()) == pytest.approx(4.0)


def test_signaling_table_detected():
    sc = BellScenario.uniform(2)
    p = np.zeros(sc.shape)
    # party 0 copies party 1's setting
    for x, y in itertools.product(range(2), repeat=2):
        p[x, y, y, 0] = 1.0
    rep = is_nonsignaling(Behavior(sc, p))
    assert not rep
    assert rep.worst == pytest.approx(1.0)


def test_deterministic_behaviors_are_nonsignaling():
    sc = BellScenario((2, 3), (3, 2))
    for strat in itertools.islice(all_strategies(sc), 50):
        assert is_nonsignaling(deterministic_behavior(sc, strat)).worst == 0


def test_chsh_coefficient_pattern():
    f = chsh()
    assert f.scenario.shape == (2, 2, 2, 2)
    signs = np.array([[1, -1], [-1, 1]])
    for x, y in itertools.product(range(2), repeat=2):
        expected = -signs if (x, y) == (1, 1) else signs
        assert_allclose(f.coeffs[x, y], expected)


def test_mermin_klyshko_two_is_chsh():
    assert_allclose(mermin_klyshko(2).coeffs, chsh().coeffs)


def test_mermin_klyshko_three_terms():
    # <A'BC> + <AB'C> + <ABC'> - <A'B'C'> on +-1 outcomes
    sc = BellScenario.uniform(3)
    terms = {(1, 0, 0): 1, (0, 1, 0): 1, (0, 0, 1): 1, (1, 1, 1): -1}
    assert_allclose(mermin_klyshko(3).coeffs, correlation_functional(sc, terms).coeffs)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_mermin_klyshko_lhv_norm_is_two(N):
    assert lhv_constants(mermin_klyshko(N)).lhv_norm == pytest.approx(2.0, abs=1e-12)


def test_builtin_lookup():
    assert_allclose(builtin_functional("CHSH").coeffs, chsh().coeffs)
    assert_allclose(builtin_functional("mk4").coeffs, mermin_klyshko(4).coeffs)
    assert_allclose(builtin_functional("mermin-klyshko", 3).coeffs, mermin_klyshko(3).coeffs)
    with pytest.raises(ValidationError, match="unknown"):
        builtin_functional("i3322")


def test_functional_and_behavior_json_round_trip():
    f = random_functional(5, (2, 3), (3, 2))
    g = functional_from_json(functional_to_json(f))
    assert g.scenario == f.scenario
    assert_allclose(g.coeffs, f.coeffs)
    p = pr_box()
    assert_allclose(behavior_from_json(behavior_to_json(p)).probs, p.probs)


def test_functional_json_rejects_out_of_range():
    obj = {"scenario": {"settings": [2, 2], "outcomes": [2, 2]}, "coeffs": [{"s": [0, 2], "lam": [0, 0], "c": 1}]}
    with pytest.raises(ValidationError, match="out of range"):
        functional_from_json(obj)
