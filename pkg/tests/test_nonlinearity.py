import numpy as np
import pytest

from polysing.nonlinearity import Nonlinearity, Weight, classify_growth, validate_hypotheses


def test_hypotheses_pass_for_model_problem():
    rep = validate_hypotheses(Nonlinearity.power(2), Weight.power_law(-1), 2)
    assert rep.passed
    lo, hi = rep["H2"].witness["k_range"]
    assert lo == pytest.approx(4 / 3) and hi == pytest.approx(4)
    assert lo < rep["H2"].witness["k"] < hi
    assert np.isfinite(rep["H2"].witness["integral_a_k"])


def test_h1_fails_for_sign_changing_f():
    t = np.linspace(0, 3, 31)
    rep = validate_hypotheses(Nonlinearity.tabulated(t, t ** 2 - t), Weight.power_law(-1), 2)
    assert not rep["H1"].passed
    assert rep["H1"].witness["reason"] == "f < 0"
    assert rep["H1"].witness["t"] < 1


def test_h1_fails_for_nonzero_origin():
    t = np.linspace(0, 3, 31)
    rep = validate_hypotheses(Nonlinearity.tabulated(t, 1 + t), Weight.power_law(0), 2)
    assert not rep["H1"].passed


def test_h2_fails_for_strong_weight():
    rep = validate_hypotheses(Nonlinearity.power(2), Weight.power_law(-3.5), 2)
    assert not rep["H2"].passed
    assert rep["H2"].witness["diverged"]


def test_h3_fails_for_vanishing_weight():
    rep = validate_hypotheses(Nonlinearity.power(2), Weight.power_law(1.0), 2)
    assert not rep["H3"].passed
    assert rep["H1"].passed


def test_validation_never_raises_on_declared_bad_k():
    rep = validate_hypotheses(Nonlinearity.power(2), Weight.power_law(-1, k=1.0), 2)
    assert not rep.passed


def test_weight_power_law_range():
    for sigma in (-2.9, -1.0, -0.1):
        assert validate_hypotheses(Nonlinearity.power(3), Weight.power_law(sigma), 2).passed
    assert Weight.power_law(-1).admissible_k(3) == (pytest.approx(6 / 5), pytest.approx(6))


def test_classify_examples():
    cubic = classify_growth(Nonlinearity.power(3))
    assert cubic.superquadratic and cubic.sub_exponential and not cubic.super_exponential
    assert cubic.gamma_min == 0.0
    e2 = classify_growth(Nonlinearity.exp_power(2))
    assert e2.super_exponential and e2.label == "super_exponential"
    lin = classify_growth(Nonlinearity.power(1))
    assert not lin.superquadratic


def test_exponential_kind_witness():
    f = Nonlinearity.exponential(2.0, 3.0)
    g = classify_growth(f)
    assert g.sub_exponential and g.gamma == 2.0 and g.C == 3.0
    t = np.linspace(0, 50, 501)
    assert np.all(f(t) <= 3.0 * np.exp(2.0 * t) * (1 + 1e-12))


def test_scale_consistency():
    for f in (Nonlinearity.power(2), Nonlinearity.power(1.5), Nonlinearity.exp_power(0.5),
              Nonlinearity.exp_power(2.0), Nonlinearity.exponential(1.0)):
        a, b = classify_growth(f), classify_growth(f.scaled(7.0))
        assert (a.superquadratic, a.sub_exponential, a.super_exponential) == \
               (b.superquadratic, b.sub_exponential, b.super_exponential)


def test_tabulated_classification_matches_symbolic():
    t = np.linspace(0, 1000, 200001)
    cubic = classify_growth(Nonlinearity.tabulated(t, t ** 3))
    assert cubic.method == "sampled"
    assert cubic.superquadratic and cubic.sub_exponential
    with np.errstate(over="ignore"):
        fast = Nonlinearity.tabulated(t, np.expm1(np.minimum(t ** 2, 700.0)) + t ** 2)
    assert classify_growth(fast, t_max=30).super_exponential
    lin = classify_growth(Nonlinearity.tabulated(t, t))
    assert not lin.superquadratic
    with pytest.raises(ValueError):
        classify_growth(Nonlinearity.tabulated(t[:100], t[:100] ** 2), t_max=100)
    with pytest.raises(ValueError):
        classify_growth(Nonlinearity.power(2), t_max=5)


def test_witness_constants():
    f = Nonlinearity.power(2)
    C = f.witness_constant(1.0)
    assert C == pytest.approx(4 / np.e ** 2)
    t = np.linspace(0, 40, 4001)
    assert np.all(f(t) <= C * np.exp(t) * (1 + 1e-12))
    assert Nonlinearity.exp_power(2).witness_constant(5.0) is None
    assert Nonlinearity.exponential(2.0).witness_constant(1.0) is None
    h = Nonlinearity.exp_power(0.5)
    Ch = h.witness_constant(0.3)
    t = np.geomspace(1e-6, 2000, 5001)
    assert np.all(h(t) <= Ch * np.exp(0.3 * t))


def test_log_value_matches_value():
    t = np.array([0.1, 1.0, 5.0])
    for f in (Nonlinearity.power(2, 3.0), Nonlinearity.exponential(1.5, 2.0), Nonlinearity.exp_power(1.5)):
        assert np.allclose(f.log_value(t), np.log(f(t)))
    assert np.isfinite(Nonlinearity.exp_power(2).log_value(100.0))


def test_constructor_validation():
    with pytest.raises(ValueError):
        Nonlinearity("cubic")
    with pytest.raises(ValueError):
        Nonlinearity.power(-1)
    with pytest.raises(ValueError):
        Nonlinearity.power(2, scale=0)
    with pytest.raises(ValueError):
        Nonlinearity.tabulated([0, 1, 1], [0, 1, 2])
    with pytest.raises(ValueError):
        Weight.power_law(-1, coefficient=-1)
    w = Weight.tabulated([0.1, 0.5, 1.0], [3.0, 2.0, 1.0])
    assert w.essential_infimum() == 1.0
    with pytest.raises(ValueError):
        w(np.array([0.05]))


def test_descriptors_roundtrip_fields():
    d = Nonlinearity.exponential(2.0, 3.0).descriptor()
    assert d == {"kind": "exponential", "gamma": 2.0, "scale": 3.0}
    assert Weight.power_law(-1, k=2.0).descriptor()["k"] == 2.0
