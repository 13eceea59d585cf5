import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermomech.errors import DimensionError, DomainError
from thermomech.geometry import (ContactChart, FundamentalEquation, LegendrePatch, TangentThermo,
                                 composite_chart, contact_form, pullback_residual,
                                 state_equations)
from thermomech.thermo import (BodyParams, IdealGasParams, body_chart, body_patch, gas_chart,
                               gas_fundamental_equation, gas_patch)

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_body_chart_contact_form_examples():
    chart = body_chart()
    assert contact_form(chart, TangentThermo([2.0, 0.0, 0.0], [0.0, 1.0, 0.0])) == -2.0
    assert contact_form(chart, TangentThermo([2.0, 0.0, 0.0], [0.0, 0.0, 1.0])) == 1.0


def test_gas_chart_contact_form_example():
    chart = gas_chart()
    base = np.zeros(5)
    base[chart.index("P")] = 5.0
    base[chart.index("T")] = 3.0
    delta = np.zeros(5)
    delta[chart.index("V")] = 2.0
    delta[chart.index("S")] = 1.0
    delta[chart.index("U")] = 4.0
    assert contact_form(chart, TangentThermo(base, delta)) == 11.0


def test_contact_form_rejects_bad_input():
    chart = gas_chart()
    with pytest.raises(DimensionError):
        contact_form(chart, TangentThermo([1.0, 1.0, 1.0], [0.0, 0.0, 0.0]))
    with pytest.raises(DomainError):
        contact_form(chart, TangentThermo([1.0, 0.0, 1.0, 0.0, 0.0], np.zeros(5)))


def test_chart_invariants():
    assert gas_chart().coordinate_names == ("P", "T", "V", "S", "U")
    with pytest.raises(DimensionError):
        ContactChart(2, ("P", "T", "V", "S"))
    with pytest.raises(DimensionError):
        ContactChart(1, ("T", "T", "U"))
    with pytest.raises(DimensionError):
        ContactChart(1, ("A", "B", "C"))
    with pytest.raises(DimensionError):
        ContactChart(0, ())


def test_composite_chart_names_and_form():
    chart = composite_chart(gas_chart(), body_chart())
    assert chart.coordinate_names == ("P", "T", "V", "S", "U", "T_c", "S_c", "U_c")
    assert chart.d == 3 and chart.factors == (2, 1)
    base = np.array([2.0, 3.0, 1.0, 0.0, 0.0, 5.0, 0.0, 0.0])
    delta = np.array([0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0])
    # dU - T dS + P dV + dU_c - T_c dS_c
    assert contact_form(chart, TangentThermo(base, delta)) == pytest.approx(1 - 3 + 2 + 1 - 5)


def test_composite_chart_rejects_non_charts():
    with pytest.raises(TypeError):
        composite_chart(gas_chart(), None)


def test_composite_suffix_counter():
    twice = composite_chart(composite_chart(body_chart(), body_chart()), body_chart())
    assert twice.coordinate_names == ("T", "S", "U", "T_c", "S_c", "U_c", "T_c2", "S_c2", "U_c2")


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=5, max_size=5), st.lists(finite, min_size=5, max_size=5),
       finite, finite, st.floats(0.1, 100))
def test_contact_form_is_linear(v, w, a, b, T):
    chart = gas_chart()
    base = np.array([1.5, T, 2.0, 0.3, 4.0])
    v, w = np.array(v), np.array(w)
    lhs = contact_form(chart, TangentThermo(base, a * v + b * w))
    rhs = a * contact_form(chart, TangentThermo(base, v)) + b * contact_form(chart, TangentThermo(base, w))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9 * (1 + abs(a) + abs(b)) * 1e3)


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=5, max_size=5), st.lists(finite, min_size=3, max_size=3))
def test_composite_form_is_additive(dv_gas, dv_body):
    gas, body = gas_chart(), body_chart()
    chart = composite_chart(gas, body)
    base_gas = np.array([1.2, 2.5, 3.0, 0.1, 3.75])
    base_body = np.array([4.0, 0.2, 2.0])
    total = contact_form(chart, TangentThermo(np.concatenate([base_gas, base_body]),
                                              np.concatenate([dv_gas, dv_body])))
    parts = (contact_form(gas, TangentThermo(base_gas, dv_gas))
             + contact_form(body, TangentThermo(base_body, dv_body)))
    assert total == pytest.approx(parts, rel=1e-12, abs=1e-9)
    only_a = contact_form(chart, TangentThermo(np.concatenate([base_gas, base_body]),
                                               np.concatenate([dv_gas, np.zeros(3)])))
    assert only_a == pytest.approx(contact_form(gas, TangentThermo(base_gas, dv_gas)), abs=1e-12)


def test_state_equations_body_example():
    # nu = T0 = 1, S0 = 0: phi(S) = exp(S), numeric gradient
    point = state_equations(FundamentalEquation(lambda y, S: math.exp(S)), [], 0.0)
    assert np.allclose(point, [1.0, 0.0, 1.0], atol=1e-9)
    point = body_patch(BodyParams(1.0)).point([], 0.0)
    assert np.allclose(point, [1.0, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("analytic", [True, False])
def test_state_equations_gas_match_state_law(analytic):
    p = IdealGasParams(n0r=1.0, alpha=1.5)
    for V, S in [(0.7, 0.2), (2.0, -1.0), (5.0, 3.0)]:
        P, T, Vo, So, U = state_equations(gas_fundamental_equation(p), [V], S, analytic=analytic)
        assert (Vo, So) == (V, S)
        assert T == pytest.approx(U / (p.n0r * p.alpha), rel=1e-8)
        assert P == pytest.approx(U / (V * p.alpha), rel=1e-8)
        # log form of the entropy law gives back S
        S_back = p.s0 + p.n0r * math.log((T / p.t0) ** p.alpha * V / p.v0)
        assert S_back == pytest.approx(S, abs=1e-8)


def test_state_equations_errors():
    phi = gas_fundamental_equation(IdealGasParams())
    with pytest.raises(DomainError):
        state_equations(phi, [-1.0], 0.0)
    cold = FundamentalEquation(lambda y, S: -S, 0, lambda y, S: (np.zeros(0), -1.0))
    with pytest.raises(DomainError):
        state_equations(cold, [], 0.0)
    with pytest.raises(DimensionError):
        state_equations(phi, [1.0, 2.0], 0.0)


def test_fundamental_gradient_matches_differences():
    p = IdealGasParams(n0r=2.0, alpha=2.5, s0=0.3, t0=1.7, v0=0.4)
    samples = [([V], S) for V in (0.3, 1.0, 4.0) for S in (-1.0, 0.5, 2.0)]
    assert gas_fundamental_equation(p).gradient_mismatch(samples) <= 1e-5


GRID_V = np.linspace(0.5, 5.0, 10)
GRID_S = np.linspace(-1.0, 2.0, 10)


@pytest.mark.parametrize("params", [IdealGasParams(),
                                    IdealGasParams(n0r=2.0, alpha=2.5, s0=0.3, t0=1.7, v0=0.4)])
def test_gas_patch_is_legendre(params):
    analytic = gas_patch(params, analytic=True)
    numeric = gas_patch(params, analytic=False)
    worst_a = max(pullback_residual(analytic, [V], S) for V in GRID_V for S in GRID_S)
    worst_n = max(pullback_residual(numeric, [V], S) for V in GRID_V for S in GRID_S)
    assert worst_a <= 1e-10
    assert worst_n <= 1e-6


def test_body_patch_is_legendre():
    for analytic in (True, False):
        patch = body_patch(BodyParams(0.5, t0=2.0, s0=0.1), analytic=analytic)
        worst = max(pullback_residual(patch, [], S) for S in np.linspace(-1.0, 2.0, 100))
        assert worst <= (1e-10 if analytic else 1e-6)


def test_perturbed_patch_residual_tracks_perturbation():
    eps = 1e-3
    base = gas_patch(IdealGasParams())
    t_index = base.chart.index("T")

    def shifted(y, S):
        point = base.point(y, S).copy()
        point[t_index] += eps
        return point

    patch = LegendrePatch(base.chart, shifted, 1)
    # only the S-tangent feels the shift: theta(d/dS) = T - (T + eps) * dS/dS
    residual = pullback_residual(patch, [1.3], 0.4)
    assert abs(residual - eps * 1.0) <= 0.1 * eps
