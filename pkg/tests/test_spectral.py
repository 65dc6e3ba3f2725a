import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from htme.operators import random_hermitian
from htme.spectral import (
    BosonicRadiative, LorentzianClassical, Tabulated, balance_residual, discrete_spectral_density, occupation,
)


@settings(max_examples=50, deadline=None)
@given(beta=st.floats(1e-3, 60.0), w=st.floats(1e-2, 10.0))
def test_bosonic_detailed_balance(beta, w):
    m = BosonicRadiative(beta_T=beta, scale=0.7)
    assert balance_residual(m, [w]) <= 1e-15


def test_bosonic_values_and_branches():
    m = BosonicRadiative(beta_T=0.1, scale=2.0)
    n = occupation(0.1, 1.5)
    assert m.matrix(1.5)[0, 0] == pytest.approx(2.0 * 1.5**3 * (1 + n), rel=1e-15)
    assert m.matrix(-1.5)[0, 0] == pytest.approx(2.0 * 1.5**3 * n, rel=1e-15)
    emi = m.with_mode("symmetrized")
    sti = BosonicRadiative(beta_T=0.1, scale=2.0, mode="symmetrized", high_t_branch="stimulated")
    assert emi.matrix(-1.5)[0, 0] == emi.matrix(1.5)[0, 0] == pytest.approx(2.0 * 1.5**3 * (1 + n))
    assert sti.matrix(-1.5)[0, 0] == sti.matrix(1.5)[0, 0] == pytest.approx(2.0 * 1.5**3 * n)
    w = sti.with_mode("redfield_weighted")
    assert w.matrix(1.5)[0, 0] / w.matrix(-1.5)[0, 0] == pytest.approx(np.exp(0.15))
    with pytest.raises(ValueError):
        m.matrix(0.0)
    with pytest.raises(ValueError):
        BosonicRadiative(beta_T=0.1, mode="bogus")


def test_occupation_small_argument_precision():
    assert occupation(1e-12, 1.0) == pytest.approx(1e12 - 0.5, rel=1e-12)
    with pytest.raises(ValueError):
        occupation(0.0, 1.0)


def test_lorentzian_and_correlation_validation():
    m = LorentzianClassical(beta_T=0.01, tau=0.5, omega_rms=3.0, kappa=((1, 0.4), (0.4, 1)))
    assert m.matrix(2.0)[0, 1] == pytest.approx(0.4 * 9 * 1.0 / 2)
    assert m.eval(1, 1, 0.0) == pytest.approx(9.0)
    fixed = LorentzianClassical(beta_T=0.01, tau=0.5, fixed_frequency=2.0)
    assert fixed.matrix(0.0)[0, 0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        LorentzianClassical(beta_T=0.0, kappa=((1, 2), (2, 1)))
    with pytest.raises(IndexError):
        m.eval(2, 0, 1.0)


def test_discrete_bath_balance_per_line(rng):
    for _ in range(10):
        model = discrete_spectral_density(random_hermitian(4, rng), [random_hermitian(4, rng) for _ in range(2)], 0.9)
        lines = [w for w in model._omega if w > 0]
        assert lines
        assert balance_residual(model, lines) <= 1e-12


def test_tabulated_json_round_trip(tmp_path, rng):
    model = discrete_spectral_density(random_hermitian(3, rng), [random_hermitian(3, rng)], 0.5)
    path = tmp_path / "j.json"
    model.save_json(path)
    again = Tabulated.load_json(path)
    assert again.to_dict() == model.to_dict()
    for w in model._omega:
        assert np.array_equal(again.matrix(w), model.matrix(w))
    assert np.all(again.matrix(1e9) == 0)


def test_tabulated_interpolation_and_errors():
    t = Tabulated(beta_T=1.0, omegas=(0.0, 2.0), samples=([[1.0]], [[3.0]]), interpolate=True)
    assert t.matrix(1.0)[0, 0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        Tabulated.from_dict({"omega": [1.0], "J": [[1, 2, 3]], "beta_T": 1})
    with pytest.raises(ValueError):
        Tabulated.from_dict({"omega": [1.0], "J": [[1]]})
    with pytest.raises(ValueError):
        Tabulated.from_dict({"omega": [1.0], "J": [[1]], "extra": 0})
