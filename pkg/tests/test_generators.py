import json

import numpy as np
import pytest

from htme import generators as gens
from htme.config import SingletTripletConfig, TlsConfig
from htme.eigenops import decompose_channels
from htme.operators import pauli, random_density_matrix, random_hermitian
from htme.scenarios import spin_pair_system, tls_system
from htme.spectral import BosonicRadiative, Tabulated, discrete_spectral_density, occupation


def _gksl(h, jumps):
    """Independent GKSL construction from (rate, L) pairs."""
    d = h.shape[0]

    def f(x):
        out = np.zeros_like(x)
        for g, L in jumps:
            Ld = L.conj().T
            out += g * (L @ x @ Ld - 0.5 * (Ld @ L @ x + x @ Ld @ L))
        return out

    return gens._affine(f, d)[0]


def test_vec_is_column_stacking():
    x = np.array([[1, 2], [3, 4]])
    assert list(gens.vec(x)) == [1, 3, 2, 4]
    assert np.array_equal(gens.unvec(gens.vec(x), 2), x)


def test_tls_lindblad_matches_independent_gksl():
    h, ch, model = tls_system(TlsConfig(beta_T=0.7, gamma0=1.3))
    gen = gens.build_lindblad(h, ch, model)
    n = occupation(0.7, 1.0)
    ref = _gksl(h, [(1.3 * (n + 1), pauli("minus")), (1.3 * n, pauli("plus"))])
    assert np.max(np.abs(gen.M - ref)) <= 1e-13
    assert gens.kossakowski_check(gen)[0]


def test_lindblad_rejects_unbalanced_and_symmetrized(rng):
    h, ch, model = tls_system(TlsConfig(beta_T=0.3))
    with pytest.raises(ValueError):
        gens.build_lindblad(h, ch, model.with_mode("symmetrized"))
    weighted = BosonicRadiative(beta_T=0.3, mode="redfield_weighted")
    gens.build_lindblad(h, ch, weighted)  # weighting restores the balance ratio
    bad = Tabulated(beta_T=0.3, omegas=(-1.0, 1.0), samples=([[1.0]], [[1.0]]))
    with pytest.raises(ValueError, match="detailed balance"):
        gens.build_lindblad(h, ch, bad)
    gens.build_lindblad(h, ch, bad, check_balance=False)


def test_all_kinds_preserve_trace_and_hermiticity(rng):
    rhos = [random_density_matrix(4, rng) for _ in range(20)]
    h, ch, model = spin_pair_system(SingletTripletConfig())
    for kind in ("htme", "arh", "double_commutator"):
        gen = gens.build(kind, h, ch, model)
        t, e = gens.check_generator_invariants(gen, rhos)
        assert t <= 1e-12 and e <= 1e-12
    h, ch, model = tls_system(TlsConfig())
    for kind in ("lindblad", "linearized"):
        gen = gens.build(kind, h, ch, model)
        t, e = gens.check_generator_invariants(gen, [random_density_matrix(2, rng) for _ in range(20)])
        assert t <= 1e-12 and e <= 1e-12


def test_linearized_equals_htme_on_random_systems(rng):
    for _ in range(3):
        h = random_hermitian(3, rng)
        ch = decompose_channels(h, [random_hermitian(3, rng) for _ in range(2)], 1e-8)
        model = discrete_spectral_density(random_hermitian(3, rng), [random_hermitian(3, rng) for _ in range(2)], 0.05)
        beta = 0.05 / max(1.0, float(np.max(np.abs(np.linalg.eigvalsh(h)))))
        model = model.with_beta(beta)
        lin = gens.build_linearized(h, ch, model)
        ht = gens.build_htme(h, ch, model.with_mode("symmetrized"), gens.equilibrium(h, beta))
        scale = np.max(np.abs(lin.M))
        assert np.max(np.abs(lin.M - ht.M)) <= 1e-10 * max(scale, 1.0)


def test_equilibrium_flavors_and_checks():
    h = 0.5 * pauli("z")
    gibbs = gens.equilibrium(h, 0.2, "gibbs").value
    assert gibbs[1, 1] / gibbs[0, 0] == pytest.approx(np.exp(0.2))
    lin = gens.equilibrium(h, 0.2).value
    assert np.allclose(lin, np.diag([0.45, 0.55]))
    with pytest.raises(ValueError):
        gens.equilibrium(h, 5.0)
    _, ch, model = tls_system(TlsConfig(beta_T=0.2))
    with pytest.raises(ValueError):
        gens.build_arh(h, ch, model.with_mode("symmetrized"), gens.equilibrium(h, 0.1))
    with pytest.raises(ValueError):
        gens.build_htme(h, ch, model, gens.equilibrium(h, 0.2))


def test_double_commutator_steady_state_is_maximally_mixed():
    h, ch, model = spin_pair_system(SingletTripletConfig())
    gen = gens.build_double_commutator(h, ch, model)
    assert np.max(np.abs(gen.apply(np.eye(4) / 4))) <= 1e-14


def test_expansion_identity_on_random_composites(rng):
    for d_b in (2, 3):
        r = gens.expansion_identity_residual(
            random_hermitian(2 * d_b, rng), random_hermitian(2 * d_b, rng),
            random_density_matrix(2, rng), random_density_matrix(d_b, rng),
        )
        assert r <= 1e-12


def test_generator_json_round_trip(tmp_path):
    h, ch, model = tls_system(TlsConfig(beta_T=0.2))
    gen = gens.build("htme", h, ch, model.with_mode("symmetrized"))
    path = tmp_path / "g.json"
    gen.save_json(path)
    again = gens.Generator.from_dict(json.loads(path.read_text()))
    assert np.array_equal(again.M, gen.M) and np.array_equal(again.b, gen.b)
    assert again.to_dict() == gen.to_dict()


def test_generator_shape_validation():
    with pytest.raises(ValueError):
        gens.Generator(np.zeros((3, 3)), np.zeros(3), "lindblad")
    with pytest.raises(ValueError):
        gens.Generator(np.zeros((4, 4)), np.zeros(4), "bogus")
    with pytest.raises(ValueError):
        gens.build("bogus", np.eye(2), [], None)
