"""Named invariant suites run by ``htme check``."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import generators as gens
from .config import SingletTripletConfig, TlsConfig
from .eigenops import decompose, decompose_channels
from .evolution import steady_state
from .operators import random_density_matrix, random_hermitian
from .scenarios import run_tls, spin_pair_system, tls_system
from .spectral import balance_residual, discrete_spectral_density

FAULTS = ("lindblad_sign",)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def flip_thermal_term(gen: gens.Generator, reference: gens.Generator) -> gens.Generator:
    """Fault injection: reverse the sign of the temperature-dependent part of a Lindblad generator."""
    return gens.Generator(2 * reference.M - gen.M, gen.b, gen.kind, gen.metadata)


def resonant_bath_system(dim: int, n_channels: int, beta_T: float, rng):
    """Random system whose bath is a copy of it, so every system gap has a bath line."""
    h = random_hermitian(dim, rng)
    couplings = [random_hermitian(dim, rng) for _ in range(n_channels)]
    bath_ops = [random_hermitian(dim, rng) for _ in range(n_channels)]
    model = discrete_spectral_density(h, bath_ops, beta_T)
    channels = decompose_channels(h, couplings, freq_tol=1e-8)
    return h, channels, model


def _tls(beta_T=0.01, branch="stimulated"):
    return tls_system(TlsConfig(beta_T=beta_T, high_t_branch=branch))


def _all_kinds(h, channels, model_q):
    sym = model_q.with_mode("symmetrized")
    return {
        "lindblad": gens.build("lindblad", h, channels, model_q),
        "linearized": gens.build("linearized", h, channels, model_q),
        "htme": gens.build("htme", h, channels, sym),
        "arh": gens.build("arh", h, channels, sym),
        "double_commutator": gens.build("double_commutator", h, channels, sym),
    }


def check_expansion_identity(rng, draws):
    worst = 0.0
    for _ in range(draws):
        d_b = int(rng.choice([2, 3]))
        n = 2 * d_b
        worst = max(worst, gens.expansion_identity_residual(
            random_hermitian(n, rng), random_hermitian(n, rng),
            random_density_matrix(2, rng), random_density_matrix(d_b, rng),
        ))
    return worst <= 1e-12, f"max residual {worst:.2e} over {draws} draws"


def check_detailed_balance(rng, draws):
    _, _, bos = _tls(0.3)
    r_bos = balance_residual(bos, np.linspace(0.1, 5, 25))
    r_disc = 0.0
    for _ in range(draws):
        model = discrete_spectral_density(random_hermitian(4, rng), [random_hermitian(4, rng) for _ in range(2)], 0.7)
        r_disc = max(r_disc, balance_residual(model, [w for w in model._omega if w > 0]))
    ok = r_bos <= 1e-15 and r_disc <= 1e-12
    return ok, f"bosonic {r_bos:.2e}, discrete bath {r_disc:.2e}"


def check_eigenoperators(rng, draws):
    rec = comm = adj = 0.0
    for _ in range(draws):
        d = int(rng.integers(2, 7))
        h, a = random_hermitian(d, rng), random_hermitian(d, rng)
        s = decompose(h, a, 1e-8)
        rec = max(rec, float(np.max(np.abs(s.total() - a))))
        for w, A in s.components.items():
            comm = max(comm, float(np.linalg.norm(h @ A - A @ h + w * A) / np.linalg.norm(A)))
            adj = max(adj, float(np.max(np.abs(s.components[-w] - A.conj().T))))
    ok = rec <= 1e-12 and comm <= 1e-10 and adj <= 1e-12
    return ok, f"reconstruction {rec:.1e}, commutation {comm:.1e}, adjoint {adj:.1e}"


def check_generator_structure(rng, draws):
    worst_t = worst_h = 0.0
    systems = [_tls(), spin_pair_system(SingletTripletConfig())]
    for h, ch, model in systems:
        q = model.with_mode("quantum")
        kinds = _all_kinds(h, ch, q) if q.kind == "bosonic_radiative" else {
            k: gens.build(k, h, ch, model) for k in ("htme", "arh", "double_commutator")
        }
        rhos = [random_density_matrix(h.shape[0], rng) for _ in range(draws)]
        for gen in kinds.values():
            t, e = gens.check_generator_invariants(gen, rhos)
            worst_t, worst_h = max(worst_t, t), max(worst_h, e)
    ok = worst_t <= 1e-12 and worst_h <= 1e-12
    return ok, f"trace {worst_t:.1e}, hermiticity {worst_h:.1e}"


def check_gibbs_stationarity(rng, draws, fault=None):
    worst = 0.0
    cases = [_tls()] + [resonant_bath_system(3, 2, 0.8, rng) for _ in range(max(1, draws // 10))]
    for h, ch, model in cases:
        gen = gens.build_lindblad(h, ch, model)
        if fault == "lindblad_sign":
            gen = flip_thermal_term(gen, gens.build_double_commutator(h, ch, model))
        gibbs = gens.equilibrium(h, model.beta_T, "gibbs").value
        worst = max(worst, float(np.max(np.abs(gen.apply(gibbs))) / np.max(np.abs(gen.M))))
    return worst <= 1e-10, f"max |L(rho_Gibbs)| / max |M| {worst:.2e}"


def check_steady_states(rng, draws):
    h, ch, model = _tls()
    sym = model.with_mode("symmetrized")
    dc = steady_state(gens.build_double_commutator(h, ch, sym))
    err_dc = float(np.max(np.abs(dc - np.eye(2) / 2)))
    eq = gens.equilibrium(h, model.beta_T)
    arh = steady_state(gens.build_arh(h, ch, sym, eq))
    err_arh = float(np.max(np.abs(arh - eq.value)))
    ok = err_dc <= 1e-12 and err_arh <= 1e-12
    return ok, f"double commutator vs I/d {err_dc:.1e}, inhomogeneous vs rho_eq {err_arh:.1e}"


def check_linearized_equals_htme(rng, draws):
    worst = 0.0
    systems = [_tls(branch="stimulated"), _tls(branch="emission"), spin_pair_system(SingletTripletConfig())]
    for h, ch, model in systems:
        lin = gens.build_linearized(h, ch, model.with_mode("quantum"))
        sym = model.with_mode("symmetrized")
        ht = gens.build_htme(h, ch, sym, gens.equilibrium(h, model.beta_T))
        worst = max(worst, float(np.max(np.abs(lin.M - ht.M))), float(np.max(np.abs(ht.b))))
    return worst <= 1e-10, f"max matrix difference {worst:.1e}"


def check_kossakowski(rng, draws):
    lows = []
    for beta in (0.01, 1.0, 50.0):
        h, ch, model = _tls(beta)
        lows.append(gens.kossakowski_check(gens.build_lindblad(h, ch, model))[1])
    h, ch, model = resonant_bath_system(3, 2, 0.8, rng)
    lows.append(gens.kossakowski_check(gens.build_lindblad(h, ch, model))[1])
    low = min(lows)
    return low >= -1e-10, f"smallest rate-matrix eigenvalue {low:.2e}"


def check_tls_dynamics(rng, draws):
    r = run_tls(TlsConfig(bloch=(0.6, 0.0, 0.8)), "lindblad")
    return r["relative_deviation"] <= 1e-8, f"relative deviation {r['relative_deviation']:.1e}"


def _halving_ratios(values):
    return [values[i + 1] / values[i] for i in range(len(values) - 1)]


def tls_lindblad_htme_gap(x: float) -> float:
    """Max state distance between Lindblad and high-temperature dynamics of the two-level system."""
    cfg = TlsConfig(beta_T=x, high_t_branch="emission", bloch=(0.6, 0.0, 0.8))
    a = run_tls(cfg, "lindblad")
    b = run_tls(cfg.model_copy(update={"t_max": float(a["trajectory"].times[-1])}), "htme")
    return float(np.max(np.abs(a["trajectory"].states - b["trajectory"].states)))


def check_convergence_order(rng, draws):
    gaps = [tls_lindblad_htme_gap(x) for x in (0.1, 0.05, 0.025)]
    ratios = _halving_ratios(gaps)
    ok = all(0.15 <= r <= 0.35 for r in ratios)
    return ok, "halving ratios " + ", ".join(f"{r:.3f}" for r in ratios)


def htme_equilibrium_residual(x: float) -> float:
    """Norm of the high-temperature generator applied to its linearized equilibrium."""
    cfg = SingletTripletConfig(beta_T=x)
    h, ch, model = spin_pair_system(cfg)
    eq = gens.equilibrium(h, x)
    return float(np.linalg.norm(gens.build_htme(h, ch, model, eq).apply(eq.value)))


def check_equilibrium_residual_order(rng, draws):
    ratios = _halving_ratios([htme_equilibrium_residual(x) for x in (0.04, 0.02, 0.01)])
    ok = all(0.15 <= r <= 0.35 for r in ratios)
    return ok, "halving ratios " + ", ".join(f"{r:.3f}" for r in ratios)


def check_cd_first_order(rng, draws):
    h, ch, model = _tls()
    res = [gens.cd_equivalence_residual(h, ch, model, x) for x in (0.1, 0.05, 0.025)]
    ratios = _halving_ratios(res)
    ok = all(0.4 <= r <= 0.6 for r in ratios)
    return ok, "halving ratios " + ", ".join(f"{r:.3f}" for r in ratios)


FAST = [
    ("double_commutator_expansion", check_expansion_identity),
    ("detailed_balance", check_detailed_balance),
    ("eigenoperator_identities", check_eigenoperators),
    ("trace_hermiticity", check_generator_structure),
    ("gibbs_stationarity", check_gibbs_stationarity),
    ("steady_states", check_steady_states),
    ("linearized_equals_htme", check_linearized_equals_htme),
    ("kossakowski_positivity", check_kossakowski),
    ("tls_bloch_dynamics", check_tls_dynamics),
]
FULL = FAST + [
    ("htme_lindblad_second_order", check_convergence_order),
    ("htme_equilibrium_residual_second_order", check_equilibrium_residual_order),
    ("cd_equivalence_first_order", check_cd_first_order),
]


def run_checks(level: str = "fast", seed: int = 0, fault: str | None = None) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError("level must be 'fast' or 'full'")
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    draws = 20 if level == "fast" else 100
    results = []
    for name, fn in FAST if level == "fast" else FULL:
        rng = np.random.default_rng([seed, len(results)])
        start = time.perf_counter()
        kwargs = {"fault": fault} if fn is check_gibbs_stationarity else {}
        try:
            ok, detail = fn(rng, draws, **kwargs)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"error: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return results
