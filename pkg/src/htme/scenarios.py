"""Preset systems with closed-form reference results.

* Two-level emitter coupled to a radiative bosonic bath through sigma_x.
* Two spin-1/2 nuclei in a Zeeman field relaxed by correlated random fields,
  where thermal polarization and singlet order cross-relax.
* The two-level emitter at low temperature with Redfield-weighted spectra.

All generators act in the interaction picture; the coherent ``-i[H_S, rho]``
part is omitted.
"""

from __future__ import annotations

import math

import numpy as np

from . import generators as gens
from .config import DEFAULT_MODE, ALLOWED_MODES, LowTConfig, SingletTripletConfig, TlsConfig
from .eigenops import decompose, decompose_channels
from .evolution import expectation_series, propagate, rate_analysis, reconstruct, steady_state
from .operators import embed, identity, pauli, spin_half, spin_pair_basis
from .spectral import BosonicRadiative, LorentzianClassical, occupation

TLS_OBSERVABLES = {"sz": pauli("z"), "sp": pauli("plus"), "sm": pauli("minus")}


def _mode_for(kind: str, mode: str | None) -> str:
    mode = mode or DEFAULT_MODE[kind]
    if mode not in ALLOWED_MODES[kind]:
        raise ValueError(f"generator {kind!r} does not accept spectral mode {mode!r}")
    return mode


# --------------------------------------------------------------------------- two-level system


def tls_system(cfg: TlsConfig, mode: str = "quantum"):
    """``H = (w0/2) sigma_z``, coupling sigma_x, bath scale chosen so that ``A w0^3 = gamma0``."""
    h = 0.5 * cfg.omega0 * pauli("z")
    channels = [decompose(h, pauli("x"), freq_tol=1e-9 * cfg.omega0)]
    model = BosonicRadiative(
        beta_T=cfg.beta_T, mode=mode, scale=cfg.gamma0 / cfg.omega0**3, high_t_branch=cfg.high_t_branch
    )
    return h, channels, model


def tls_state(bloch) -> np.ndarray:
    x, y, z = bloch
    return 0.5 * (identity(2) + x * pauli("x") + y * pauli("y") + z * pauli("z"))


def tls_oracle(cfg: TlsConfig, kind: str, model) -> dict:
    """Closed-form rates: population rate k1, coherence rate k2, equilibrium <sigma_z>."""
    x = cfg.beta_T * cfg.omega0
    if kind in ("lindblad", "double_commutator"):
        jp, jm = model.matrix(cfg.omega0)[0, 0].real, model.matrix(-cfg.omega0)[0, 0].real
        k1 = jp + jm
        z_eq = -(jp - jm) / k1 if kind == "lindblad" else 0.0
        return {"k1": k1, "k2": k1 / 2, "sz_eq": z_eq}
    j = model.with_mode("symmetrized").matrix(cfg.omega0)[0, 0].real
    if kind == "arh":
        return {"k1": 2 * j, "k2": j, "sz_eq": -x / 2}
    f = 1 - x / 2
    return {"k1": 2 * j * f, "k2": j * f, "sz_eq": (-x / 2) / f}


def tls_analytic(times, oracle: dict, rho0) -> dict:
    s0 = {k: complex(np.trace(rho0 @ X)) for k, X in TLS_OBSERVABLES.items()}
    z_eq = oracle["sz_eq"]
    return {
        "sz": z_eq + (s0["sz"].real - z_eq) * np.exp(-oracle["k1"] * times),
        "sp": s0["sp"] * np.exp(-oracle["k2"] * times),
        "sm": s0["sm"] * np.exp(-oracle["k2"] * times),
    }


def _fit_rate(times, series) -> float | None:
    y = np.abs(series)
    mask = y > 1e-12 * max(np.max(y), 1e-300)
    if np.count_nonzero(mask) < 2 or np.max(y) == 0:
        return None
    slope = np.polyfit(times[mask], np.log(y[mask]), 1)[0]
    return float(-slope)


def run_tls(cfg: TlsConfig, generator_kind: str = "lindblad", spectral_mode: str | None = None) -> dict:
    mode = _mode_for(generator_kind, spectral_mode)
    h, channels, model = tls_system(cfg, mode)
    gen = gens.build(generator_kind, h, channels, model)
    oracle = tls_oracle(cfg, generator_kind, model)
    t_max = cfg.t_max if cfg.t_max is not None else 5.0 / oracle["k1"]
    times = np.linspace(0.0, t_max, cfg.n_steps)
    rho0 = tls_state(cfg.bloch)
    traj = propagate(gen, rho0, times)
    sim = expectation_series(traj.states, TLS_OBSERVABLES)
    sim["sz"] = sim["sz"].real
    exact = tls_analytic(times, oracle, rho0)
    max_dev = max(float(np.max(np.abs(sim[k] - exact[k]))) for k in sim)
    rel_dev = max(
        float(np.max(np.abs(sim[k] - exact[k])) / np.max(np.abs(exact[k])))
        for k in sim
        if np.max(np.abs(exact[k])) > 0
    )
    sz_eq_sim = float(np.trace(pauli("z") @ steady_state(gen)).real)
    fitted = {
        "k1": _fit_rate(times, sim["sz"] - sz_eq_sim),
        "k2": _fit_rate(times, sim["sm"]),
    }
    return {
        "generator": gen,
        "trajectory": traj,
        "observables": sim,
        "analytic": exact,
        "oracle_rates": oracle,
        "fitted_rates": fitted,
        "max_deviation": max_dev,
        "relative_deviation": rel_dev,
    }


# --------------------------------------------------------------------------- singlet-triplet


def spin_pair_system(cfg: SingletTripletConfig):
    """Zeeman Hamiltonian ``w0 (I1z + I2z)`` and six Cartesian channels ``I_a^(i)``.

    The Cartesian components of each spin span the same rank-1 tensor channels
    as the spherical components ``T_q^(i)``; a correlation matrix that is
    diagonal in the component index gives identical secular terms, with
    cross-site correlation only between like components.
    """
    h = cfg.omega0 * (embed(spin_half("z"), 1, 2) + embed(spin_half("z"), 2, 2))
    couplings = [embed(spin_half(a), i, 2) for i in (1, 2) for a in "xyz"]
    channels = decompose_channels(h, couplings, freq_tol=1e-6 * cfg.omega0)
    kappa = np.kron([[1.0, cfg.kappa], [cfg.kappa, 1.0]], np.eye(3))
    model = LorentzianClassical(
        beta_T=cfg.beta_T,
        mode="symmetrized",
        tau=cfg.tau,
        omega_rms=cfg.omega_rms,
        kappa=tuple(map(tuple, kappa)),
        fixed_frequency=cfg.omega0 if cfg.lorentzian_argument == "fixed" else None,
    )
    return h, channels, model


def relaxation_scale(cfg: SingletTripletConfig, exact: bool = False) -> float:
    """``R = 2 w_rms^2 tau`` in the narrowing limit, or ``w_rms^2 J(w0)`` when ``exact``."""
    if exact:
        return cfg.omega_rms**2 * 2 * cfg.tau / (1 + (cfg.omega0 * cfg.tau) ** 2)
    return 2 * cfg.omega_rms**2 * cfg.tau


def spin_pair_oracle(cfg: SingletTripletConfig, kind: str, exact: bool = False) -> dict:
    """Closed-form relaxation-matrix entries keyed ``"ij"`` for ``sigma_ij``."""
    R = relaxation_scale(cfg, exact)
    x = cfg.beta_T * cfg.omega0
    k = cfg.kappa
    out = {"ZI": -R * x / math.sqrt(2), "DD": -R * (k + 2)}
    if kind == "arh":
        out.update({"ZS": 0.0, "SZ": 0.0})
    else:
        out.update({
            "ZS": R * k * x / math.sqrt(6),
            "SZ": R * (1 - k) * x / math.sqrt(6),
            "DZ": math.sqrt(3) / 6 * R * (k + 2) * x,
            "ZD": R * k * x / (2 * math.sqrt(3)),
        })
    return out


def cz_reference(times, cfg: SingletTripletConfig, kind: str, sigma_zs: float, t1: float, ts: float) -> np.ndarray:
    """Bi-exponential polarization build-up from singlet order (single exponential without cross-relaxation)."""
    x = cfg.beta_T * cfg.omega0
    out = x / math.sqrt(2) * (np.exp(-times / t1) - 1) + cfg.c_Z0 * np.exp(-times / t1)
    if kind == "htme":
        out = out + cfg.c_S0 * sigma_zs / (1 / t1 - 1 / ts) * (np.exp(-times / ts) - np.exp(-times / t1))
    return out


def _relative(sim: float, ref: float, scale: float) -> float:
    return abs(sim - ref) / abs(ref) if ref != 0 else abs(sim) / scale


def singlet_triplet_rates(cfg: SingletTripletConfig, generator_kind: str = "htme") -> dict:
    if generator_kind not in ("htme", "arh"):
        raise ValueError("the singlet-triplet scenario supports 'htme' and 'arh'")
    h, channels, model = spin_pair_system(cfg)
    options = {"positive_correction": cfg.positive_correction} if generator_kind == "htme" else {}
    gen = gens.build(generator_kind, h, channels, model, **options)
    basis = spin_pair_basis()
    ra = rate_analysis(gen, basis)
    G = ra["coupling_matrix"]
    if np.max(np.abs(G.imag)) > 1e-12 * np.max(np.abs(G)):
        raise ValueError("relaxation matrix has a non-negligible imaginary part")
    G = G.real
    idx = {lab: i for i, lab in enumerate(basis.labels)}
    sigma = {a + b: float(G[idx[a], idx[b]]) for a in basis.labels for b in basis.labels}
    out = {
        "generator": gen,
        "basis": basis,
        "sigma_matrix": G,
        "sigma": sigma,
        "T1": -1.0 / sigma["ZZ"],
        "Ts": -1.0 / sigma["SS"] if sigma["SS"] != 0 else math.inf,
        "T1D": -1.0 / sigma["DD"],
        "leakage": ra["leakage"],
        "eigenvalues": ra["eigenvalues"],
        "oracle_sigma": None,
        "sigma_deviation": None,
    }
    if cfg.narrowing:
        oracle = spin_pair_oracle(cfg, generator_kind)
        R = relaxation_scale(cfg)
        out["oracle_sigma"] = oracle
        out["sigma_deviation"] = {k: _relative(sigma[k], v, R) for k, v in oracle.items()}
    return out


def run_singlet_triplet(cfg: SingletTripletConfig, generator_kind: str = "htme") -> dict:
    out = singlet_triplet_rates(cfg, generator_kind)
    basis = out["basis"]
    t_max = cfg.t_max if cfg.t_max is not None else 5.0 * max(out["T1"], 1e-300)
    times = np.linspace(0.0, t_max, cfg.n_steps)
    rho0 = reconstruct([1.0, cfg.c_Z0, cfg.c_S0, cfg.c_D0], basis)
    traj = propagate(out["generator"], rho0, times).with_coefficients(basis)
    out["trajectory"] = traj
    out["cz_oracle_deviation"] = None
    if cfg.narrowing:
        sigma_zs = out["oracle_sigma"]["ZS"]
        ref = cz_reference(times, cfg, generator_kind, sigma_zs, out["T1"], out["Ts"])
        out["cz_reference"] = ref
        out["cz_oracle_deviation"] = float(np.max(np.abs(traj.coefficients[:, basis.index("Z")].real - ref)))
    return out


# --------------------------------------------------------------------------- low temperature


def run_lowT_pathology(cfg: LowTConfig) -> dict:
    """Redfield-weighted generator norm and full Lindblad relaxation at low temperature.

    The weighted model uses the occupation-number high-temperature form
    ``gamma0 N(w)`` times ``exp(beta_T w / 2)``.
    """
    tls = TlsConfig(omega0=cfg.omega0, beta_T=cfg.beta_T, gamma0=cfg.gamma0, high_t_branch="stimulated")
    h, channels, model = tls_system(tls, "quantum")
    weighted = gens.build_lindblad(h, channels, model.with_mode("redfield_weighted"))
    full = gens.build_lindblad(h, channels, model)
    sz_eq = float(np.trace(pauli("z") @ steady_state(full)).real)
    rates = np.sort(-np.linalg.eigvals(full.M).real)
    x = cfg.beta_T * cfg.omega0
    return {
        "weighted_generator": weighted,
        "lindblad_generator": full,
        "weighted_generator_norm": float(np.linalg.norm(weighted.M, 2)) / cfg.gamma0,
        "weighted_rate_estimate": occupation(cfg.beta_T, cfg.omega0) * math.exp(x / 2),
        "lindblad_sz_eq": sz_eq,
        "lindblad_rate": float(rates[-1]),
        "lindblad_coherence_rate": float(rates[1]),
    }
