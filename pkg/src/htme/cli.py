"""Command-line front end: ``htme simulate | rates | check``.

Exit codes: 0 success, 1 failed invariant check, 2 configuration error,
3 numerical failure. Errors go to standard error as ``{"code", "message"}``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from . import generators as gens
from .checks import FAULTS, run_checks
from .config import ScenarioConfig
from .eigenops import decompose_channels
from .evolution import propagate, rate_analysis, write_csv, expectation_series
from .io import write_json, canonical_json
from .operators import as_operator, qubit_basis
from .scenarios import TLS_OBSERVABLES, run_lowT_pathology, run_singlet_triplet, run_tls, singlet_triplet_rates
from .scenarios import tls_state, tls_system
from .spectral import BosonicRadiative, LorentzianClassical, Tabulated

log = logging.getLogger("htme")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
HARD_LIMIT = 1e-9


class ConfigError(Exception):
    pass


class NumericalFailure(Exception):
    pass


def _error(code: int, message: str) -> int:
    sys.stderr.write(json.dumps({"code": code, "message": message}) + "\n")
    return code


def load_configs(path) -> list[ScenarioConfig]:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    items = raw if isinstance(raw, list) else [raw]
    try:
        return [ScenarioConfig.model_validate(item) for item in items]
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def _matrix(rows) -> np.ndarray:
    return as_operator([[complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in r] for r in rows])


def _custom_model(spec, beta_T: float, n_channels: int, mode: str):
    if spec.kind == "bosonic_radiative":
        return BosonicRadiative(beta_T=beta_T, mode=mode, scale=spec.scale, channels=n_channels,
                                high_t_branch=spec.high_t_branch)
    if spec.kind == "lorentzian_classical":
        kappa = spec.kappa if spec.kappa is not None else np.eye(n_channels)
        return LorentzianClassical(beta_T=beta_T, mode=mode, tau=spec.tau, omega_rms=spec.omega_rms,
                                   kappa=tuple(map(tuple, kappa)))
    if spec.table is not None:
        return Tabulated.from_dict(spec.table, beta_T=beta_T, mode=mode)
    if spec.table_path is not None:
        return Tabulated.load_json(spec.table_path, beta_T=beta_T, mode=mode)
    raise ConfigError("tabulated spectral density needs 'table' or 'table_path'")


def _check_trajectory(traj) -> dict:
    info = {
        "max_asymmetry": traj.max_asymmetry,
        "max_trace_error": traj.max_trace_error,
        "min_eigenvalue": traj.min_eigenvalue,
    }
    if not np.all(np.isfinite(traj.states)):
        raise NumericalFailure("trajectory contains non-finite values")
    if traj.max_asymmetry > HARD_LIMIT or traj.max_trace_error > HARD_LIMIT:
        raise NumericalFailure(f"trace or Hermiticity defect above {HARD_LIMIT:g}: {info}")
    if traj.kind in ("lindblad", "double_commutator") and traj.min_eigenvalue < -1e-8:
        raise NumericalFailure(f"completely positive generator produced a negative state: {info}")
    return info


def _real(matrix, what: str) -> np.ndarray:
    m = np.asarray(matrix)
    if np.max(np.abs(m.imag), initial=0.0) > 1e-10 * max(np.max(np.abs(m)), 1e-300):
        raise NumericalFailure(f"{what} has a non-negligible imaginary part")
    return m.real


def _tls_rates(res: dict) -> dict:
    ra = rate_analysis(res["generator"], qubit_basis())
    return {
        "labels": list(ra["labels"]),
        "coupling_matrix": _real(ra["coupling_matrix"], "coupling matrix"),
        "eigenvalues": _real(ra["eigenvalues"], "eigenvalues"),
        "oracle_rates": res["oracle_rates"],
        "fitted_rates": res["fitted_rates"],
    }


def _st_summary(res: dict) -> dict:
    out = {
        "labels": list(res["basis"].labels),
        "sigma_matrix": res["sigma_matrix"],
        "oracle_sigma": res["oracle_sigma"],
        "T1": res["T1"],
        "Ts": res["Ts"],
        "T1D": res["T1D"],
        "rates": {"T1": res["T1"], "Ts": res["Ts"], "T1D": res["T1D"]},
        "deviations": {"sigma_relative": res["sigma_deviation"]},
        "leakage": res["leakage"],
    }
    if "cz_oracle_deviation" in res:
        out["deviations"]["cz_absolute"] = res["cz_oracle_deviation"]
    return out


def _lowT_summary(res: dict) -> dict:
    return {
        "weighted_generator_norm": res["weighted_generator_norm"],
        "rates": {"lindblad_population": res["lindblad_rate"], "lindblad_coherence": res["lindblad_coherence_rate"]},
        "lindblad_sz_eq": res["lindblad_sz_eq"],
    }


def simulate_one(cfg: ScenarioConfig, out_dir: Path) -> dict:
    p = cfg.physical
    traj_path = out_dir / cfg.output.trajectory_path
    summary = {"scenario": cfg.scenario, "generator": cfg.generator, "spectral_mode": cfg.mode}
    if cfg.scenario == "tls":
        res = run_tls(p, cfg.generator, cfg.mode)
        info = _check_trajectory(res["trajectory"])
        write_csv(traj_path, res["trajectory"].times, res["observables"])
        summary.update(rates=_tls_rates(res), deviations={
            "max_absolute": res["max_deviation"], "max_relative": res["relative_deviation"]})
    elif cfg.scenario == "singlet_triplet":
        res = run_singlet_triplet(p, cfg.generator)
        info = _check_trajectory(res["trajectory"])
        traj = res["trajectory"]
        cols = {lab: traj.coefficients[:, i] for i, lab in enumerate(traj.labels) if lab != "I"}
        write_csv(traj_path, traj.times, cols)
        summary.update(_st_summary(res))
    elif cfg.scenario == "lowT":
        res = run_lowT_pathology(p)
        gen = res["lindblad_generator"]
        times = np.linspace(0.0, 5.0 / res["lindblad_rate"], 200)
        traj = propagate(gen, tls_state((0.0, 0.0, 1.0)), times)
        info = _check_trajectory(traj)
        write_csv(traj_path, times, {**expectation_series(traj.states, TLS_OBSERVABLES)})
        summary.update(_lowT_summary(res))
    else:
        h = _matrix(p.h_s)
        couplings = [_matrix(c) for c in p.couplings]
        channels = decompose_channels(h, couplings, p.freq_tol)
        model = _custom_model(p.spectral, p.beta_T, len(couplings), cfg.mode)
        gen = gens.build(cfg.generator, h, channels, model)
        times = np.linspace(0.0, p.t_max, p.n_steps)
        traj = propagate(gen, _matrix(p.rho0), times)
        info = _check_trajectory(traj)
        obs = {k: _matrix(v) for k, v in p.observables.items()} if p.observables else {
            f"p{i}": np.diag(np.eye(h.shape[0])[i]) for i in range(h.shape[0])}
        write_csv(traj_path, times, expectation_series(traj.states, obs))
    summary["trajectory"] = info
    write_json(out_dir / cfg.output.summary_path, summary)
    return summary


def rates_one(cfg: ScenarioConfig) -> dict:
    p = cfg.physical
    head = {"scenario": cfg.scenario, "generator": cfg.generator, "spectral_mode": cfg.mode}
    if cfg.scenario == "tls":
        h, channels, model = tls_system(p, cfg.mode)
        from .scenarios import tls_oracle

        gen = gens.build(cfg.generator, h, channels, model)
        ra = rate_analysis(gen, qubit_basis())
        return {**head, "labels": list(ra["labels"]),
                "coupling_matrix": _real(ra["coupling_matrix"], "coupling matrix"),
                "eigenvalues": _real(ra["eigenvalues"], "eigenvalues"),
                "relaxation_times": ra["relaxation_times"],
                "oracle_rates": tls_oracle(p, cfg.generator, model)}
    if cfg.scenario == "singlet_triplet":
        return {**head, **_st_summary(singlet_triplet_rates(p, cfg.generator))}
    if cfg.scenario == "lowT":
        return {**head, **_lowT_summary(run_lowT_pathology(p))}
    raise ConfigError("the custom scenario has no operator basis for rate analysis")


def _run_many(fn, configs):
    if len(configs) == 1:
        return [fn(configs[0])]
    with ThreadPoolExecutor() as pool:
        return list(pool.map(fn, configs))


def _guard(action) -> int:
    try:
        action()
    except ConfigError as exc:
        return _error(EXIT_CONFIG, str(exc))
    except NumericalFailure as exc:
        return _error(EXIT_NUMERIC, str(exc))
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        return _error(EXIT_NUMERIC, f"numerical failure: {exc}")
    except (ValueError, ValidationError) as exc:
        return _error(EXIT_CONFIG, str(exc))
    return EXIT_OK


def _output_dir(cfg: ScenarioConfig, base: Path, index: int, many: bool) -> Path:
    out = base / f"run{index}" if many else base
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(config_path, out_dir=".") -> int:
    def action():
        configs = load_configs(config_path)
        base = Path(out_dir)
        many = len(configs) > 1
        jobs = [(c, _output_dir(c, base, i, many)) for i, c in enumerate(configs)]
        _run_many(lambda job: simulate_one(*job), jobs)

    return _guard(action)


def cmd_rates(config_path, out_dir=None) -> int:
    def action():
        configs = load_configs(config_path)
        results = _run_many(rates_one, configs)
        payload = results[0] if len(results) == 1 else results
        sys.stdout.write(canonical_json(payload))
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            write_json(Path(out_dir) / "rates.json", payload)

    return _guard(action)


def cmd_check(level="fast", fault=None) -> int:
    seed = int(os.environ.get("HTME_SEED", "0"))
    results = run_checks(level, seed, fault)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.seconds:6.2f}s  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        return _error(EXIT_CHECK, "failed invariants: " + ", ".join(failed))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htme", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    sim = sub.add_parser("simulate", help="run a scenario and write trajectory CSV plus summary JSON")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out-dir", default=".")
    rates = sub.add_parser("rates", help="print the relaxation matrix and closed-form comparison")
    rates.add_argument("--config", required=True)
    rates.add_argument("--out-dir", default=None)
    chk = sub.add_parser("check", help="run the invariant suites")
    chk.add_argument("--level", choices=("fast", "full"), default="fast")
    chk.add_argument("--inject-fault", choices=FAULTS, default=None, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.verb == "simulate":
        return cmd_simulate(args.config, args.out_dir)
    if args.verb == "rates":
        return cmd_rates(args.config, args.out_dir)
    return cmd_check(args.level, args.inject_fault)


if __name__ == "__main__":
    sys.exit(main())
