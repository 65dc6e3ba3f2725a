"""Propagation, steady states and coefficient dynamics for affine generators."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .generators import Generator, unvec, vec
from .operators import OperatorBasis, as_operator, check_density_matrix

CP_KINDS = ("lindblad", "double_commutator")
LEAKAGE_TOL = 1e-6


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    max_asymmetry: float
    min_eigenvalue: float
    max_trace_error: float
    kind: str
    labels: tuple = ()
    coefficients: np.ndarray | None = field(default=None)

    def positivity_tolerance(self) -> float:
        return 1e-10 if self.kind in CP_KINDS else 1e-8

    def is_physical(self) -> bool:
        """Trace, Hermiticity and positivity within the tolerance for this generator kind."""
        return (
            self.max_trace_error <= 1e-12
            and self.max_asymmetry <= 1e-12
            and self.min_eigenvalue >= -self.positivity_tolerance()
        )

    def with_coefficients(self, basis: OperatorBasis) -> "Trajectory":
        return Trajectory(
            self.times, self.states, self.max_asymmetry, self.min_eigenvalue,
            self.max_trace_error, self.kind, basis.labels, observables(self.states, basis),
        )


def _augmented(gen: Generator) -> np.ndarray:
    n = gen.M.shape[0]
    aug = np.zeros((n + 1, n + 1), dtype=complex)
    aug[:n, :n] = gen.M
    aug[:n, n] = gen.b
    return aug


def propagate(gen: Generator, rho0, times) -> Trajectory:
    """Exact affine propagation through the exponential of the augmented generator.

    Each output state is re-Hermitized; the largest removed asymmetry,
    the trace error and the smallest eigenvalue are recorded.
    """
    if not (np.all(np.isfinite(gen.M)) and np.all(np.isfinite(gen.b))):
        raise ValueError("generator has non-finite entries")
    rho0 = as_operator(rho0, "initial state")
    d = gen.dim
    if rho0.shape != (d, d):
        raise ValueError(f"initial state has shape {rho0.shape}, generator expects dim {d}")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-empty ascending sequence starting at t >= 0")
    aug = _augmented(gen)
    v0 = np.append(vec(rho0), 1.0)
    states = np.empty((len(times), d, d), dtype=complex)
    asym = trace_err = 0.0
    lam_min = np.inf
    for k, t in enumerate(times):
        x = unvec((scipy.linalg.expm(aug * t) @ v0)[:-1], d)
        asym = max(asym, float(np.max(np.abs(x - x.conj().T))))
        x = (x + x.conj().T) / 2
        trace_err = max(trace_err, abs(np.trace(x) - np.trace(rho0)))
        lam_min = min(lam_min, float(np.linalg.eigvalsh(x)[0]))
        states[k] = x
    return Trajectory(times, states, asym, lam_min, trace_err, gen.kind)


def steady_state(gen: Generator, rank_tol: float = 1e-10) -> np.ndarray:
    """Unique unit-trace solution of ``M vec(rho) + b = 0``.

    Raises if the trace-constrained system is rank deficient, i.e. when the
    generator has more than one stationary state.
    """
    d = gen.dim
    trace_row = vec(np.eye(d)).conj()
    A = np.vstack([gen.M, trace_row[None, :]])
    rhs = np.append(-gen.b, 1.0)
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= rank_tol * s[0]:
        raise ValueError("generator has multiple stationary states (kernel dimension > 1)")
    sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
    rho = unvec(sol, d)
    return (rho + rho.conj().T) / 2


def observables(states, basis: OperatorBasis) -> np.ndarray:
    """Coefficients ``c_i = sqrt(d) tr(rho O_i^dagger)``, one row per state.

    With unit-norm basis elements this makes the identity coefficient 1 and
    ``rho = (I + sum_{i != I} c_i sqrt(d) O_i) / d``.
    """
    states = np.asarray(states, dtype=complex)
    single = states.ndim == 2
    if single:
        states = states[None]
    if states.shape[1:] != (basis.dim, basis.dim):
        raise ValueError("state dimension does not match the basis")
    ops = np.array(basis.elements)
    coeffs = np.sqrt(basis.dim) * np.einsum("tij,kij->tk", states, ops.conj())
    return coeffs[0] if single else coeffs


def reconstruct(coefficients, basis: OperatorBasis) -> np.ndarray:
    """Inverse of :func:`observables` on the span of the basis."""
    c = np.asarray(coefficients, dtype=complex)
    return np.einsum("k,kij->ij", c, np.array(basis.elements)) / np.sqrt(basis.dim)


def rate_matrix(gen: Generator, basis: OperatorBasis) -> tuple[np.ndarray, float]:
    """Matrix ``G`` with ``dc/dt = G c`` in the coefficient convention of :func:`observables`.

    ``G_ij = tr(O_i^dag L(O_j))`` for traceless ``O_j``; the identity column
    also carries the offset, ``G_iI = sqrt(d) tr(O_i^dag L(I/d))``. Returns
    ``G`` and the worst relative norm of ``L(O_j)`` outside the basis span.
    """
    d = basis.dim
    if gen.dim != d:
        raise ValueError("generator and basis dimensions differ")
    has_identity = basis.identity_label is not None
    if not has_identity and np.any(gen.b != 0):
        raise ValueError("an affine generator needs a basis with an identity element")
    n = len(basis)
    G = np.empty((n, n), dtype=complex)
    leakage = 0.0
    for j, (lab, O) in enumerate(zip(basis.labels, basis.elements)):
        image = unvec(gen.M @ vec(O), d)
        if lab == basis.identity_label:
            image = image + np.sqrt(d) * unvec(gen.b, d)
        col = np.array([np.vdot(Oi, image) for Oi in basis.elements])
        G[:, j] = col
        resid = image - np.einsum("k,kij->ij", col, np.array(basis.elements))
        total = np.linalg.norm(image)
        if total > 0:
            leakage = max(leakage, float(np.linalg.norm(resid) / total))
    return G, leakage


def rate_analysis(gen: Generator, basis: OperatorBasis, leakage_tol: float = LEAKAGE_TOL) -> dict:
    """Coupling matrix on the basis, its eigenvalues and ``T_l = -1/G_ll``.

    Raises when the basis is not closed under the generator.
    """
    G, leakage = rate_matrix(gen, basis)
    if leakage > leakage_tol:
        raise ValueError(f"basis is not closed under the generator (leakage {leakage:.3e})")
    eig = np.linalg.eigvals(G)
    eig = eig[np.lexsort((eig.imag, eig.real))]
    times = {}
    for i, lab in enumerate(basis.labels):
        if lab != basis.identity_label:
            g = G[i, i].real
            times[lab] = -1.0 / g if g != 0 else np.inf
    return {
        "labels": basis.labels,
        "coupling_matrix": G,
        "sigma": {(a, b): G[i, j] for i, a in enumerate(basis.labels) for j, b in enumerate(basis.labels)},
        "eigenvalues": eig,
        "relaxation_times": times,
        "leakage": leakage,
    }


def expectation_series(states, operators: dict) -> dict:
    """``tr(rho(t) X)`` for each named operator."""
    states = np.asarray(states)
    return {k: np.einsum("tij,ji->t", states, np.asarray(X, dtype=complex)) for k, X in operators.items()}


def write_csv(path, times, columns: dict) -> None:
    """Write ``t,label...`` with ``%.17g`` values; complex series get an extra ``<label>_im`` column."""
    names, data = ["t"], [np.asarray(times, dtype=float)]
    for label, series in columns.items():
        series = np.asarray(series)
        names.append(label)
        data.append(series.real)
        if np.iscomplexobj(series) and np.any(series.imag != 0):
            names.append(f"{label}_im")
            data.append(series.imag)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow([format(float(v), ".17g") for v in row])


def read_csv(path) -> tuple[list, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def density_matrix(rho, kind: str = "lindblad") -> np.ndarray:
    """Validate a state with the positivity tolerance appropriate for ``kind``."""
    return check_density_matrix(rho, psd_tol=1e-10 if kind in CP_KINDS else 1e-8)
