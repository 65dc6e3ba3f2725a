"""Master-equation generators as affine superoperators.

A generator acts as ``d rho / dt = L(rho) = unvec(M @ vec(rho) + b)`` on
column-stacked vectors (``vec(X rho Y) = kron(Y.T, X) vec(rho)``). All sums
use the prefactor 1/2 of the hbar = 1 convention and run over the secular
pairs of the eigenoperator sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .eigenops import secular_terms
from .operators import as_operator, check_density_matrix, require_hermitian
from .spectral import SpectralDensityModel, balance_residual

KINDS = ("lindblad", "linearized", "htme", "arh", "double_commutator")
BALANCE_TOL = 1e-8


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


@dataclass(frozen=True)
class Generator:
    """Affine superoperator ``rho -> M vec(rho) + b``."""

    M: np.ndarray
    b: np.ndarray
    kind: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        M = np.asarray(self.M, dtype=complex)
        b = np.asarray(self.b, dtype=complex).reshape(-1)
        n = M.shape[0]
        d = int(round(np.sqrt(n)))
        if M.shape != (n, n) or d * d != n or b.shape != (n,):
            raise ValueError("generator needs a d^2 x d^2 matrix and a d^2 offset")
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return int(round(np.sqrt(self.M.shape[0])))

    def apply(self, rho) -> np.ndarray:
        rho = as_operator(rho)
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state has shape {rho.shape}, generator expects dim {self.dim}")
        return unvec(self.M @ vec(rho) + self.b, self.dim)

    def to_dict(self) -> dict:
        def pairs(arr):
            return [[float(z.real), float(z.imag)] for z in arr]

        meta = {}
        for key, value in self.metadata.items():
            if isinstance(value, np.ndarray):
                meta[key] = [pairs(row) for row in value]
            elif isinstance(value, (str, int, float, bool)) or value is None:
                meta[key] = value
        return {
            "dim": self.dim,
            "kind": self.kind,
            "M": [pairs(row) for row in self.M],
            "b": pairs(self.b),
            "metadata": meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Generator":
        M = np.array([[complex(*z) for z in row] for row in data["M"]])
        b = np.array([complex(*z) for z in data["b"]])
        meta = {
            k: np.array([[complex(*z) for z in row] for row in v]) if isinstance(v, list) else v
            for k, v in data.get("metadata", {}).items()
        }
        return cls(M, b, data["kind"], meta)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)


def _affine(func, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and offset of an affine map on d x d matrices, by probing unit matrices."""
    zero = np.zeros((d, d), dtype=complex)
    b = vec(func(zero))
    M = np.empty((d * d, d * d), dtype=complex)
    for k in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[k] = 1
        M[:, k] = vec(func(unvec(e, d))) - b
    return M, b


def _terms(channels, model: SpectralDensityModel):
    """Secular terms with their spectral weights: (J_ab(w), w, A_a(w), A_b(w))."""
    cache = {}
    out = []
    for a, b, w, A_a, A_b in secular_terms(list(channels)):
        if w not in cache:
            cache[w] = model.matrix(w)
        out.append((cache[w][a, b], w, A_a, A_b))
    return out


def _check_inputs(h_s, channels, model):
    h_s = require_hermitian(h_s, "h_s")
    if model.n_channels != len(channels):
        raise ValueError(f"model has {model.n_channels} channels but {len(channels)} eigenoperator sets were given")
    for s in channels:
        for A in s.components.values():
            if A.shape != h_s.shape:
                raise ValueError("eigenoperators and h_s differ in dimension")
    return h_s


def _double_commutator(terms, x):
    out = np.zeros_like(x)
    for j, _, A_a, A_b in terms:
        Ad = A_a.conj().T
        inner = A_b @ x - x @ A_b
        out -= 0.5 * j * (Ad @ inner - inner @ Ad)
    return out


def _meta(model, **extra):
    meta = {"beta_T": float(model.beta_T), "spectral_mode": model.mode, "model_kind": model.kind}
    meta.update(extra)
    return meta


def build_double_commutator(h_s, channels, model: SpectralDensityModel) -> Generator:
    """``-1/2 sum J_ab(w) [A_a(w)^dag, [A_b(w), rho]]``; its steady state is I/d."""
    h_s = _check_inputs(h_s, channels, model)
    terms = _terms(channels, model)
    M, b = _affine(lambda x: _double_commutator(terms, x), h_s.shape[0])
    return Generator(M, b, "double_commutator", _meta(model))


def build_lindblad(h_s, channels, model: SpectralDensityModel, check_balance: bool = True) -> Generator:
    """Secular Born-Markov generator in double-commutator form.

    ``-1/2 sum J_ab(w) { [A_a^dag, [A_b, rho]] - (1 - exp(-beta_T w)) [rho A_b, A_a^dag] }``.
    This equals the GKSL form only when the spectral densities obey detailed
    balance, which is checked on the secular frequencies unless disabled.
    """
    h_s = _check_inputs(h_s, channels, model)
    if model.mode == "symmetrized":
        raise ValueError("the Lindblad generator needs detailed-balanced (quantum) spectral densities")
    terms = _terms(channels, model)
    freqs = sorted({w for _, w, _, _ in terms if w > 0})
    if check_balance and freqs:
        res = balance_residual(model, freqs)
        if res > BALANCE_TOL:
            raise ValueError(f"spectral densities violate detailed balance (residual {res:.3e})")
    beta = model.beta_T

    def rhs(x):
        out = _double_commutator(terms, x)
        for j, w, A_a, A_b in terms:
            Ad = A_a.conj().T
            xa = x @ A_b
            out += 0.5 * j * (-np.expm1(-beta * w)) * (xa @ Ad - Ad @ xa)
        return out

    M, b = _affine(rhs, h_s.shape[0])
    rates = {w: model.matrix(w) for w in sorted({w for _, w, _, _ in terms})}
    return Generator(M, np.zeros_like(b), "lindblad", _meta(model, rate_matrices=rates))


@dataclass(frozen=True)
class EquilibriumSpec:
    flavor: str
    beta_T: float
    value: np.ndarray


def _centered(h_s: np.ndarray) -> np.ndarray:
    d = h_s.shape[0]
    return h_s - np.trace(h_s) / d * np.eye(d)


def equilibrium(h_s, beta_T: float, flavor: str = "linearized") -> EquilibriumSpec:
    """Gibbs state or its first-order expansion ``(I - beta_T H)/d``.

    The linearized form measures energies from the mean level so that it has
    unit trace; it must stay positive semidefinite.
    """
    h_s = require_hermitian(h_s, "h_s")
    if beta_T < 0:
        raise ValueError("beta_T must be non-negative")
    d = h_s.shape[0]
    if flavor == "gibbs":
        value = scipy.linalg.expm(-beta_T * _centered(h_s))
        value /= np.trace(value).real
    elif flavor == "linearized":
        value = (np.eye(d) - beta_T * _centered(h_s)) / d
        if np.linalg.eigvalsh(value)[0] < -1e-12:
            raise ValueError("beta_T too large: linearized equilibrium is not positive semidefinite")
    else:
        raise ValueError(f"unknown equilibrium flavor {flavor!r}")
    return EquilibriumSpec(flavor, float(beta_T), (value + value.conj().T) / 2)


def _check_eq(h_s, model, eq: EquilibriumSpec):
    if model.mode != "symmetrized":
        raise ValueError("high-temperature generators need a symmetrized spectral model")
    if abs(eq.beta_T - model.beta_T) > 1e-15 * max(1.0, model.beta_T):
        raise ValueError("equilibrium beta_T differs from the spectral model's beta_T")
    expected = equilibrium(h_s, eq.beta_T, eq.flavor).value
    if np.max(np.abs(expected - eq.value)) > 1e-12:
        raise ValueError("equilibrium state does not match h_s and beta_T")
    return eq.value


def _rate_correction(terms, rho_eq, drho, positive_part=True):
    """Correction term driven by ``drho = d rho - I``; vanishes at rho = I/d."""
    out = np.zeros_like(drho)
    for j, w, A_a, A_b in terms:
        Ad = A_a.conj().T
        c_b = rho_eq @ A_b - A_b @ rho_eq
        x = drho @ c_b
        out += 0.5 * j * (x @ Ad - Ad @ x)
        if positive_part and w > 0:
            y = Ad @ drho - drho @ Ad
            out += 0.5 * j * (c_b @ y - y @ c_b)
    return out


def build_arh(h_s, channels, model: SpectralDensityModel, eq: EquilibriumSpec) -> Generator:
    """Inhomogeneous relaxation ``rho -> Gamma(rho - rho_eq)`` with the double-commutator Gamma."""
    h_s = _check_inputs(h_s, channels, model)
    rho_eq = _check_eq(h_s, model, eq)
    terms = _terms(channels, model)
    M, b = _affine(lambda x: _double_commutator(terms, x - rho_eq), h_s.shape[0])
    return Generator(M, b, "arh", _meta(model, equilibrium=eq.flavor, rho_eq=rho_eq))


def build_htme(
    h_s, channels, model: SpectralDensityModel, eq: EquilibriumSpec, positive_correction: bool = True
) -> Generator:
    """High-temperature generator: the inhomogeneous relaxation plus the rate correction.

    With ``drho = d rho - I`` the correction is
    ``+1/2 sum_all J [drho [rho_eq, A_b], A_a^dag] + 1/2 sum_{w>0} J [[rho_eq, A_b], [A_a^dag, drho]]``.
    ``positive_correction=False`` omits the second sum, which only shifts
    diagonal relaxation rates by a relative O(beta_T w).
    """
    h_s = _check_inputs(h_s, channels, model)
    rho_eq = _check_eq(h_s, model, eq)
    d = h_s.shape[0]
    terms = _terms(channels, model)
    eye = np.eye(d)

    def rhs(x):
        return _double_commutator(terms, x - rho_eq) + _rate_correction(terms, rho_eq, d * x - eye, positive_correction)

    M, b = _affine(rhs, d)
    return Generator(
        M, b, "htme", _meta(model, equilibrium=eq.flavor, rho_eq=rho_eq, positive_correction=positive_correction)
    )


def build_linearized(h_s, channels, model: SpectralDensityModel) -> Generator:
    """First-order expansion of the Lindblad generator in ``beta_T w``.

    Symmetric double-commutator part over all frequencies plus, for every
    ``w > 0``, ``-beta_T w J_ab(w) (A_a^dag rho A_b - 1/2 {A_b A_a^dag, rho})``,
    with ``A = A(w)``. The zero-frequency block enters once. Spectral values
    are the model's high-temperature branch.
    """
    h_s = _check_inputs(h_s, channels, model)
    sym = model.with_mode("symmetrized")
    terms = _terms(channels, sym)
    beta = model.beta_T

    def rhs(x):
        out = _double_commutator(terms, x)
        for j, w, A_a, A_b in terms:
            if w > 0:
                Ad = A_a.conj().T
                out -= beta * w * j * (Ad @ x @ A_b - 0.5 * (A_b @ Ad @ x + x @ A_b @ Ad))
        return out

    M, b = _affine(rhs, h_s.shape[0])
    return Generator(M, np.zeros_like(b), "linearized", _meta(model))


def kossakowski_matrices(gen: Generator) -> dict:
    if gen.kind != "lindblad":
        raise ValueError("Kossakowski matrices are defined for Lindblad generators only")
    return dict(gen.metadata["rate_matrices"])


def kossakowski_check(gen: Generator, tol: float = 1e-10) -> tuple[bool, float]:
    """Positivity of the per-frequency rate matrices; returns (is_cp, smallest eigenvalue)."""
    mats = kossakowski_matrices(gen)
    lowest = min(float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0]) for m in mats.values()) if mats else 0.0
    return lowest >= -tol, lowest


def partial_trace_b(x: np.ndarray, d_s: int, d_b: int) -> np.ndarray:
    return np.einsum("ibjb->ij", x.reshape(d_s, d_b, d_s, d_b))


def expansion_identity_residual(h_i_t, h_i_tp, rho_s, rho_b) -> float:
    """Max-entry residual of the split of ``tr_B [H(t), [H(t'), rho_S x rho_B]]``.

    The right side is ``tr_B([H, [H', rho_S x I]] (I x rho_B))
    + tr_B(H (rho_S x I) [H', I x rho_B]) - tr_B([H', I x rho_B] (rho_S x I) H)``.
    """
    h, hp = as_operator(h_i_t), as_operator(h_i_tp)
    rho_s, rho_b = as_operator(rho_s), as_operator(rho_b)
    d_s, d_b = rho_s.shape[0], rho_b.shape[0]
    if h.shape != (d_s * d_b,) * 2 or hp.shape != h.shape:
        raise ValueError("interaction operators do not factor as dim_S x dim_B")
    i_s, i_b = np.eye(d_s), np.eye(d_b)
    full = np.kron(rho_s, rho_b)
    rs = np.kron(rho_s, i_b)
    rb = np.kron(i_s, rho_b)

    def comm(a, b):
        return a @ b - b @ a

    lhs = partial_trace_b(comm(h, comm(hp, full)), d_s, d_b)
    c_hp_rb = comm(hp, rb)
    rhs = (
        partial_trace_b(comm(h, comm(hp, rs)) @ rb, d_s, d_b)
        + partial_trace_b(h @ rs @ c_hp_rb, d_s, d_b)
        - partial_trace_b(c_hp_rb @ rs @ h, d_s, d_b)
    )
    return float(np.max(np.abs(lhs - rhs)))


def cd_equivalence_residual(h_s, channels, model: SpectralDensityModel, beta_T: float) -> float:
    """Relative distance between the two bath orderings of the equilibrium term.

    ``C(rho) = sum J_ab(w) [A_b, rho_eq] rho A_a^dag`` and ``D`` the same with
    ``K_ab(w) = exp(-beta_T w) J_ab(w)``; ``rho_eq`` is the Gibbs state.
    Returns ``||C - D|| / ||C||`` for the superoperator matrices.
    """
    h_s = _check_inputs(h_s, channels, model)
    q = model.with_mode("quantum").with_beta(beta_T)
    terms = _terms(channels, q)
    rho_eq = equilibrium(h_s, beta_T, "gibbs").value
    d = h_s.shape[0]

    def weighted(factor):
        def f(x):
            out = np.zeros_like(x)
            for j, w, A_a, A_b in terms:
                out += factor(w) * j * (A_b @ rho_eq - rho_eq @ A_b) @ x @ A_a.conj().T
            return out

        return _affine(f, d)[0]

    C = weighted(lambda w: 1.0)
    D = weighted(lambda w: np.exp(-beta_T * w))
    norm = np.linalg.norm(C)
    return float(np.linalg.norm(C - D) / norm) if norm > 0 else 0.0


def check_generator_invariants(gen: Generator, rhos) -> tuple[float, float]:
    """Worst trace and Hermiticity defects of ``L(rho)`` over Hermitian unit-trace states."""
    trace_err = herm_err = 0.0
    for rho in rhos:
        out = gen.apply(check_density_matrix(rho, psd_tol=np.inf))
        trace_err = max(trace_err, abs(np.trace(out)))
        herm_err = max(herm_err, float(np.max(np.abs(out - out.conj().T))))
    return trace_err, herm_err


def build(kind: str, h_s, channels, model: SpectralDensityModel, eq_flavor: str = "linearized", **options) -> Generator:
    """Dispatch to the builder for ``kind``; inhomogeneous kinds get their equilibrium from ``eq_flavor``."""
    if kind == "lindblad":
        return build_lindblad(h_s, channels, model)
    if kind == "linearized":
        return build_linearized(h_s, channels, model)
    if kind == "double_commutator":
        return build_double_commutator(h_s, channels, model)
    if kind in ("htme", "arh"):
        eq = equilibrium(h_s, model.beta_T, eq_flavor)
        if kind == "arh":
            return build_arh(h_s, channels, model, eq)
        return build_htme(h_s, channels, model, eq, **options)
    raise ValueError(f"unknown generator kind {kind!r}")
