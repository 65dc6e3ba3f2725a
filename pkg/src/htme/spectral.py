"""Spectral-density models with quantum, symmetrized and Redfield-weighted modes.

Every model evaluates a channel matrix ``J[alpha, beta]`` at a frequency.
In quantum mode the values are the bath's own spectral densities, which
obey detailed balance ``J_ab(-w) = J_ba(w) exp(-beta_T w)`` for a thermal
bath. The symmetrized mode keeps the ``w >= 0`` branch and mirrors it,
``J_ab(-w) = J_ba(w)``. The Redfield-weighted mode multiplies the
symmetrized value by ``exp(beta_T w / 2)``.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

import numpy as np

from .operators import hermitian_eig, require_hermitian

MODES = ("quantum", "symmetrized", "redfield_weighted")


@dataclass(frozen=True)
class SpectralDensityModel:
    """Base class; subclasses implement ``quantum_matrix``."""

    beta_T: float
    mode: str = "quantum"

    kind = "abstract"

    def __post_init__(self):
        if not self.beta_T >= 0:
            raise ValueError("beta_T must be non-negative")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def n_channels(self) -> int:
        raise NotImplementedError

    def quantum_matrix(self, omega: float) -> np.ndarray:
        raise NotImplementedError

    def high_t_matrix(self, omega: float) -> np.ndarray:
        """Value of the symmetric high-temperature limit for ``omega >= 0``."""
        return self.quantum_matrix(omega)

    def matrix(self, omega: float) -> np.ndarray:
        omega = float(omega)
        if self.mode == "quantum":
            return self.quantum_matrix(omega)
        if omega > 0:
            sym = self.high_t_matrix(omega)
        elif omega < 0:
            sym = self.high_t_matrix(-omega).T
        else:
            j0 = self.high_t_matrix(0.0)
            sym = (j0 + j0.T) / 2
        if self.mode == "redfield_weighted":
            return sym * np.exp(self.beta_T * omega / 2)
        return sym

    def eval(self, alpha: int, beta: int, omega: float):
        n = self.n_channels
        if not (0 <= alpha < n and 0 <= beta < n):
            raise IndexError(f"channel pair ({alpha}, {beta}) out of range for {n} channels")
        return self.matrix(omega)[alpha, beta]

    def with_mode(self, mode: str) -> "SpectralDensityModel":
        return dataclasses.replace(self, mode=mode)

    def with_beta(self, beta_T: float) -> "SpectralDensityModel":
        return dataclasses.replace(self, beta_T=beta_T)


def occupation(beta_T: float, omega: float) -> float:
    """Bose occupation number 1/(exp(beta_T omega) - 1)."""
    x = beta_T * omega
    if x == 0:
        raise ValueError("Bose occupation has a pole at beta_T * omega = 0")
    return 1.0 / np.expm1(x)


@dataclass(frozen=True)
class BosonicRadiative(SpectralDensityModel):
    """Radiative bosonic bath: ``A w^3 (1 + N(w))`` for w > 0, ``A |w|^3 N(|w|)`` for w < 0.

    ``high_t_branch`` picks the symmetric limit used outside quantum mode:
    ``"emission"`` keeps the w > 0 value ``A w^3 (1 + N)``; ``"stimulated"``
    uses ``A w^3 N``, the form that reduces every rate to a multiple of N.
    Both agree to first order in ``beta_T w`` relative to the leading term.
    """

    scale: float = 1.0
    channels: int = 1
    high_t_branch: str = "emission"

    kind = "bosonic_radiative"

    def __post_init__(self):
        super().__post_init__()
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.high_t_branch not in ("emission", "stimulated"):
            raise ValueError("high_t_branch must be 'emission' or 'stimulated'")

    @property
    def n_channels(self) -> int:
        return self.channels

    def _eye(self, value: float) -> np.ndarray:
        return value * np.eye(self.channels)

    def quantum_matrix(self, omega: float) -> np.ndarray:
        if omega == 0:
            raise ValueError("bosonic spectral density is undefined at omega = 0")
        w = abs(omega)
        if omega > 0:
            return self._eye(self.scale * w**3 * (-1.0 / np.expm1(-self.beta_T * w)))
        return self._eye(self.scale * w**3 * occupation(self.beta_T, w))

    def high_t_matrix(self, omega: float) -> np.ndarray:
        if omega == 0:
            raise ValueError("bosonic spectral density is undefined at omega = 0")
        if self.high_t_branch == "emission":
            return self.quantum_matrix(omega)
        return self._eye(self.scale * omega**3 * occupation(self.beta_T, omega))


def validate_correlation(kappa) -> np.ndarray:
    k = np.asarray(kappa, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("correlation matrix must be square")
    if np.max(np.abs(k - k.T)) > 0 or np.any(np.diag(k) != 1) or np.any(np.abs(k) > 1):
        raise ValueError("correlation matrix must be symmetric with unit diagonal and |entries| <= 1")
    return k


@dataclass(frozen=True)
class LorentzianClassical(SpectralDensityModel):
    """Classical Lorentzian ``kappa_ab w_rms^2 2 tau / (1 + (w tau)^2)``.

    With ``fixed_frequency`` set, the Lorentzian is evaluated at that
    frequency for every argument, which reproduces the common shortcut of
    using one value ``J(w0)`` for all transitions.
    """

    tau: float = 1.0
    omega_rms: float = 1.0
    kappa: tuple = ((1.0,),)
    fixed_frequency: float | None = None

    kind = "lorentzian_classical"

    def __post_init__(self):
        super().__post_init__()
        if not (self.tau > 0 and self.omega_rms > 0):
            raise ValueError("tau and omega_rms must be positive")
        k = validate_correlation(self.kappa)
        object.__setattr__(self, "kappa", tuple(map(tuple, k)))

    @property
    def n_channels(self) -> int:
        return len(self.kappa)

    def reduced(self, omega: float) -> float:
        """Scalar Lorentzian ``2 tau / (1 + (w tau)^2)`` without amplitude or correlation."""
        w = omega if self.fixed_frequency is None else self.fixed_frequency
        return 2 * self.tau / (1 + (w * self.tau) ** 2)

    def quantum_matrix(self, omega: float) -> np.ndarray:
        return np.array(self.kappa) * self.omega_rms**2 * self.reduced(omega)


@dataclass(frozen=True)
class Tabulated(SpectralDensityModel):
    """Spectral density given at sample frequencies.

    Between samples the value is zero (discrete lines) unless ``interpolate``
    is set, in which case it is linearly interpolated inside the sampled range.
    Entries are complex in general; the channel matrices are Hermitian for a
    physical bath.
    """

    omegas: tuple = ()
    samples: tuple = ()
    interpolate: bool = False
    match_tol: float = 1e-9
    _omega: np.ndarray = field(init=False, repr=False, compare=False)
    _values: np.ndarray = field(init=False, repr=False, compare=False)

    kind = "tabulated"

    def __post_init__(self):
        super().__post_init__()
        w = np.asarray(self.omegas, dtype=float)
        j = np.asarray(self.samples, dtype=complex)
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("tabulated model needs at least one sample frequency")
        if j.ndim != 3 or j.shape[0] != len(w) or j.shape[1] != j.shape[2]:
            raise ValueError("samples must be a list of square channel matrices, one per frequency")
        order = np.argsort(w)
        object.__setattr__(self, "_omega", w[order])
        object.__setattr__(self, "_values", j[order])

    @property
    def n_channels(self) -> int:
        return self._values.shape[1]

    def quantum_matrix(self, omega: float) -> np.ndarray:
        w = self._omega
        tol = self.match_tol * max(1.0, float(np.max(np.abs(w))))
        k = int(np.argmin(np.abs(w - omega)))
        if abs(w[k] - omega) <= tol:
            return self._values[k].copy()
        if self.interpolate and w[0] <= omega <= w[-1]:
            hi = int(np.searchsorted(w, omega))
            t = (omega - w[hi - 1]) / (w[hi] - w[hi - 1])
            return (1 - t) * self._values[hi - 1] + t * self._values[hi]
        return np.zeros((self.n_channels, self.n_channels), dtype=complex)

    def to_dict(self) -> dict:
        rows = []
        for j in self._values:
            flat = j.reshape(-1)
            if np.all(flat.imag == 0):
                rows.append([float(x) for x in flat.real])
            else:
                rows.append([[float(x.real), float(x.imag)] for x in flat])
        return {"omega": [float(x) for x in self._omega], "J": rows, "beta_T": float(self.beta_T)}

    @classmethod
    def from_dict(cls, data: dict, beta_T: float | None = None, mode: str = "quantum", **kwargs) -> "Tabulated":
        if not isinstance(data, dict) or set(data) - {"omega", "J", "beta_T"} or not {"omega", "J"} <= set(data):
            raise ValueError("tabulated JSON must have keys 'omega' and 'J' (optionally 'beta_T')")
        omegas = [float(x) for x in data["omega"]]
        samples = []
        for row in data["J"]:
            vals = [complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in row]
            n = int(round(np.sqrt(len(vals))))
            if n * n != len(vals):
                raise ValueError("each J row must hold a flattened square channel matrix")
            samples.append(np.array(vals).reshape(n, n))
        if beta_T is None:
            if "beta_T" not in data:
                raise ValueError("beta_T missing from tabulated JSON and not supplied")
            beta_T = float(data["beta_T"])
        return cls(beta_T=beta_T, mode=mode, omegas=tuple(omegas), samples=tuple(samples), **kwargs)

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load_json(cls, path, **kwargs) -> "Tabulated":
        with open(path) as fh:
            return cls.from_dict(json.load(fh), **kwargs)


def _gaussian(x, sigma):
    return np.exp(-0.5 * (x / sigma) ** 2) / (sigma * np.sqrt(2 * np.pi))


def discrete_spectral_density(h_b, b_ops, beta_T: float, sigma_line: float | None = None) -> Tabulated:
    """Spectral density of a finite thermal bath with Gaussian-broadened lines.

    ``J_ab(w) = sum_{f, f'} g(w - f' + f) <f|B_a|f'> <f'|B_b|f> rho_f`` with
    Gibbs weights ``rho_f`` and a normalized Gaussian ``g`` of width
    ``sigma_line`` (default 1e-6 of the bath spectral radius), sampled at every
    distinct bath gap.
    """
    h_b = require_hermitian(h_b, "h_b")
    b_ops = [require_hermitian(b, "bath coupling") for b in b_ops]
    if not b_ops or any(b.shape != h_b.shape for b in b_ops):
        raise ValueError("bath couplings must be non-empty and match h_b in dimension")
    if beta_T < 0:
        raise ValueError("beta_T must be non-negative")
    f, vecs = hermitian_eig(h_b)
    radius = float(np.max(np.abs(f)))
    if sigma_line is None:
        sigma_line = 1e-6 * radius if radius > 0 else 1e-6
    if not sigma_line > 0:
        raise ValueError("sigma_line must be positive")
    weights = np.exp(-beta_T * (f - f[0]))
    weights /= weights.sum()
    elems = np.array([vecs.conj().T @ b @ vecs for b in b_ops])  # elems[a, f, f']

    gaps = f[None, :] - f[:, None]  # gaps[f, f'] = f' - f
    tol = 1e-9 * max(radius, 1.0)
    positive = [0.0]
    for g in np.sort(gaps[gaps > tol]):
        if g - positive[-1] > tol:
            positive.append(float(g))
    # Mirror the non-negative gaps so that +w and -w samples pair exactly.
    centers = np.array([-g for g in positive[:0:-1]] + positive)
    # Drop a zero sample that has no zero gap behind it.
    if not np.any(np.abs(gaps) <= tol):
        centers = centers[centers != 0]

    samples = []
    for w in centers:
        line = _gaussian(w - gaps, sigma_line) * weights[:, None]
        samples.append(np.einsum("ij,aij,bji->ab", line, elems, elems))
    return Tabulated(beta_T=beta_T, omegas=tuple(centers), samples=tuple(samples))


def balance_residual(model: SpectralDensityModel, omega_list, floor: float = 1e-300) -> float:
    """Worst relative violation of ``J_ab(-w) = J_ba(w) exp(-beta_T w)`` over the listed w."""
    worst = 0.0
    for w in omega_list:
        jp = model.matrix(w)
        jm = model.matrix(-w)
        target = jp.T * np.exp(-model.beta_T * w)
        denom = np.maximum(np.abs(jp.T), floor)
        worst = max(worst, float(np.max(np.abs(jm - target) / denom)))
    return worst
