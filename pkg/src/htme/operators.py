"""Dense operator algebra and spin-operator constructors.

Conventions: hbar = k_B = 1, operators are complex ``numpy`` arrays and
superoperators act on column-stacked vectors, so that
``vec(X @ rho @ Y) == kron(Y.T, X) @ vec(rho)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

HERMITIAN_TOL = 1e-10


def as_operator(a, name: str = "operator") -> np.ndarray:
    """Return ``a`` as a finite, square complex matrix."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def dagger(a) -> np.ndarray:
    return as_operator(a).conj().T


def commutator(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    return a @ b + b @ a


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product tr(a^dagger b)."""
    a, b = as_operator(a), as_operator(b)
    _same_dim(a, b)
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(as_operator(a)))


def matrix_exp(a) -> np.ndarray:
    return scipy.linalg.expm(as_operator(a))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = as_operator(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def require_hermitian(a, name: str = "operator", tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_operator(a, name)
    if not is_hermitian(a, tol):
        raise ValueError(f"{name} is not Hermitian")
    return a


def hermitian_eig(a) -> tuple[np.ndarray, np.ndarray]:
    """Ascending real eigenvalues and orthonormal eigenvectors (as columns)."""
    a = require_hermitian(a)
    return np.linalg.eigh((a + a.conj().T) / 2)


def pauli(axis: str) -> np.ndarray:
    """Pauli matrices with sigma_z = diag(1, -1) and sigma_pm = (sigma_x +- i sigma_y)/2."""
    table = {
        "x": [[0, 1], [1, 0]],
        "y": [[0, -1j], [1j, 0]],
        "z": [[1, 0], [0, -1]],
        "plus": [[0, 1], [0, 0]],
        "minus": [[0, 0], [1, 0]],
    }
    if axis not in table:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return np.array(table[axis], dtype=complex)


def spin_half(axis: str) -> np.ndarray:
    """Spin-1/2 components I_a = sigma_a / 2."""
    return pauli(axis) / 2


def embed(op, site: int, n_sites: int) -> np.ndarray:
    """Place ``op`` at 1-based ``site`` of ``n_sites`` identical subsystems."""
    op = as_operator(op)
    if n_sites < 1 or not 1 <= site <= n_sites:
        raise ValueError(f"site {site} out of range for {n_sites} sites")
    out = np.ones((1, 1), dtype=complex)
    eye = identity(op.shape[0])
    for k in range(1, n_sites + 1):
        out = np.kron(out, op if k == site else eye)
    return out


def spherical_tensor(q: int, site: int, n_sites: int = 2) -> np.ndarray:
    """Rank-1 spherical component of spin-1/2 at ``site``.

    T_0 = I_z and T_{+-1} = -+(I_x +- i I_y)/sqrt(2).
    """
    ix, iy, iz = (embed(spin_half(a), site, n_sites) for a in "xyz")
    if q == 0:
        return iz
    if q == 1:
        return -(ix + 1j * iy) / np.sqrt(2)
    if q == -1:
        return (ix - 1j * iy) / np.sqrt(2)
    raise ValueError(f"q must be -1, 0 or 1, got {q}")


@dataclass(frozen=True)
class OperatorBasis:
    """Hilbert-Schmidt orthonormal operator set with labels.

    ``identity_label`` names the one element allowed to carry a trace; it must
    be proportional to the identity.
    """

    elements: tuple
    labels: tuple
    identity_label: str | None = None
    dim: int = field(init=False)

    def __post_init__(self):
        elements = tuple(as_operator(e, "basis element") for e in self.elements)
        labels = tuple(self.labels)
        if not elements:
            raise ValueError("basis must have at least one element")
        if len(labels) != len(elements) or len(set(labels)) != len(labels):
            raise ValueError("labels must be unique and match the elements")
        dim = elements[0].shape[0]
        for e in elements:
            if e.shape != (dim, dim):
                raise ValueError("basis elements must share one dimension")
        gram = np.array([[np.vdot(a, b) for b in elements] for a in elements])
        if np.max(np.abs(gram - np.eye(len(elements)))) > 1e-12:
            raise ValueError("basis elements are not Hilbert-Schmidt orthonormal")
        if self.identity_label is not None and self.identity_label not in labels:
            raise ValueError(f"identity label {self.identity_label!r} not among labels")
        for lab, e in zip(labels, elements):
            if lab == self.identity_label:
                if np.max(np.abs(e - e[0, 0] * np.eye(dim))) > 1e-12:
                    raise ValueError("designated identity element is not proportional to I")
            elif abs(np.trace(e)) > 1e-12:
                raise ValueError(f"basis element {lab!r} is not traceless")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dim", dim)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, label: str) -> np.ndarray:
        return self.elements[self.labels.index(label)]

    def index(self, label: str) -> int:
        return self.labels.index(label)


def normalized(a) -> np.ndarray:
    a = as_operator(a)
    n = hs_norm(a)
    if n == 0:
        raise ValueError("cannot normalize the zero operator")
    return a / n


def spin_pair_operators() -> dict[str, np.ndarray]:
    """Unnormalized two-spin-1/2 operators spanning the populations subspace."""
    i = [[embed(spin_half(a), s, 2) for a in "xyz"] for s in (1, 2)]
    dot = sum(i[0][k] @ i[1][k] for k in range(3))
    return {
        "I": identity(4),
        "Z": i[0][2] + i[1][2],
        "S": dot,
        "D": 3 * i[0][2] @ i[1][2] - dot,
    }


def spin_pair_basis() -> OperatorBasis:
    """Normalized basis {I, Z, S, D} of the two-spin-1/2 populations subspace.

    Z is the total I_z, D the rank-2 zero-quantum tensor
    ``3 I1z I2z - I1.I2``, and S the singlet-order operator ``-I1.I2``, signed
    so that a positive S coefficient means an excess singlet population.
    """
    raw = spin_pair_operators()
    elems = [normalized(raw["I"]), normalized(raw["Z"]), normalized(-raw["S"]), normalized(raw["D"])]
    return OperatorBasis(tuple(elems), ("I", "Z", "S", "D"), identity_label="I")


def qubit_basis() -> OperatorBasis:
    """Normalized Pauli basis {I, x, y, z} for a two-level system."""
    elems = [identity(2)] + [pauli(a) for a in "xyz"]
    return OperatorBasis(tuple(e / np.sqrt(2) for e in elems), ("I", "x", "y", "z"), identity_label="I")


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (x + x.conj().T) / 2


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def check_density_matrix(rho, psd_tol: float = 1e-10, tol: float = 1e-12) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity; return the matrix."""
    rho = as_operator(rho, "density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix does not have unit trace")
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    if lam[0] < -psd_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam[0]:.3e}")
    return rho
