"""Eigenoperator decomposition of coupling operators.

A coupling ``a`` is split as ``a = sum_w A(w)`` with
``A(w) = sum_{s' - s = w} P(s) a P(s')``, so that ``[H_S, A(w)] = -w A(w)``
and ``A(-w) = A(w)^dagger`` for Hermitian ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import hermitian_eig, require_hermitian

DROP_REL = 1e-13
DEFAULT_DEGEN_REL = 1e-9


def _cluster(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clusters of a 1-D array; returns index arrays."""
    order = np.argsort(values, kind="stable")
    groups, current = [], [order[0]]
    for prev, nxt in zip(order[:-1], order[1:]):
        if values[nxt] - values[prev] > tol:
            groups.append(np.array(current))
            current = []
        current.append(nxt)
    groups.append(np.array(current))
    return groups


def eigenspaces(h_s, degen_tol: float | None = None) -> tuple[np.ndarray, list[np.ndarray]]:
    """Distinct eigenvalues of ``h_s`` and the projectors onto their eigenspaces.

    Eigenvalues closer than ``degen_tol`` (default 1e-9 times the spectral
    radius) are grouped into one eigenspace.
    """
    lam, vecs = hermitian_eig(h_s)
    radius = float(np.max(np.abs(lam)))
    if degen_tol is None:
        degen_tol = DEFAULT_DEGEN_REL * radius
    values, projectors = [], []
    for idx in _cluster(lam, degen_tol):
        v = vecs[:, idx]
        values.append(float(np.mean(lam[idx])))
        projectors.append(v @ v.conj().T)
    return np.array(values), projectors


@dataclass(frozen=True)
class EigenOperatorSet:
    """Eigenoperators ``A(w)`` of one coupling channel, keyed by frequency."""

    channel: int
    components: dict
    freq_tol: float
    frequencies: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "frequencies", tuple(sorted(self.components)))

    def __getitem__(self, omega: float) -> np.ndarray:
        return self.components[omega]

    def lookup(self, omega: float, tol: float | None = None) -> np.ndarray | None:
        """Component whose frequency lies within ``tol`` of ``omega``, if any."""
        tol = self.freq_tol if tol is None else tol
        for w in self.frequencies:
            if abs(w - omega) <= tol:
                return self.components[w]
        return None

    def total(self) -> np.ndarray:
        return sum(self.components.values())


def decompose(h_s, a, freq_tol: float, channel: int = 0, degen_tol: float | None = None) -> EigenOperatorSet:
    """Split Hermitian ``a`` into eigenoperators of ``[h_s, .]``.

    Gaps closer than ``freq_tol`` (single linkage) share one frequency bin.
    Each bin's frequency is the weighted mean of its gaps, with weights equal
    to the squared norms of the projected pieces; bins are exact mirrors of
    each other and the bin containing the zero gap sits exactly at 0.
    """
    h_s = require_hermitian(h_s, "h_s")
    a = require_hermitian(a, "coupling")
    if h_s.shape != a.shape:
        raise ValueError(f"dimension mismatch: {h_s.shape} vs {a.shape}")
    if not freq_tol > 0:
        raise ValueError("freq_tol must be positive")

    values, projectors = eigenspaces(h_s, degen_tol)
    n = len(values)
    gaps, pieces = [], []
    for k in range(n):
        for l in range(n):
            gaps.append(values[l] - values[k])
            pieces.append(projectors[k] @ a @ projectors[l])
    gaps = np.array(gaps)
    weights = np.array([np.vdot(p, p).real for p in pieces])

    clusters = _cluster(gaps, freq_tol)
    norm_a = float(np.linalg.norm(a))
    components = {}
    for idx in clusters:
        g = gaps[idx]
        if np.max(g) < 0:
            continue  # filled in as the mirror of the positive bin
        if np.min(g) > 0:
            w = weights[idx]
            omega = float(np.sum(w * g) / np.sum(w)) if np.sum(w) > 0 else float(np.mean(g))
        else:
            omega = 0.0
        piece = sum(pieces[i] for i in idx)
        norm = float(np.linalg.norm(piece))
        if omega == 0.0:
            if norm > 0:
                components[0.0] = piece
            continue
        if norm < DROP_REL * norm_a:
            continue
        components[omega] = piece
        components[-omega] = sum(pieces[(i % n) * n + i // n] for i in idx)
    return EigenOperatorSet(channel, components, freq_tol)


def decompose_channels(h_s, couplings, freq_tol: float, degen_tol: float | None = None) -> list[EigenOperatorSet]:
    return [decompose(h_s, a, freq_tol, channel=i, degen_tol=degen_tol) for i, a in enumerate(couplings)]


def _check_compatible(sets) -> float:
    tols = {s.freq_tol for s in sets}
    if len(tols) > 1:
        raise ValueError("eigenoperator sets use different freq_tol values")
    dims = {next(iter(s.components.values())).shape for s in sets if s.components}
    if len(dims) > 1:
        raise ValueError("eigenoperator sets have different dimensions")
    return tols.pop()


def secular_terms(sets):
    """Yield ``(alpha, beta, omega, A_alpha(omega), A_beta(omega))`` for all secular pairs.

    ``alpha`` and ``beta`` are positions in ``sets``.
    """
    if not sets:
        return
    tol = _check_compatible(sets)
    for a, sa in enumerate(sets):
        for b, sb in enumerate(sets):
            for wa in sa.frequencies:
                hits = [wb for wb in sb.frequencies if abs(wb - wa) <= tol]
                if len(hits) > 1:
                    raise ValueError("inconsistent frequency grids; check freq_tol")
                if hits:
                    wb = hits[0]
                    omega = 0.0 if wa == 0.0 or wb == 0.0 else (wa + wb) / 2
                    yield a, b, omega, sa.components[wa], sb.components[wb]


def secular_pairs(sets) -> list[tuple[int, int, float]]:
    """Index set ``(alpha, beta, omega)`` of the secular double sum."""
    return [(a, b, w) for a, b, w, _, _ in secular_terms(list(sets))]


def secular_frequencies(sets) -> list[float]:
    """Distinct frequencies appearing in the secular sum, ascending."""
    out = []
    for _, _, w in secular_pairs(sets):
        if not any(abs(w - v) <= sets[0].freq_tol for v in out):
            out.append(w)
    return sorted(out)
