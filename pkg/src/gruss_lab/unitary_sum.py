"""Writing a contraction as an average of unitaries, constructively.

In any unital C*-algebra, ||A|| < 1 - 2/m (m > 2) guarantees m unitaries
with m A = U_1 + ... + U_m (Kadison and Pedersen, Math. Scand. 57, 1985).
On a matrix algebra the decomposition can be built explicitly, and under
the polar-decomposition construction used here it works for every
contraction (relaxed mode: ||A|| <= 1, m >= 2):

1. A = W P  (polar), P = Q diag(s_t) Q*  (spectral, s_t in [0, ||A||]);
2. each eigenvalue s_t is written as a mean of m unimodular numbers;
3. U_j = W Q diag_t(z_j^(t)) Q* is unitary and their mean is A.

This is a constructive specialization, not the original existence proof:
strict mode enforces the classical hypothesis, relaxed mode exposes what
the matrix construction actually supports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .linalg import Matrix, as_matrix, dag, hermitian_eig, operator_norm, polar_decompose


@dataclass(frozen=True, eq=False)
class UnitarySumDecomposition:
    """m unitaries whose mean reconstructs the decomposed operator."""

    m: int
    unitaries: tuple[Matrix, ...]
    reconstruction_error: float


def scalar_unimodular_sum(s: float, m: int, mode: str = "strict") -> np.ndarray:
    """m unit-modulus complex numbers summing to m*s.

    Even m: m/2 conjugate pairs e^(+-i theta) with cos(theta) = s.
    Odd m: one 1 plus (m-1)/2 conjugate pairs with cos(theta) = (ms-1)/(m-1).
    Strict mode requires 0 <= s <= 1 - 2/m; relaxed mode allows the full
    range 0 <= s <= 1 (both phase formulas stay well defined there).
    Pair phases are emitted in a fixed (+, -) order, so output is
    deterministic.
    """
    if mode not in ("strict", "relaxed"):
        raise ContractError(f"unknown mode {mode!r}")
    if m < 2:
        raise ContractError(f"need m >= 2, got {m}")
    s = float(s)
    limit = 1.0 - 2.0 / m if mode == "strict" else 1.0
    if not (-1e-12 <= s <= limit + 1e-12):
        raise ContractError(f"s={s} outside [0, {limit}] for mode={mode!r}, m={m}")
    s = min(max(s, 0.0), 1.0)
    if m % 2 == 0:
        theta = np.arccos(s)
        pair = np.array([np.exp(1j * theta), np.exp(-1j * theta)])
        return np.tile(pair, m // 2)
    c = np.clip((m * s - 1.0) / (m - 1.0), -1.0, 1.0)
    theta = np.arccos(c)
    pair = np.array([np.exp(1j * theta), np.exp(-1j * theta)])
    return np.concatenate(([1.0 + 0j], np.tile(pair, (m - 1) // 2)))


def decompose_unitary_sum(a, m: int, mode: str = "strict") -> UnitarySumDecomposition:
    """Produce m unitaries averaging to A via polar plus spectral splitting.

    Strict mode enforces ||A|| < 1 - 2/m with m >= 3; relaxed mode accepts
    any contraction (||A|| <= 1) and m >= 2.
    """
    a = as_matrix(a, square=True)
    if mode not in ("strict", "relaxed"):
        raise ContractError(f"unknown mode {mode!r}")
    nrm = operator_norm(a)
    if mode == "strict":
        if m < 3:
            raise ContractError(f"strict mode needs m >= 3, got {m}")
        threshold = 1.0 - 2.0 / m
        if not nrm < threshold:
            raise ContractError(
                f"strict mode needs ||A|| < 1 - 2/m: ||A|| = {nrm:.6g}, threshold {threshold:.6g}"
            )
    else:
        if m < 2:
            raise ContractError(f"relaxed mode needs m >= 2, got {m}")
        if nrm > 1.0 + 1e-10:
            raise ContractError(f"relaxed mode needs ||A|| <= 1, got {nrm:.6g}")

    w, p = polar_decompose(a)
    dec = hermitian_eig(p)
    q = dec.eigenvectors
    phases = np.empty((len(dec.eigenvalues), m), dtype=np.complex128)
    for t, s_t in enumerate(dec.eigenvalues):
        phases[t] = scalar_unimodular_sum(min(max(float(s_t), 0.0), 1.0), m, mode=mode)
    unitaries = tuple(w @ q @ np.diag(phases[:, j]) @ dag(q) for j in range(m))
    mean = sum(unitaries) / m
    err = operator_norm(mean - a)
    return UnitarySumDecomposition(m=m, unitaries=unitaries, reconstruction_error=float(err))


def rescale_for_decomposition(a, m: int) -> tuple[Matrix, float]:
    """Scale A so the strict hypothesis holds with margin.

    Returns (A/M, M) with M = (m^2+2)/(m^2-2m) * ||A||, so that
    ||A/M|| = (m^2-2m)/(m^2+2) < 1 - 2/m and A = (M/m) * sum of the m
    unitaries of the rescaled operator.
    """
    a = as_matrix(a, square=True)
    if m < 3:
        raise ContractError(f"rescale_for_decomposition needs m >= 3, got {m}")
    nrm = operator_norm(a)
    if nrm == 0.0:
        raise ContractError("rescale_for_decomposition requires A != 0")
    big_m = (m * m + 2.0) / (m * m - 2.0 * m) * nrm
    return a / big_m, float(big_m)
