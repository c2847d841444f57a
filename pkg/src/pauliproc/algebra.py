"""Exact complex-matrix algebra for polarization qubits.

Conventions used throughout the package:

* |H> = (1, 0), |V> = (0, 1); kets are plain 1-D complex arrays and
  operators are dense 2-D complex arrays.
* Kronecker products put the first operand on the slower-varying index,
  so the two-qubit basis order is HH, HV, VH, VV.
* Angles cross public boundaries in degrees.
"""

from __future__ import annotations

import numpy as np

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

_PAULIS = {"I": SIGMA_I, "X": SIGMA_X, "Y": SIGMA_Y, "Z": SIGMA_Z}

KET_H = np.array([1, 0], dtype=complex)
KET_V = np.array([0, 1], dtype=complex)
KET_D = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_A = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_R = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_L = np.array([1, -1j], dtype=complex) / np.sqrt(2)

_KETS = {"H": KET_H, "V": KET_V, "D": KET_D, "A": KET_A, "R": KET_R, "L": KET_L}

_BELL = {
    "phi+": np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2),
    "phi-": np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2),
    "psi+": np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2),
    "psi-": np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2),
}


def pauli(label: str) -> np.ndarray:
    """Return a copy of the Pauli matrix I, X, Y or Z."""
    try:
        return _PAULIS[label.upper()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli label {label!r}; expected one of I, X, Y, Z") from None


def ket(label: str) -> np.ndarray:
    """Return one of the six polarization kets H, V, D, A, R, L."""
    try:
        return _KETS[label.upper()].copy()
    except (KeyError, AttributeError):
        raise ValueError(f"unknown polarization label {label!r}") from None


def bell_ket(label: str) -> np.ndarray:
    """Return a Bell state ('phi+', 'phi-', 'psi+', 'psi-') in the H/V product basis."""
    try:
        return _BELL[label.lower()].copy()
    except (KeyError, AttributeError):
        raise ValueError(
            f"unknown Bell label {label!r}; expected phi+, phi-, psi+ or psi-"
        ) from None


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """AB - BA."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operands must be square matrices of equal shape, got {a.shape} and {b.shape}")
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """AB + BA."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operands must be square matrices of equal shape, got {a.shape} and {b.shape}")
    return a @ b + b @ a


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two kets or two operators (first operand slow index)."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.ndim != b.ndim:
        raise ValueError("tensor requires operands of the same kind (both kets or both operators)")
    return np.kron(a, b)


def hwp_unitary(alpha_deg: float) -> np.ndarray:
    """Half-wave-plate transform at angle alpha: cos(2a) Z + sin(2a) X.

    Hermitian and unitary for every angle; 0 deg gives Z, 45 deg gives X
    and 22.5 deg gives the Hadamard (X + Z)/sqrt(2).
    """
    two_alpha = 2.0 * np.radians(alpha_deg)
    return np.cos(two_alpha) * SIGMA_Z + np.sin(two_alpha) * SIGMA_X


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def projector(k: np.ndarray) -> np.ndarray:
    """|k><k| for a ket."""
    k = np.asarray(k, dtype=complex)
    return np.outer(k, k.conj())


def is_hermitian(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.abs(m - m.conj().T).max() <= tol)


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    return bool(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max() <= tol)


def is_psd(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m)
    if not is_hermitian(m, tol):
        return False
    return bool(np.linalg.eigvalsh(m).min() >= -tol)


def is_normalized(k: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(abs(np.linalg.norm(np.asarray(k)) - 1.0) <= tol)
