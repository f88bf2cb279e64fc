"""Explicit unitaries of the native gates, for verification."""

from __future__ import annotations

import numpy as np

from ..emitsim.circuit import NativeGate
from ..errors import InvalidLevels


def sigma_phi(phi: float, i: int, j: int, dim: int) -> np.ndarray:
    """``cos(phi) sigma_x + sin(phi) sigma_y`` on levels (i, j), zero elsewhere."""
    if not 0 <= i < j < dim:
        raise InvalidLevels(f"need 0 <= i < j < {dim}, got ({i}, {j})")
    s = np.zeros((dim, dim), dtype=complex)
    s[i, j] = np.cos(phi) - 1j * np.sin(phi)
    s[j, i] = np.cos(phi) + 1j * np.sin(phi)
    return s


def rotation(theta: float, phi: float, i: int, j: int, dim: int) -> np.ndarray:
    """``exp(-i theta/2 sigma_phi)`` acting on levels (i, j) of a qudit.

    ``sigma_phi`` squares to the projector onto the two levels, so the
    exponential has the closed form ``(1 - P) + P cos(theta/2) - i sin(theta/2) sigma_phi``.
    """
    s = sigma_phi(phi, i, j, dim)
    proj = (s @ s).real
    return np.eye(dim) - proj + proj * np.cos(theta / 2) - 1j * np.sin(theta / 2) * s


def molmer_sorensen(theta: float, phi: float, i: int, j: int, dim: int) -> np.ndarray:
    """``exp(-i theta/4 (sigma_phi x 1 + 1 x sigma_phi)^2)`` on two qudits."""
    s = sigma_phi(phi, i, j, dim)
    eye = np.eye(dim)
    gen = np.kron(s, eye) + np.kron(eye, s)
    h = gen @ gen
    # h is Hermitian: exponentiate in its eigenbasis
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * theta / 4 * w)) @ v.conj().T


def gate_unitary(gate: NativeGate, qudit_dim: int = 2) -> np.ndarray:
    i, j = gate.level_i, gate.level_j
    if not 0 <= i < j < qudit_dim:
        raise InvalidLevels(f"levels ({i}, {j}) invalid for qudit dimension {qudit_dim}")
    if gate.kind == "MS":
        return molmer_sorensen(gate.theta_rad, 0.0, i, j, qudit_dim)
    return rotation(gate.theta_rad, gate.phase_rad, i, j, qudit_dim)
