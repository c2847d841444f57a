"""Model of the two-gate programmable polarization processor.

Each programmable gate interferes the signal photon with one program
photon on a polarizing beam splitter, post-selects on one photon per
output port (a parity check projecting the pair onto span{|HH>, |VV>})
and projects the outgoing program photon onto |D>.  A program photon in
|D> leaves the signal unchanged, |A> applies Z; either way the gate
succeeds with probability 1/4 regardless of the signal state.

Two such gates sandwiching a unitary U, programmed with a two-photon
Bell state, realize (up to a constant prefactor and global phase) the
commutator [Z, U] for a |psi-> program and the anti-commutator {Z, U}
for |phi->.

Imperfect interference is modeled with one overlap parameter per beam
splitter.  With weight v the photon pair interferes coherently; with
weight (1 - v) the photons behave as independent entities: the program
photon is replaced by its uncorrelated marginal and the parity check
keeps only the classical |HH>/|VV> branch mixture.  v = 1 reproduces
the ideal gate exactly and v = 0 reproduces the reference regime of
temporally delayed (fully distinguishable) photons, in which each gate
reduces to an H/V dephaser with flat success probability 1/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import KET_D, SIGMA_I, SIGMA_Z, HADAMARD, is_unitary, tensor

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    """Interference overlaps of the two beam splitters plus a waveplate offset.

    ``hwp_offset_deg`` is a systematic miscalibration added to the central
    half-wave-plate angle wherever the intermediate unitary is specified by
    an angle; it does not affect explicitly given matrices.
    """

    v1: float = 1.0
    v2: float = 1.0
    hwp_offset_deg: float = 0.0

    def __post_init__(self):
        for name in ("v1", "v2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not math.isfinite(self.hwp_offset_deg):
            raise ValueError("hwp_offset_deg must be finite")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def distinguishable(cls) -> "NoiseModel":
        """Fully distinguishable photons (calibration regime)."""
        return cls(v1=0.0, v2=0.0)


@dataclass(frozen=True)
class KrausChannel:
    """Single Kraus operator K; rho -> K rho K^dag, success probability = trace."""

    kraus: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kraus, dtype=complex)
        object.__setattr__(self, "kraus", k)
        if np.linalg.svd(k, compute_uv=False).max() > 1.0 + 1e-12:
            raise ValueError("Kraus operator exceeds unit norm; channel would not be trace non-increasing")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return self.kraus @ np.asarray(rho, dtype=complex) @ self.kraus.conj().T

    def success_probability(self, rho: np.ndarray) -> float:
        return float(np.trace(self.apply(rho)).real)


def single_gate_kraus(program: np.ndarray) -> KrausChannel:
    """Kraus operator of one programmable gate for a given program ket.

    For program a|D> + b|A> the conditional operation is (a I + b Z)/2.
    """
    program = np.asarray(program, dtype=complex)
    if program.shape != (2,):
        raise ValueError("program must be a single-qubit ket")
    if abs(np.linalg.norm(program) - 1.0) > _NORM_TOL:
        raise ValueError("program ket is not normalized")
    a, b = HADAMARD @ program  # amplitudes in the D/A basis
    return KrausChannel((a * SIGMA_I + b * SIGMA_Z) / 2.0)


def cascade_kraus(program: np.ndarray, u: np.ndarray, *, check_unitary: bool = True) -> KrausChannel:
    """Kraus operator of the two-gate cascade with intermediate u.

    With program amplitudes c_pq in the D/A product basis (p = gate-1 slot,
    q = gate-2 slot) the operator is (1/4) sum_pq c_pq O_q u O_p with
    O_D = I and O_A = Z.  A |psi-> program yields +-[Z, u]/(4 sqrt 2) and
    |phi-> yields +-{Z, u}/(4 sqrt 2); only the channel K rho K^dag is
    observable, so the overall sign is not fixed.

    ``check_unitary=False`` admits arbitrary matrices, e.g. for verifying
    linearity of the cascade in u.
    """
    program = np.asarray(program, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if program.shape != (4,):
        raise ValueError("program must be a two-qubit ket")
    if abs(np.linalg.norm(program) - 1.0) > _NORM_TOL:
        raise ValueError("program ket is not normalized")
    if check_unitary and not is_unitary(u, _NORM_TOL):
        raise ValueError("intermediate operation must be unitary")
    c = tensor(HADAMARD, HADAMARD) @ program  # order DD, DA, AD, AA
    ops = (SIGMA_I, SIGMA_Z)
    total = np.zeros((2, 2), dtype=complex)
    for p in range(2):
        for q in range(2):
            total += c[2 * p + q] * (ops[q] @ u @ ops[p])
    return KrausChannel(total / 4.0)


def pbs_postselect_map(joint: np.ndarray, v: float) -> np.ndarray:
    """Coincidence post-selection at one beam splitter with overlap v.

    Projects a (signal, program) density matrix onto span{|HH>, |VV>} and
    multiplies the |HH><VV| and |VV><HH| coherences by v.  The result is
    unnormalized; its trace is the coincidence probability.
    """
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"overlap v must lie in [0, 1], got {v}")
    joint = np.asarray(joint, dtype=complex)
    if joint.shape != (4, 4):
        raise ValueError("joint must be a 4x4 (signal, program) density matrix")
    return _parity_check(joint.reshape(4, 1, 4, 1), v).reshape(4, 4)


def oracle_cascade(
    signal: np.ndarray,
    program: np.ndarray,
    u: np.ndarray,
    noise: NoiseModel | None = None,
) -> tuple[np.ndarray, float]:
    """Full post-selection simulation of the cascade.

    Propagates the (signal, program-1, program-2) polarization state
    through gate 1, the intermediate unitary and gate 2, and returns the
    unnormalized conditional signal state together with its trace (the
    success probability).  At v1 = v2 = 1 the induced channel equals
    :func:`cascade_kraus` exactly.
    """
    if noise is None:
        noise = NoiseModel.ideal()
    signal = np.asarray(signal, dtype=complex)
    program = np.asarray(program, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if signal.shape != (2,) or abs(np.linalg.norm(signal) - 1.0) > _NORM_TOL:
        raise ValueError("signal must be a normalized single-qubit ket")
    if program.shape != (4,) or abs(np.linalg.norm(program) - 1.0) > _NORM_TOL:
        raise ValueError("program must be a normalized two-qubit ket")
    if not is_unitary(u, _NORM_TOL):
        raise ValueError("intermediate operation must be unitary")

    psi = tensor(signal, program)
    rho = np.outer(psi, psi.conj())          # (s, p1, p2)
    rho = _gate(rho, 3, noise.v1)            # -> (s, p2)
    uu = tensor(u, SIGMA_I)
    rho = uu @ rho @ uu.conj().T
    rho = _gate(rho, 2, noise.v2)            # -> (s,)
    return rho, float(np.trace(rho).real)


def calibration_cascade(
    signal: np.ndarray, program: np.ndarray, u: np.ndarray
) -> tuple[np.ndarray, float]:
    """Reference run with temporally delayed photons: overlaps forced to zero."""
    return oracle_cascade(signal, program, u, NoiseModel.distinguishable())


def _parity_check(blocks: np.ndarray, v: float) -> np.ndarray:
    """Parity projection on the leading qubit pair of a (4, r, 4, r) tensor."""
    out = np.zeros_like(blocks)
    out[0, :, 0, :] = blocks[0, :, 0, :]
    out[3, :, 3, :] = blocks[3, :, 3, :]
    out[0, :, 3, :] = v * blocks[0, :, 3, :]
    out[3, :, 0, :] = v * blocks[3, :, 0, :]
    return out


def _sever_program(rho: np.ndarray, nq: int) -> np.ndarray:
    """Replace qubit 1 (the current program photon) by its uncorrelated marginal.

    Preserves the trace of the (generally unnormalized) input state.
    """
    tr = float(np.trace(rho).real)
    if tr <= 0.0:
        return np.zeros_like(rho)
    t = rho.reshape((2,) * (2 * nq))
    if nq == 3:
        rest = np.einsum("akcbkd->acbd", t)
        marg = np.einsum("xayxby->ab", t)
        out = np.einsum("acbd,ef->aecbfd", rest, marg) / tr
    else:
        rest = np.einsum("akbk->ab", t)
        marg = np.einsum("xaxb->ab", t)
        out = np.einsum("ab,cd->acbd", rest, marg) / tr
    return out.reshape(rho.shape)


def _project_program_on_d(rho: np.ndarray, nq: int) -> np.ndarray:
    """<D|_1 rho |D>_1, dropping qubit 1 from the register."""
    t = rho.reshape((2,) * (2 * nq))
    t = np.tensordot(KET_D.conj(), t, axes=(0, 1))
    t = np.tensordot(KET_D, t, axes=(0, nq))
    d = 2 ** (nq - 1)
    return t.reshape(d, d)


def _gate(rho: np.ndarray, nq: int, v: float) -> np.ndarray:
    """One programmable gate acting on qubits (0, 1) of an nq-qubit state.

    Mixes the coherent parity check (weight v) with the distinguishable
    branch (weight 1 - v) in which the program photon carries no
    correlations, then projects the program photon onto |D>.
    """
    d = rho.shape[0]
    blocks = rho.reshape(4, d // 4, 4, d // 4)
    out = np.zeros_like(blocks)
    if v > 0.0:
        out += v * _parity_check(blocks, 1.0)
    if v < 1.0:
        severed = _sever_program(rho, nq).reshape(4, d // 4, 4, d // 4)
        out += (1.0 - v) * _parity_check(severed, 0.0)
    return _project_program_on_d(out.reshape(d, d), nq)
