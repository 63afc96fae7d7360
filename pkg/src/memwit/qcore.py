"""States, operators and channels for small dense quantum systems (d = 2 or 4).

Conventions used everywhere in this package:

* computational basis ``|0> = (1, 0)``, ``|1> = (0, 1)``; ``sigma_minus =
  |0><1|`` lowers the excited state,
* Bloch components ``r_k = Tr[sigma_k rho]`` so ``|0><0|`` sits at ``z = +1``,
* superoperators act on column-stacked (Fortran-order) vectorisations,
  ``vec(A B C) = (C^T (x) A) vec(B)``,
* Choi states are normalised to trace one, ``choi(E) = (E (x) id)[phi+]``
  with ``phi+ = sum_j |jj> / sqrt(d)`` and the system factor first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BadDimension,
    DimensionMismatch,
    NonSquareChannel,
    NotAChoiState,
    NotAQubitChannel,
    SingularMap,
)

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |0><1|
SIGMA_PLUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)   # |1><0|
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)

KET_0 = np.array([1.0, 0.0], dtype=complex)
KET_1 = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
KET_MINUS = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Bloch components (x, y, z) of a qubit operator."""
    return np.array([np.trace(p @ rho).real for p in PAULIS[1:]])


def density_from_bloch(r: Sequence[float]) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    rho = 0.5 * (IDENTITY_2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)
    return rho


def maximally_entangled_state(d: int) -> np.ndarray:
    """|phi+> = sum_j |j>|j> / sqrt(d) as a length d*d vector."""
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1.0 / np.sqrt(d)
    return psi


def is_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.linalg.norm(rho - dag(rho)) > tol:
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return float(np.linalg.eigvalsh(rho).min()) >= -tol


def assert_density_matrix(rho: np.ndarray, tol: float = 1e-10) -> None:
    if not is_density_matrix(rho, tol):
        raise BadDimension("not a valid density matrix within tolerance %g" % tol)


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator. ``keep`` is 0 or 1."""
    d0, d1 = dims
    r = np.asarray(rho).reshape(d0, d1, d0, d1)
    if keep == 0:
        return np.einsum("ikjk->ij", r)
    return np.einsum("kikj->ij", r)


# ---------------------------------------------------------------------------
# vectorisation and representation conversions
# ---------------------------------------------------------------------------

def vec(m: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(m, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Column-stacking superoperator sum_K conj(K) (x) K."""
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    d_out, d_in = ks[0].shape
    s = np.zeros((d_out * d_out, d_in * d_in), dtype=complex)
    for k in ks:
        s += np.kron(k.conj(), k)
    return s


def superop_apply(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return unvec(superop @ vec(rho))


def kraus_apply(kraus: Sequence[np.ndarray], rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(rho, dtype=complex))
    for k in kraus:
        out += k @ rho @ dag(k)
    return out


def kraus_to_choi(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Trace-one Choi state (E (x) id)[phi+], system factor first.

    Row-major flattening of K equals sqrt(d) (K (x) 1)|phi+>, so the Choi
    state is an outer-product sum over flattened Kraus operators.
    """
    ks = [np.asarray(k, dtype=complex) for k in kraus]
    d = ks[0].shape[0]
    if ks[0].shape[0] != ks[0].shape[1]:
        raise NonSquareChannel("Choi state needs dim_in == dim_out")
    chi = np.zeros((d * d, d * d), dtype=complex)
    for k in ks:
        fk = k.reshape(-1)
        chi += np.outer(fk, fk.conj())
    return chi / d


def superop_to_choi(superop: np.ndarray) -> np.ndarray:
    s = np.asarray(superop, dtype=complex)
    d = int(round(np.sqrt(s.shape[1])))
    if s.shape[0] != s.shape[1]:
        raise NonSquareChannel("Choi state needs dim_in == dim_out")
    chi = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            basis = np.zeros((d, d), dtype=complex)
            basis[a, b] = 1.0
            out = superop_apply(s, basis)
            chi += np.kron(out, _unit_matrix(d, a, b))
    return chi / d


def choi_to_superop(chi: np.ndarray) -> np.ndarray:
    chi = np.asarray(chi, dtype=complex)
    d = int(round(np.sqrt(chi.shape[0])))
    c4 = chi.reshape(d, d, d, d)  # (i_sys, i_anc, j_sys, j_anc)
    s = np.zeros((d * d, d * d), dtype=complex)
    for a in range(d):
        for b in range(d):
            out = d * c4[:, a, :, b]
            s[:, b * d + a] = vec(out)
    return s


def choi_to_kraus(chi: np.ndarray, rank_tol: float = 1e-10) -> list[np.ndarray]:
    """Eigendecomposition of the Choi state back into Kraus operators."""
    chi = np.asarray(chi, dtype=complex)
    d = int(round(np.sqrt(chi.shape[0])))
    if np.linalg.norm(chi - dag(chi)) > 1e-8:
        raise NotAChoiState("Choi matrix is not Hermitian")
    evals, evecs = np.linalg.eigh(chi)
    if evals.min() < -max(rank_tol, 1e-9):
        raise NotAChoiState("Choi matrix has negative eigenvalue %g" % evals.min())
    anc = partial_trace(chi, (d, d), keep=1)
    if np.linalg.norm(anc - np.eye(d) / d) > max(rank_tol, 1e-7):
        raise NotAChoiState("ancilla reduction of the Choi state is not maximally mixed")
    kraus = []
    for lam, v in zip(evals, evecs.T):
        if lam > rank_tol * max(evals.max(), 1.0):
            kraus.append(np.sqrt(d * lam) * v.reshape(d, d))
    return kraus


def _unit_matrix(d: int, a: int, b: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    m[a, b] = 1.0
    return m


def affine_to_superop(a_mat: np.ndarray, b_vec: np.ndarray) -> np.ndarray:
    """Qubit channel from its Bloch action r -> A r + b."""
    a_mat = np.asarray(a_mat, dtype=float)
    b_vec = np.asarray(b_vec, dtype=float)
    s = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            basis = _unit_matrix(2, a, b)
            # decompose on (I, sigma) and push the Bloch part through (A, b)
            c0 = np.trace(basis)
            r = np.array([np.trace(p @ basis) for p in PAULIS[1:]])
            r_out = a_mat @ r + c0 * b_vec
            out = 0.5 * (c0 * IDENTITY_2 + sum(r_out[k] * PAULIS[k + 1] for k in range(3)))
            s[:, b * 2 + a] = vec(out)
    return s


def superop_to_affine(superop: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(superop, dtype=complex)
    if s.shape != (4, 4):
        raise NotAQubitChannel("affine form is defined for qubit channels only")
    a_mat = np.zeros((3, 3))
    b_vec = np.zeros(3)
    for j in range(3):
        out = superop_apply(s, PAULIS[j + 1])
        for i in range(3):
            a_mat[i, j] = 0.5 * np.trace(PAULIS[i + 1] @ out).real
    out_id = superop_apply(s, IDENTITY_2)
    for i in range(3):
        b_vec[i] = 0.5 * np.trace(PAULIS[i + 1] @ out_id).real
    return a_mat, b_vec


def superop_to_ptm(superop: np.ndarray) -> np.ndarray:
    """4x4 real Pauli transfer matrix T_ij = Tr[s_i E(s_j)]/2 (s_0 = I).

    Unlike the affine form this keeps the trace row, so it represents
    completely positive maps that are not trace preserving.
    """
    s = np.asarray(superop, dtype=complex)
    if s.shape != (4, 4):
        raise NotAQubitChannel("PTM form is defined for qubit maps only")
    t = np.zeros((4, 4))
    for j in range(4):
        out = superop_apply(s, PAULIS[j])
        for i in range(4):
            t[i, j] = 0.5 * np.trace(PAULIS[i] @ out).real
    return t


def ptm_to_superop(ptm: np.ndarray) -> np.ndarray:
    t = np.asarray(ptm, dtype=float)
    s = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            basis = _unit_matrix(2, a, b)
            c_in = np.array([0.5 * np.trace(p @ basis) for p in PAULIS])
            c_out = t @ c_in
            out = sum(c_out[k] * PAULIS[k] for k in range(4))
            s[:, b * 2 + a] = vec(out)
    return s


# ---------------------------------------------------------------------------
# the channel container
# ---------------------------------------------------------------------------

@dataclass
class QuantumChannel:
    """A linear qubit/two-qubit map carried in interchangeable representations.

    Construct through one of the ``from_*`` classmethods.  Conversions are
    cached; instances are treated as immutable after construction.  Complete
    positivity / trace preservation are *not* enforced here (inverses and
    intermediate maps flow through the same container) -- use
    :func:`validate_cpt` to check.
    """

    dim: int
    _kraus: list[np.ndarray] | None = None
    _superop: np.ndarray | None = None
    _choi: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    # -- constructors -------------------------------------------------
    @classmethod
    def from_kraus(cls, kraus: Sequence[np.ndarray], meta: dict | None = None) -> "QuantumChannel":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        return cls(dim=ks[0].shape[1], _kraus=ks, meta=meta or {})

    @classmethod
    def from_superop(cls, superop: np.ndarray, meta: dict | None = None) -> "QuantumChannel":
        s = np.asarray(superop, dtype=complex)
        return cls(dim=int(round(np.sqrt(s.shape[1]))), _superop=s, meta=meta or {})

    @classmethod
    def from_choi(cls, choi: np.ndarray, meta: dict | None = None) -> "QuantumChannel":
        c = np.asarray(choi, dtype=complex)
        return cls(dim=int(round(np.sqrt(c.shape[0]))), _choi=c, meta=meta or {})

    @classmethod
    def from_affine(cls, a_mat: np.ndarray, b_vec: np.ndarray, meta: dict | None = None) -> "QuantumChannel":
        return cls(dim=2, _superop=affine_to_superop(a_mat, b_vec), meta=meta or {})

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "QuantumChannel":
        return cls.from_kraus([np.asarray(u, dtype=complex)])

    @classmethod
    def identity(cls, dim: int) -> "QuantumChannel":
        return cls.from_kraus([np.eye(dim, dtype=complex)])

    # -- representations ----------------------------------------------
    def superop(self) -> np.ndarray:
        if self._superop is None:
            if self._kraus is not None:
                self._superop = kraus_to_superop(self._kraus)
            else:
                self._superop = choi_to_superop(self._choi)
        return self._superop

    def choi(self) -> np.ndarray:
        if self._choi is None:
            if self._kraus is not None:
                self._choi = kraus_to_choi(self._kraus)
            else:
                self._choi = superop_to_choi(self._superop)
        return self._choi

    def kraus(self, rank_tol: float = 1e-10) -> list[np.ndarray]:
        if self._kraus is None:
            self._kraus = choi_to_kraus(self.choi(), rank_tol)
        return self._kraus

    def affine(self) -> tuple[np.ndarray, np.ndarray]:
        if self.dim != 2:
            raise NotAQubitChannel("affine form needs dim == 2")
        return superop_to_affine(self.superop())

    def ptm(self) -> np.ndarray:
        return superop_to_ptm(self.superop())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise DimensionMismatch("state dimension %s does not match channel dim %d"
                                    % (rho.shape, self.dim))
        if self._kraus is not None:
            return kraus_apply(self._kraus, rho)
        return superop_apply(self.superop(), rho)

    def __matmul__(self, other: "QuantumChannel") -> "QuantumChannel":
        return compose_maps(self, other)


def compose_maps(second: QuantumChannel, first: QuantumChannel) -> QuantumChannel:
    """Composition second(first(rho)) via the superoperator product."""
    if second.dim != first.dim:
        raise DimensionMismatch("cannot compose dim %d after dim %d" % (second.dim, first.dim))
    return QuantumChannel.from_superop(second.superop() @ first.superop())


def invert_map(channel: QuantumChannel, cond_tol: float = 1e-12) -> QuantumChannel:
    """Inverse of the channel as a linear map (generally not CPT).

    The result's ``meta['condition_number']`` records the superoperator
    conditioning; maps whose smallest singular value is below
    ``cond_tol * largest`` raise :class:`SingularMap`.
    """
    s = channel.superop()
    sv = np.linalg.svd(s, compute_uv=False)
    if sv.min() < cond_tol * sv.max():
        raise SingularMap("superoperator is singular within cond_tol=%g" % cond_tol)
    inv = np.linalg.inv(s)
    return QuantumChannel.from_superop(inv, meta={"condition_number": float(sv.max() / sv.min())})


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimensionMismatch("states of shape %s and %s" % (a.shape, b.shape))
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


@dataclass(frozen=True)
class CptReport:
    trace_preserving: bool
    tp_residual: float
    min_choi_eig: float
    cp: bool

    @property
    def cpt(self) -> bool:
        return self.trace_preserving and self.cp


def validate_cpt(channel: QuantumChannel, tol: float = 1e-9) -> CptReport:
    """Diagnostic report on trace preservation and complete positivity."""
    d = channel.dim
    s = channel.superop()
    # trace preservation: <<I| S = <<I|
    id_vec = vec(np.eye(d, dtype=complex))
    tp_residual = float(np.linalg.norm(id_vec.conj() @ s - id_vec.conj()))
    chi = channel.choi()
    min_eig = float(np.linalg.eigvalsh(0.5 * (chi + dag(chi))).min())
    return CptReport(
        trace_preserving=tp_residual <= tol,
        tp_residual=tp_residual,
        min_choi_eig=min_eig,
        cp=min_eig >= -tol,
    )


def qubit_affine_form(channel: QuantumChannel) -> tuple[np.ndarray, np.ndarray]:
    return channel.affine()


@dataclass(frozen=True)
class Dynamics:
    """Ordered family of maps, all taken from the initial time."""

    maps: tuple[QuantumChannel, ...]
    times: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.times is not None:
            ts = np.asarray(self.times)
            if len(ts) != len(self.maps):
                raise DimensionMismatch("times and maps length differ")
            if np.any(np.diff(ts) <= 0):
                raise DimensionMismatch("time grid must be strictly increasing")


# ---------------------------------------------------------------------------
# random instances (property tests and oracles)
# ---------------------------------------------------------------------------

def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)

def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = rank or d
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_cpt_channel(d: int, rng: np.random.Generator, n_kraus: int | None = None) -> QuantumChannel:
    """Haar-style random channel from a random isometry split into Kraus blocks."""
    k = n_kraus or d * d
    g = rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d))
    q, _ = np.linalg.qr(g)
    return QuantumChannel.from_kraus([q[i * d:(i + 1) * d, :] for i in range(k)])


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def operator_to_text(m: np.ndarray) -> str:
    """One row per line, whitespace-separated ``re+imj`` entries."""
    m = np.asarray(m, dtype=complex)
    lines = []
    for row in m:
        lines.append(" ".join("%.17g%+.17gj" % (z.real, z.imag) for z in row))
    return "\n".join(lines) + "\n"


def operator_from_text(text: str) -> np.ndarray:
    rows = []
    for line in text.strip().splitlines():
        toks = line.split()
        if toks:
            rows.append([complex(t) for t in toks])
    return np.array(rows, dtype=complex)


def _matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[z.real, z.imag] for z in row] for row in m]


def _matrix_from_json(data: list) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def channel_to_json(channel: QuantumChannel, repr_kind: str = "superop") -> str:
    """JSON object {repr, dim, data} for one of kraus/choi/superop/affine."""
    if repr_kind == "kraus":
        data = [_matrix_to_json(k) for k in channel.kraus()]
    elif repr_kind == "choi":
        data = _matrix_to_json(channel.choi())
    elif repr_kind == "superop":
        data = _matrix_to_json(channel.superop())
    elif repr_kind == "affine":
        a_mat, b_vec = channel.affine()
        data = {"A": a_mat.tolist(), "b": b_vec.tolist()}
    else:
        raise ValueError("unknown channel representation %r" % repr_kind)
    return json.dumps({"repr": repr_kind, "dim": channel.dim, "data": data})


def channel_from_json(text: str) -> QuantumChannel:
    obj = json.loads(text)
    kind, data = obj["repr"], obj["data"]
    if kind == "kraus":
        return QuantumChannel.from_kraus([_matrix_from_json(k) for k in data])
    if kind == "choi":
        return QuantumChannel.from_choi(_matrix_from_json(data))
    if kind == "superop":
        return QuantumChannel.from_superop(_matrix_from_json(data))
    if kind == "affine":
        return QuantumChannel.from_affine(np.array(data["A"]), np.array(data["b"]))
    raise ValueError("unknown channel representation %r" % kind)
