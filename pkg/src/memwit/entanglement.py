"""Two-qubit entanglement monotones.

Wootters concurrence and its decomposition-maximised counterpart, the
concurrence of assistance, both from the spin-flip spectrum.  A numerical
decomposition search (`coa_oracle`) provides an independent check of the
closed form: it explores pure-state ensembles of a state through the
isometric remixing freedom of its eigendecomposition.
"""

from __future__ import annotations

import numpy as np

from .errors import BadDimension
from .qcore import SIGMA_Y, dag

_YY = np.kron(SIGMA_Y, SIGMA_Y)

# eigenvalues of rho @ rho~ this far below zero are treated as roundoff
_CLAMP = 1e-12


def _check_two_qubit(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise BadDimension("two-qubit monotones need a 4x4 density matrix")
    return rho


def wootters_spectrum(rho: np.ndarray) -> np.ndarray:
    """Square roots of eig(rho rho~), sorted descending; rho~ is the spin flip."""
    rho = _check_two_qubit(rho)
    rho_tilde = _YY @ rho.conj() @ _YY
    evals = np.linalg.eigvals(rho @ rho_tilde)
    evals = np.real(evals)
    evals[(evals < 0) & (evals > -_CLAMP)] = 0.0
    evals = np.clip(evals, 0.0, None)
    lams = np.sort(np.sqrt(evals))[::-1]
    return lams


def concurrence(rho: np.ndarray) -> float:
    lams = wootters_spectrum(rho)
    return float(max(0.0, lams[0] - lams[1] - lams[2] - lams[3]))


def concurrence_of_assistance(rho: np.ndarray) -> float:
    """Decomposition-maximised average concurrence, closed form sum(lambda_i)."""
    return float(wootters_spectrum(rho).sum())


def pure_concurrence(psi: np.ndarray) -> float:
    """C(psi) = |<psi*| sigma_y (x) sigma_y |psi>| for a pure two-qubit state."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return float(abs(psi @ _YY @ psi))


# ---------------------------------------------------------------------------
# decomposition-search oracle
# ---------------------------------------------------------------------------

def _symmetric_tau(rho: np.ndarray) -> np.ndarray:
    """Complex symmetric matrix tau_ij = sqrt(mu_i mu_j) e_i^T YY e_j.

    Any size-m decomposition {p_k, psi_k} of rho has unnormalised vectors
    psi~_k = sum_i V_ki sqrt(mu_i) e_i with an isometry V (V^dag V = 1), and
    its average concurrence is sum_k |(V tau V^T)_kk|.
    """
    evals, evecs = np.linalg.eigh(rho)
    keep = evals > 1e-14
    mu = evals[keep]
    e = evecs[:, keep]
    core = e.T @ _YY @ e
    return np.sqrt(np.outer(mu, mu)) * core


def _avg_concurrence(v: np.ndarray, tau: np.ndarray) -> float:
    z = np.einsum("ki,ij,kj->k", v, tau, v)
    return float(np.abs(z).sum())


def _ascend(v: np.ndarray, tau: np.ndarray, n_iters: int) -> tuple[np.ndarray, float]:
    """Riemannian gradient ascent of sum_k |(V tau V^T)_kk| on the Stiefel manifold."""
    best = _avg_concurrence(v, tau)
    step = 0.1
    for _ in range(n_iters):
        z = np.einsum("ki,ij,kj->k", v, tau, v)
        absz = np.abs(z)
        phase = np.where(absz > 1e-14, np.conj(z) / np.where(absz > 1e-14, absz, 1.0), 1.0)
        # Wirtinger gradient wrt conj(V); rows scale with the phase of z_k
        grad = np.conj(phase)[:, None] * np.conj(v @ tau)
        sym = 0.5 * (dag(v) @ grad + dag(grad) @ v)
        tangent = grad - v @ sym
        cand, r_fac = np.linalg.qr(v + step * tangent)
        diag = np.diagonal(r_fac)
        cand = cand * np.where(np.abs(diag) > 1e-14, diag / np.abs(diag), 1.0)
        val = _avg_concurrence(cand, tau)
        if val > best:
            v, best, step = cand, val, min(step * 1.3, 1.0)
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return v, best


def coa_oracle(rho: np.ndarray, n_restarts: int = 32, n_iters: int = 500,
               seed: int = 0, ensemble_size: int = 8) -> float:
    """Best average pure-state concurrence found by decomposition search.

    Independent of the closed form: restarts draw random isometries that
    remix the eigendecomposition, each polished by gradient ascent.  The
    result can only approach `concurrence_of_assistance` from below.
    """
    rho = _check_two_qubit(rho)
    tau = _symmetric_tau(rho)
    r = tau.shape[0]
    m = min(ensemble_size, 8)
    m = max(m, r)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_restarts):
        g = rng.normal(size=(m, r)) + 1j * rng.normal(size=(m, r))
        v, _ = np.linalg.qr(g)
        _, val = _ascend(v, tau, n_iters)
        best = max(best, val)
    return best
