"""Parametric channel families: toy dephasing/damping and thermal amplitude damping.

The toy two-step dynamics arise from a system qubit colliding twice with the
same environment qubit (prepared in |0>), the second unitary undoing the
first, so the two-step map is the identity while the one-step map is a
partial dephasing or damping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ParamOutOfRange
from .qcore import (
    IDENTITY_2,
    KET_0,
    KET_PLUS,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    Dynamics,
    QuantumChannel,
    dag,
    partial_trace,
    projector,
)


def _check_unit_interval(p: float, name: str = "p") -> float:
    if not (0.0 <= p <= 1.0):
        raise ParamOutOfRange("%s=%g outside [0, 1]" % (name, p))
    return float(p)


@dataclass(frozen=True)
class ToyModelParams:
    """Strength parameterisation of the two collision models."""

    kind: str  # "dephase" | "damp"
    p: float

    def __post_init__(self):
        if self.kind not in ("dephase", "damp"):
            raise ParamOutOfRange("kind must be 'dephase' or 'damp'")
        _check_unit_interval(self.p)

    @property
    def f(self) -> float:
        """Dephasing interaction angle, f = arccos(1-p)/2."""
        return 0.5 * np.arccos(1.0 - self.p)

    @property
    def g(self) -> float:
        """Damping interaction angle, g = arcsin(sqrt(p))."""
        return float(np.arcsin(np.sqrt(self.p)))


@dataclass(frozen=True)
class ThermalADParams:
    """Thermal amplitude damping strength p and dimensionless inverse temperature beta."""

    p: float
    beta: float

    def __post_init__(self):
        _check_unit_interval(self.p)
        if self.beta < 0:
            raise ParamOutOfRange("beta=%g must be >= 0" % self.beta)

    @property
    def z_minus(self) -> float:
        return 1.0 / np.sqrt(1.0 + np.exp(-self.beta))

    @property
    def z_plus(self) -> float:
        return 1.0 / np.sqrt(1.0 + np.exp(self.beta))

    @property
    def fixed_point_bloch_z(self) -> float:
        """z component of the thermal fixed point, z_-^2 - z_+^2 = tanh(beta/2)."""
        return float(np.tanh(self.beta / 2.0))


def dephasing_channel(p: float) -> QuantumChannel:
    """Partial x-basis dephasing, Kraus {sqrt(p/2) sx, sqrt(1-p/2) I}."""
    p = _check_unit_interval(p)
    return QuantumChannel.from_kraus([
        np.sqrt(p / 2.0) * SIGMA_X,
        np.sqrt(1.0 - p / 2.0) * IDENTITY_2,
    ])


def damping_channel(p: float) -> QuantumChannel:
    """Amplitude damping toward |0>, Kraus {sqrt(p) s-, diag(1, sqrt(1-p))}.

    The jump operator carries sqrt(p); trace preservation forces it given the
    no-jump operator sqrt(1-p)|1><1| + |0><0|.
    """
    p = _check_unit_interval(p)
    no_jump = np.sqrt(1.0 - p) * (SIGMA_PLUS @ SIGMA_MINUS) + SIGMA_MINUS @ SIGMA_PLUS
    return QuantumChannel.from_kraus([np.sqrt(p) * SIGMA_MINUS, no_jump])


def toy_unitary(params: ToyModelParams) -> np.ndarray:
    """Collision unitary on system (x) environment."""
    if params.kind == "dephase":
        h = params.f * np.kron(SIGMA_X, SIGMA_X)
    else:
        h = params.g * (np.kron(SIGMA_PLUS, SIGMA_MINUS) + np.kron(SIGMA_MINUS, SIGMA_PLUS))
    return expm(-1j * h)


def toy_dilation_dynamics(params: ToyModelParams) -> Dynamics:
    """Two-step dynamics (E1, E2) from the explicit dilation, with E2 = identity.

    Builds U1 on system+environment, traces the environment after U1 and after
    U2 U1 with U2 = U1^dag, and cross-checks against the Kraus-built channel.
    """
    u1 = toy_unitary(params)
    rho_env = projector(KET_0)

    def reduced(u: np.ndarray) -> QuantumChannel:
        # Kraus operators K_e = <e|U|0>_env for the environment in |0>
        kraus = []
        for e in range(2):
            k = np.zeros((2, 2), dtype=complex)
            for i in range(2):
                for j in range(2):
                    k[i, j] = u[i * 2 + e, j * 2 + 0]
            kraus.append(k)
        return QuantumChannel.from_kraus(kraus)

    e1 = reduced(u1)
    e2 = reduced(dag(u1) @ u1)

    ident = QuantumChannel.identity(2)
    if np.linalg.norm(e2.superop() - ident.superop()) > 1e-9:
        raise RuntimeError("two-step map of the dilation is not the identity")
    direct = dephasing_channel(params.p) if params.kind == "dephase" else damping_channel(params.p)
    if np.linalg.norm(e1.superop() - direct.superop()) > 1e-9:
        raise RuntimeError("dilation and Kraus construction disagree")
    # keep the partial-trace route alive as a consistency check
    state = u1 @ np.kron(projector(KET_PLUS), rho_env) @ dag(u1)
    out = partial_trace(state, (2, 2), keep=0)
    if abs(np.trace(out) - 1.0) > 1e-12:
        raise RuntimeError("partial trace lost normalisation")
    return Dynamics(maps=(e1, e2))


def thermal_ad_kraus(p: float, beta: float) -> list[np.ndarray]:
    """The four thermal amplitude damping Kraus operators.

    Emission (M1, M2) is weighted by z_- and absorption (M3, M4) by z_+,
    with z_-^2 + z_+^2 = 1 so the set is exactly trace preserving.
    """
    params = ThermalADParams(p, beta)
    zm, zp = params.z_minus, params.z_plus
    sp_sm = SIGMA_PLUS @ SIGMA_MINUS  # |1><1|
    sm_sp = SIGMA_MINUS @ SIGMA_PLUS  # |0><0|
    m1 = zm * np.sqrt(p) * SIGMA_MINUS
    m2 = zm * (np.sqrt(1.0 - p) * sp_sm + sm_sp)
    m3 = zp * np.sqrt(p) * SIGMA_PLUS
    m4 = zp * (sp_sm + np.sqrt(1.0 - p) * sm_sp)
    return [m1, m2, m3, m4]


def thermal_ad_channel(p: float, beta: float) -> QuantumChannel:
    """Thermal amplitude damping channel of strength p at inverse temperature beta."""
    return QuantumChannel.from_kraus(thermal_ad_kraus(p, beta))
