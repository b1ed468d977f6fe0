"""Single-mode coherent observer with gain parameter ``mu``."""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import NumericsError
from .qlin import J, QuantumLinearSystem, make_system

GAIN_IDENTITY_TOL = 1e-14


@dataclass(frozen=True)
class ObserverSpec:
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise NumericsError(f"observer gain mu must be positive, got {self.mu}")
        object.__setattr__(self, "mu", float(self.mu))


@dataclass(frozen=True, eq=False)
class ObserverRealization:
    spec: ObserverSpec
    omega_p: float
    beta: np.ndarray
    r_o: np.ndarray
    a_o: np.ndarray
    c_o: np.ndarray
    gain_l: np.ndarray
    omega_o: float
    system: QuantumLinearSystem

    @property
    def mu(self):
        return self.spec.mu

    @property
    def stiffness(self):
        """``2 mu + omega_p``, the (2,1) magnitude of ``A_o``."""
        return 2.0 * self.spec.mu + self.omega_p


def build_observer(spec, plant):
    w = plant.omega_p
    c_bar = plant.c_bar_p
    beta = -spec.mu * c_bar.T
    # R_o = (omega_p/2) I - beta C_bar_p, symmetric positive definite for this beta.
    r_o = 0.5 * w * np.eye(2) - beta @ c_bar
    system = make_system(r_o, n_modes=1)
    a_o = system.drift
    gain_l = 2.0 * J @ beta
    gap = np.max(np.abs(a_o - (plant.a_bar_p - gain_l @ c_bar)))
    if gap > GAIN_IDENTITY_TOL * max(1.0, spec.mu):
        raise NumericsError(f"observer drift violates A_o = A_bar_p - L C_bar_p (gap {gap:.3e})")
    if np.any(np.linalg.eigvalsh(r_o) <= 0):
        raise NumericsError("observer Hamiltonian matrix is not positive definite")
    return ObserverRealization(
        spec=spec,
        omega_p=w,
        beta=beta,
        r_o=r_o,
        a_o=a_o,
        c_o=c_bar.copy(),
        gain_l=gain_l,
        omega_o=math.sqrt(w * (2.0 * spec.mu + w)),
        system=system,
    )


def observer_propagator(obs, t):
    """Closed form of ``exp(A_o t)``."""
    wo = obs.omega_o
    c, s = np.cos(wo * t), np.sin(wo * t)
    return np.array([[c, obs.omega_p / wo * s], [-obs.stiffness / wo * s, c]])
