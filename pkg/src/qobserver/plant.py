"""Two-mode oscillatory plant and its reduced (z_p, z~_p) output system."""

from dataclasses import dataclass

import numpy as np

from .numerics import NumericsError, as_matrix, block
from .qlin import J, QuantumLinearSystem, make_system

C_BAR_P = np.array([[1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class PlantSpec:
    omega_p: float = 1.0
    c_p1: tuple = (1.0, 0.0)

    def __post_init__(self):
        if not (np.isfinite(self.omega_p) and self.omega_p > 0):
            raise NumericsError(f"omega_p must be positive, got {self.omega_p}")
        c = np.asarray(self.c_p1, dtype=float)
        if c.shape != (2,) or not np.all(np.isfinite(c)) or not c.any():
            raise NumericsError(f"c_p1 must be a nonzero pair of reals, got {self.c_p1!r}")
        object.__setattr__(self, "omega_p", float(self.omega_p))
        object.__setattr__(self, "c_p1", tuple(float(v) for v in c))


@dataclass(frozen=True, eq=False)
class PlantRealization:
    spec: PlantSpec
    r_p: np.ndarray
    a_p: np.ndarray
    c_p: np.ndarray
    a_bar_p: np.ndarray
    c_bar_p: np.ndarray
    system: QuantumLinearSystem

    @property
    def omega_p(self):
        return self.spec.omega_p

    @property
    def c_p1(self):
        return np.array([self.spec.c_p1])


def build_plant(spec):
    w = spec.omega_p
    r_pc = -0.5 * w * J
    zero = np.zeros((2, 2))
    r_p = block([[zero, r_pc], [r_pc.T, zero]])
    system = make_system(r_p, n_modes=2)
    c_p = block([[np.array([spec.c_p1]), np.zeros((1, 2))]])
    return PlantRealization(
        spec=spec,
        r_p=r_p,
        a_p=system.drift,
        c_p=c_p,
        a_bar_p=w * J,
        c_bar_p=C_BAR_P.copy(),
        system=system,
    )


def reduced_propagator(omega_p, t):
    """Closed form of ``exp(omega_p J t)``."""
    c, s = np.cos(omega_p * t), np.sin(omega_p * t)
    return np.array([[c, s], [-s, c]])


def plant_propagator(real, t):
    """Closed form of ``exp(A_p t)``: cos/sin blocks times the 2x2 identity."""
    c, s = np.cos(real.omega_p * t), np.sin(real.omega_p * t)
    eye = np.eye(2)
    return block([[c * eye, s * eye], [-s * eye, c * eye]])


def plant_output_coeffs(real, t):
    """Coefficients ``(f1, f2)`` with ``z_p(t) = f1 z_p(0) + f2 z~_p(0)``."""
    w = real.omega_p
    return float(np.cos(w * t)), float(np.sin(w * t))


def output_coeffs_from_propagator(real, phi):
    """Recover ``(f1, f2)`` from a full 4x4 plant propagator.

    ``z_p(t) = C_p phi x_p(0)``; restricting to initial conditions
    ``x_p1(0) = c z_p(0)``, ``x_p2(0) = c z~_p(0)`` with ``c = C_p1^T / |C_p1|^2``
    gives the reduced coefficients.
    """
    phi = as_matrix(phi)
    c = real.c_p1.T / float((real.c_p1 @ real.c_p1.T)[0, 0])
    row = real.c_p @ phi
    return float(row[0, :2] @ c[:, 0]), float(row[0, 2:] @ c[:, 0])
