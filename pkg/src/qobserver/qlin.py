"""Closed linear quantum systems at the level of real coefficient matrices.

A system is specified by a symmetric Hamiltonian matrix ``R`` (the quadratic
form ``H = x^T R x / 2``) and the canonical structure ``Theta = diag(J, ..., J)``.
The drift is ``A = 2 Theta R``.  Physical realizability is the matrix identity
``A Theta + Theta A^T = 0``; its time-domain counterpart is that the flow
``exp(A t)`` preserves ``Theta``.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import NumericsError, as_matrix, block_diag, expm

J = np.array([[0.0, 1.0], [-1.0, 0.0]])

SYMMETRY_TOL = 1e-14
REALIZABILITY_TOL = 1e-12
FLOW_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SymplecticStructure:
    mode_count: int
    theta: np.ndarray

    @classmethod
    def canonical(cls, mode_count):
        if mode_count < 1:
            raise NumericsError(f"mode count must be positive, got {mode_count}")
        return cls(mode_count, block_diag(*([J] * mode_count)))

    @property
    def dim(self):
        return 2 * self.mode_count


@dataclass(frozen=True, eq=False)
class QuantumLinearSystem:
    hamiltonian: np.ndarray
    structure: SymplecticStructure
    drift: np.ndarray

    @property
    def theta(self):
        return self.structure.theta


@dataclass(frozen=True)
class RealizabilityReport:
    residual: float
    tol: float = REALIZABILITY_TOL

    @property
    def passed(self):
        return self.residual <= self.tol


def make_system(r, n_modes=None, structure=None):
    """Build the system with Hamiltonian matrix ``r``.

    ``structure`` defaults to the canonical one with ``n_modes`` modes.
    """
    r = as_matrix(r)
    if structure is None:
        if n_modes is None:
            raise NumericsError("need n_modes or an explicit structure")
        structure = SymplecticStructure.canonical(n_modes)
    if r.shape != (structure.dim, structure.dim):
        raise NumericsError(f"Hamiltonian shape {r.shape} does not match {structure.mode_count} modes")
    if np.max(np.abs(r - r.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(r))):
        raise NumericsError("Hamiltonian matrix is not symmetric")
    drift = 2.0 * structure.theta @ r
    return QuantumLinearSystem(r, structure, drift)


def realizability_residual(drift, theta):
    drift = as_matrix(drift)
    return float(np.max(np.abs(drift @ theta + theta @ drift.T)))


def check_realizability(sys):
    return RealizabilityReport(realizability_residual(sys.drift, sys.theta))


def flow_residual(sys, times):
    """Largest ``|exp(A t) Theta exp(A t)^T - Theta|`` over ``times``."""
    worst = 0.0
    for t in times:
        phi = expm(sys.drift, t)
        worst = max(worst, float(np.max(np.abs(phi @ sys.theta @ phi.T - sys.theta))))
    return worst
