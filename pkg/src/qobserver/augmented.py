"""Plant and observer joined through the coupling Hamiltonian.

Two representations are kept side by side.  The physical 6x6 system in
``(x_p, x_o)`` carries the realizability checks; the reduced 4x4 system in
``(z_p, z~_p, x_o)`` carries all coefficient analysis.
"""

from dataclasses import dataclass, field

import numpy as np

from .numerics import NumericsError, as_matrix, block, block_diag, expm
from .qlin import J, QuantumLinearSystem, SymplecticStructure, make_system

NONDISTURBANCE_TOL = 1e-14
TRAJECTORY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    plant: object
    observer: object
    r_c: np.ndarray
    r_a: np.ndarray
    theta_a: np.ndarray
    a_a: np.ndarray
    # None when an injected coupling does not factor through (z_p, z~_p).
    a_bar_a: np.ndarray | None
    out_plant: np.ndarray
    out_obs: np.ndarray
    system: QuantumLinearSystem
    injected: bool = field(default=False)


@dataclass(frozen=True)
class NondisturbanceReport:
    coupling_residual: float
    reduction_residual: float
    trajectory_residual: float

    @property
    def passed(self):
        return (
            self.coupling_residual <= NONDISTURBANCE_TOL
            and self.reduction_residual <= NONDISTURBANCE_TOL
            and self.trajectory_residual <= TRAJECTORY_TOL
        )


def build_augmented(plant, obs, beta=None, r_c=None):
    """Assemble the coupled system.

    ``beta`` and ``r_c`` override the designed coupling and exist for tests
    and the deliberately failing verification path.
    """
    if plant.omega_p != obs.omega_p:
        raise NumericsError(f"plant omega_p {plant.omega_p} != observer omega_p {obs.omega_p}")
    injected = beta is not None or r_c is not None
    beta = obs.beta if beta is None else as_matrix(beta).reshape(2, 1)
    alpha = plant.c_p.T
    if r_c is None:
        r_c = alpha @ beta.T
        reducible = True
    else:
        r_c = as_matrix(r_c)
        if r_c.shape != (4, 2):
            raise NumericsError(f"coupling matrix must be 4x2, got {r_c.shape}")
        reducible = False

    r_a = block([[plant.r_p, r_c], [r_c.T, obs.r_o]])
    structure = SymplecticStructure(3, block_diag(plant.system.theta, J))
    system = make_system(r_a, structure=structure)

    a_bar_a = None
    if reducible:
        a_bar_a = block([[plant.a_bar_p, np.zeros((2, 2))], [2.0 * J @ beta @ plant.c_bar_p, obs.a_o]])
    zero12 = np.zeros((1, 2))
    return AugmentedSystem(
        plant=plant,
        observer=obs,
        r_c=r_c,
        r_a=r_a,
        theta_a=structure.theta,
        a_a=system.drift,
        a_bar_a=a_bar_a,
        out_plant=block([[plant.c_bar_p, zero12]]),
        out_obs=block([[zero12, obs.c_o]]),
        system=system,
        injected=injected,
    )


def reduction_map(plant):
    """The 4x6 map ``x_a -> (z_p, z~_p, x_o)``."""
    c = np.array([plant.spec.c_p1])
    z = np.zeros((1, 2))
    return block([[c, z, z], [z, c, z], [np.zeros((2, 4)), np.eye(2)]])


def verify_nondisturbance(aug, times=None):
    """Check that the coupling leaves ``z_p`` dynamics untouched.

    Three residuals: the projection of the ``x_o -> x_p`` drift block through
    ``C_p1`` (both plant-output rows), the reduction identity
    ``Q A_a = A_bar_a Q``, and the gap between coupled and uncoupled ``z_p``
    coefficient trajectories on ``times`` (default ``[0, 10]``).
    """
    plant = aug.plant
    if times is None:
        times = np.linspace(0.0, 10.0, 201)
    q = reduction_map(plant)
    coupling = float(np.max(np.abs(q[:2] @ aug.a_a[:, 4:])))
    if aug.a_bar_a is None:
        reduction = float("inf")
    else:
        reduction = float(np.max(np.abs(q @ aug.a_a - aug.a_bar_a @ q)))

    sel = block([[plant.c_p, np.zeros((1, 2))]])
    worst = 0.0
    for t in times:
        coupled = sel @ expm(aug.a_a, t)
        uncoupled = np.hstack([plant.c_p @ expm(plant.a_p, t), np.zeros((1, 2))])
        worst = max(worst, float(np.max(np.abs(coupled - uncoupled))))
    return NondisturbanceReport(coupling, reduction, worst)


def augmented_propagator(aug, t):
    """``exp(A_bar_a t)`` of the reduced 4x4 system."""
    if aug.a_bar_a is None:
        raise NumericsError("coupling does not admit the reduced (z_p, z~_p, x_o) form")
    return expm(aug.a_bar_a, t)


def error_coordinates():
    """Similarity ``S`` with ``(z_bar_p, e) = S (z_bar_p, x_o)``, ``e = x_o - z_bar_p``."""
    eye, zero = np.eye(2), np.zeros((2, 2))
    return block([[eye, zero], [-eye, eye]])
