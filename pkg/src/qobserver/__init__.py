"""Direct-coupled coherent observer for an oscillatory linear quantum plant."""

from .analysis import (
    AveragingSpec,
    CoefficientTrace,
    DesignSearchError,
    ErrorEnvelope,
    coefficient_trace,
    design_for_epsilon,
    error_envelope,
    g_coeffs,
    h_coeffs,
    k_coeffs,
    l_coeffs,
)
from .augmented import AugmentedSystem, augmented_propagator, build_augmented, verify_nondisturbance
from .numerics import NumericsError, expm, integrate, inverse
from .observer import ObserverRealization, ObserverSpec, build_observer, observer_propagator
from .plant import PlantRealization, PlantSpec, build_plant, plant_output_coeffs, plant_propagator
from .qlin import QuantumLinearSystem, SymplecticStructure, check_realizability, make_system

__version__ = "0.1.0"
