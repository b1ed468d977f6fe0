"""Coefficient functions of the plant, raw observer and averaged observer
outputs, their error envelopes, and the (T, mu) design search.

Every output is a linear combination of initial-condition operators; only the
real coefficients are computed.  Bases:

* ``f1, f2, k1, l1, h1`` multiply ``z_p(0)``; ``f2, k2, l2, h2`` multiply ``z~_p(0)``
* ``k3, l3`` multiply ``x_o1(0)``; ``k4, l4`` multiply ``x_o2(0)``
* ``g1, g2`` multiply ``e_1(0), e_2(0)`` with ``e = x_o - (z_p, z~_p)``
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import NumericsError, expm, inverse
from .observer import ObserverSpec, build_observer
from .plant import plant_output_coeffs

COLUMNS = ("t", "f1", "f2", "k1", "k2", "k3", "k4", "l1", "l2", "l3", "l4", "g1", "g2", "h1", "h2")

BASIS = {
    "f1": "z_p(0)", "f2": "z~_p(0)",
    "k1": "z_p(0)", "k2": "z~_p(0)", "k3": "x_o1(0)", "k4": "x_o2(0)",
    "l1": "z_p(0)", "l2": "z~_p(0)", "l3": "x_o1(0)", "l4": "x_o2(0)",
    "g1": "e_1(0)", "g2": "e_2(0)",
    "h1": "z_p(0)", "h2": "z~_p(0)",
}

SMALL_T = 1e-6
ENVELOPE_GRID = 10_000
MU_START = 1.0
MU_LIMIT = 1e12
T_START = 1.0
T_BISECT_STEPS = 60


class DesignSearchError(RuntimeError):
    def __init__(self, message, envelope=None):
        self.envelope = envelope
        super().__init__(message)


@dataclass(frozen=True)
class AveragingSpec:
    t_avg: float

    def __post_init__(self):
        if not (math.isfinite(self.t_avg) and self.t_avg > 0):
            raise NumericsError(f"averaging time must be positive, got {self.t_avg}")
        object.__setattr__(self, "t_avg", float(self.t_avg))


@dataclass(frozen=True)
class ErrorEnvelope:
    sup_g_sq: float
    sup_h_sq: float
    combined: float
    mu: float
    t_avg: float
    g_bound: float
    h_closed: float


@dataclass(frozen=True, eq=False)
class CoefficientTrace:
    times: np.ndarray
    values: dict

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise NumericsError("trace time grid must be strictly increasing")

    @property
    def labels(self):
        return tuple(self.values)

    def basis(self, label):
        return BASIS[label]


def _require_window(t, t_avg):
    if np.any(np.asarray(t) < t_avg):
        raise NumericsError(f"moving average needs t >= T = {t_avg}")


def g_coeffs(obs, avg, t):
    """Averaged estimation error coefficients ``(g1, g2)``, valid for ``t >= T``.

    Accepts a scalar or an array of times.
    """
    T = avg.t_avg
    _require_window(t, T)
    wo = obs.omega_o
    c, s = np.cos(wo * t), np.sin(wo * t)
    sT, cT1 = np.sin(wo * T), 1.0 - np.cos(wo * T)
    g1 = (c * sT + s * cT1) / (T * wo)
    g2 = (obs.omega_p / wo**2 * s * sT - c * cT1 / obs.stiffness) / T
    return g1, g2


def sinc_terms(omega_p, t_avg):
    """``(a, b)`` with ``a = 1 - sin(wT)/(wT)`` and ``b = (1 - cos(wT))/(wT)``."""
    x = omega_p * t_avg
    return 1.0 - math.sin(x) / x, (1.0 - math.cos(x)) / x


def h_coeffs(plant, avg, t):
    """Averaging distortion ``(h1, h2)`` of the plant output, valid for ``t >= T``.

    ``avg_T z_p(t) - z_p(t) = h1 z_p(0) + h2 z~_p(0)`` with
    ``[h1, h2] = [cos wt, sin wt] @ [[-a, -b], [b, -a]]``.
    """
    T = avg.t_avg
    _require_window(t, T)
    w = plant.omega_p
    x = w * T
    a = 1.0 - np.sin(x) / x
    b = (1.0 - np.cos(x)) / x
    c, s = np.cos(w * t), np.sin(w * t)
    return -a * c + b * s, -b * c - a * s


def k_coeffs(aug, t):
    """Raw observer output row ``[0 C_o] exp(A_bar_a t)`` as ``(k1, k2, k3, k4)``."""
    if aug.a_bar_a is None:
        raise NumericsError("coupling does not admit the reduced (z_p, z~_p, x_o) form")
    return tuple(float(v) for v in (aug.out_obs @ expm(aug.a_bar_a, t))[0])


class _AverageOperator:
    """Cached pieces of the averaged observer output for one (system, T)."""

    def __init__(self, aug, avg):
        if aug.a_bar_a is None:
            raise NumericsError("coupling does not admit the reduced (z_p, z~_p, x_o) form")
        self.aug = aug
        self.t_avg = avg.t_avg
        a = aug.a_bar_a
        self.a_inv = inverse(a)
        # (I - exp(-A T)) A^{-1}
        self.window = (np.eye(4) - expm(a, -self.t_avg)) @ self.a_inv
        self.series = [aug.out_obs]
        for n in range(1, 4):
            self.series.append(self.series[-1] @ a / (n + 1))

    def k_row(self, t):
        return self.aug.out_obs @ expm(self.aug.a_bar_a, t)

    def l_row(self, t, k_row=None):
        if t <= 0:
            raise NumericsError(f"averaged output needs t > 0, got {t}")
        if t >= self.t_avg:
            if k_row is None:
                k_row = self.k_row(t)
            return (k_row @ self.window) / self.t_avg
        if t < SMALL_T:
            # (exp(A t) - I) A^{-1} / t = I + A t/2 + A^2 t^2/6 + A^3 t^3/24 + ...
            return sum(term * t**n for n, term in enumerate(self.series))
        if k_row is None:
            k_row = self.k_row(t)
        return ((k_row - self.aug.out_obs) @ self.a_inv) / t


def l_coeffs(aug, avg, t):
    """Averaged observer output ``(l1, l2, l3, l4)``.

    Running mean from 0 for ``t < T``, moving average over ``[t - T, t]`` after.
    """
    return tuple(float(v) for v in _AverageOperator(aug, avg).l_row(t)[0])


def trace_row(op, plant, obs, t):
    """All CSV columns at time ``t``; g and h are ``None`` before the window fills."""
    avg = AveragingSpec(op.t_avg)
    f1, f2 = plant_output_coeffs(plant, t)
    k = op.k_row(t)
    if t == 0:
        l_row = op.aug.out_obs
    else:
        l_row = op.l_row(t, k)
    row = [t, f1, f2, *(float(v) for v in k[0]), *(float(v) for v in l_row[0])]
    if t >= op.t_avg:
        g1, g2 = g_coeffs(obs, avg, t)
        h1, h2 = h_coeffs(plant, avg, t)
        row += [float(g1), float(g2), float(h1), float(h2)]
    else:
        row += [None] * 4
    return row


def time_grid(t_max, dt):
    n = int(round(t_max / dt))
    return [i * dt for i in range(n + 1)]


def coefficient_trace(aug, avg, times):
    """Evaluate every coefficient on ``times``; missing g/h values become NaN."""
    op = _AverageOperator(aug, avg)
    rows = [trace_row(op, aug.plant, aug.observer, t) for t in times]
    arr = np.array([[np.nan if v is None else v for v in r] for r in rows], dtype=float)
    return CoefficientTrace(arr[:, 0], {name: arr[:, i] for i, name in enumerate(COLUMNS) if name != "t"})


def _golden_max(f, lo, hi, iters=60):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return max(fc, fd)


def _sup_periodic(f, start, period, n=ENVELOPE_GRID):
    t = start + np.linspace(0.0, period, n + 1)
    v = f(t)
    i = int(np.argmax(v))
    step = period / n
    refined = _golden_max(lambda x: float(f(np.array([x]))[0]), max(start, t[i] - step), t[i] + step)
    return max(float(v[i]), refined)


def error_envelope(plant, obs, avg):
    """Sup over ``t >= T`` of the squared error coefficients.

    g is periodic with period ``2 pi / omega_o`` and ``h1^2 + h2^2`` is
    constant in ``t``, so one observer period starting at ``T`` covers both.
    """
    T = avg.t_avg
    wo, wp = obs.omega_o, plant.omega_p

    def g_sq(t):
        g1, g2 = g_coeffs(obs, avg, t)
        return g1**2 + g2**2

    def h_sq(t):
        h1, h2 = h_coeffs(plant, avg, t)
        return h1**2 + h2**2

    sup_g = _sup_periodic(g_sq, T, 2 * math.pi / wo)
    sup_h = _sup_periodic(h_sq, T, 2 * math.pi / wp)
    combined = _sup_periodic(lambda t: g_sq(t) + h_sq(t), T, 2 * math.pi / wo)
    a, b = sinc_terms(wp, T)
    return ErrorEnvelope(
        sup_g_sq=sup_g,
        sup_h_sq=sup_h,
        combined=max(combined, sup_h),
        mu=obs.mu,
        t_avg=T,
        g_bound=(2.0 / (T * wo)) ** 2 * (1.0 + wp / wo) ** 2,
        h_closed=a * a + b * b,
    )


def design_for_epsilon(plant, epsilon):
    """Find ``(T, mu)`` with combined envelope at most ``epsilon``.

    T first: the largest value found by bisection with ``a^2 + b^2 <= eps/4``
    (taken directly if ``T_START`` already qualifies).  Then ``mu`` doubles from
    ``MU_START`` until the grid sup of ``g1^2 + g2^2`` is at most ``eps/4``.
    The final envelope is recomputed and checked against ``epsilon``.
    """
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise NumericsError(f"epsilon must be positive, got {epsilon}")
    budget = epsilon / 4.0
    wp = plant.omega_p

    def h_sup(T):
        a, b = sinc_terms(wp, T)
        return a * a + b * b

    T = T_START / wp
    if h_sup(T) > budget:
        lo, hi = 0.0, T
        for _ in range(T_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if h_sup(mid) <= budget:
                lo = mid
            else:
                hi = mid
        T = lo
    avg = AveragingSpec(T)

    mu = MU_START
    envelope = None
    while True:
        if mu > MU_LIMIT:
            raise DesignSearchError(
                f"mu search exceeded {MU_LIMIT:g} at T={T:.6g}; last envelope {envelope}", envelope
            )
        obs = build_observer(ObserverSpec(mu), plant)
        envelope = error_envelope(plant, obs, avg)
        if envelope.sup_g_sq <= budget:
            break
        mu *= 2.0
    if envelope.combined > epsilon:
        raise DesignSearchError(f"verified envelope {envelope.combined:.3e} exceeds epsilon {epsilon}", envelope)
    return avg, ObserverSpec(mu), envelope
