"""Independent reference computations used to cross-check the closed forms.

Nothing here calls the analysis formulas; integrands are built from the
closed-form propagators and integrated numerically, or the dynamics are
stepped with classical RK4.
"""

import numpy as np

from .numerics import integrate
from .observer import observer_propagator
from .plant import reduced_propagator


def rk4_propagate(a, t, step=1e-4, x0=None):
    """Integrate ``x' = a x`` from 0 to ``t`` with fixed-step RK4.

    With ``x0=None`` the identity is propagated, giving ``exp(a t)``.
    """
    a = np.asarray(a, dtype=float)
    x = np.eye(a.shape[0]) if x0 is None else np.array(x0, dtype=float)
    n = max(1, int(np.ceil(abs(t) / step)))
    h = t / n
    for _ in range(n):
        k1 = a @ x
        k2 = a @ (x + 0.5 * h * k1)
        k3 = a @ (x + 0.5 * h * k2)
        k4 = a @ (x + h * k3)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def k_rows(obs, tau):
    """Observer output row at each ``tau`` via error coordinates.

    ``x_o(t) = exp(A_o t)(x_o(0) - z_bar_p(0)) + exp(A_bar_p t) z_bar_p(0)``,
    so ``[k1 k2] = C_o(exp(A_bar_p t) - exp(A_o t))`` and ``[k3 k4] = C_o exp(A_o t)``.
    Returns an array of shape ``(len(tau), 4)``.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    wo, wp = obs.omega_o, obs.omega_p
    co, so = np.cos(wo * tau), np.sin(wo * tau)
    cp, sp = np.cos(wp * tau), np.sin(wp * tau)
    o1, o2 = co, wp / wo * so
    return np.stack([cp - o1, sp - o2, o1, o2], axis=1)


def quad_g(obs, t_avg, t):
    """``(1/T) int_{t-T}^t C_o exp(A_o tau) d tau`` on each unit ``e(0)`` direction."""
    out = []
    for j in range(2):
        def f(tau, j=j):
            return np.array([observer_propagator(obs, s)[0, j] for s in tau])
        out.append(integrate(f, t - t_avg, t, vectorized=True) / t_avg)
    return tuple(out)


def quad_h(omega_p, t_avg, t):
    """Moving average of ``(f1, f2)`` over ``[t - T, t]`` minus their values at ``t``."""
    out = []
    f_t = reduced_propagator(omega_p, t)[0]
    for j in range(2):
        def f(tau, j=j):
            return np.array([reduced_propagator(omega_p, s)[0, j] for s in tau])
        out.append(integrate(f, t - t_avg, t, vectorized=True) / t_avg - f_t[j])
    return tuple(out)


def quad_l(obs, t_avg, t):
    """Averaged observer output coefficients by quadrature of ``k_rows``."""
    lo = max(0.0, t - t_avg)
    width = t - lo
    return tuple(
        integrate(lambda tau, j=j: k_rows(obs, tau)[:, j], lo, t, vectorized=True) / width
        for j in range(4)
    )
