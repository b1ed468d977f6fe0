"""Small dense real-matrix kernel.

Matrices are plain 2-D ``float64`` numpy arrays.  Everything here is a pure
function; inputs are never modified.
"""

import math
import warnings
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import matrix_balance

# Frozen module tolerances; downstream acceptance thresholds rely on them.
QUAD_ABS_TOL = 1e-10
MAX_CONDITION = 1e12

# Pade(13) coefficients and the 1-norm threshold below which no scaling is
# needed (Higham 2005).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152
_PADE13_LD = tuple(np.longdouble(c) for c in _PADE13)

_GL_ORDER = 15
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)
_QUAD_MAX_DEPTH = 50


class NumericsError(ValueError):
    """Invalid input to a numerics routine."""


class SingularMatrixError(NumericsError):
    def __init__(self, condition):
        self.condition = condition
        super().__init__(f"matrix is singular or ill-conditioned (condition estimate {condition:.3e})")


def as_matrix(m):
    """Return ``m`` as a finite 2-D float array, raising on NaN/Inf or wrong rank."""
    a = np.array(m, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise NumericsError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericsError("matrix has non-finite entries")
    return a


def _check_square(a):
    if a.shape[0] != a.shape[1]:
        raise NumericsError(f"expected a square matrix, got shape {a.shape}")


def matmul(*ms):
    """Chained product with explicit dimension checks (no broadcasting)."""
    if not ms:
        raise NumericsError("matmul needs at least one operand")
    out = as_matrix(ms[0])
    for m in ms[1:]:
        b = as_matrix(m)
        if out.shape[1] != b.shape[0]:
            raise NumericsError(f"dimension mismatch: {out.shape} @ {b.shape}")
        out = out @ b
    return out


def block(rows):
    """Assemble a block matrix; every block must be 2-D and the grid consistent."""
    return as_matrix(np.block([[as_matrix(b) for b in row] for row in rows]))


def block_diag(*blocks):
    blocks = [as_matrix(b) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    out = np.zeros((n, m))
    i = j = 0
    for b in blocks:
        out[i:i + b.shape[0], j:j + b.shape[1]] = b
        i += b.shape[0]
        j += b.shape[1]
    return out


def _refined_solve(a, b):
    """Solve ``a x = b`` for long-double ``a, b``: LAPACK in float64, then one
    residual correction computed in extended precision."""
    x = np.linalg.solve(a.astype(float), b.astype(float)).astype(np.longdouble)
    r = b - a @ x
    return x + np.linalg.solve(a.astype(float), r.astype(float)).astype(np.longdouble)


def _pade13_expm(a):
    b = _PADE13_LD
    ident = np.eye(a.shape[0], dtype=np.longdouble)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    return _refined_solve(v - u, v + u)


@lru_cache(maxsize=64)
def _balance(key, shape):
    a = np.frombuffer(key, dtype=float).reshape(shape)
    with warnings.catch_warnings():
        # scipy casts the unused permutation output; NaN there is harmless
        warnings.simplefilter("ignore", RuntimeWarning)
        balanced, (scale, _) = matrix_balance(a, permute=False, separate=True)
    balanced = balanced.astype(np.longdouble)
    balanced.flags.writeable = False
    scale.flags.writeable = False
    return balanced, scale


def expm(m, t=1.0):
    """Matrix exponential ``exp(m * t)`` by scaling and squaring with a Pade(13) approximant.

    ``m`` is first balanced by an exact power-of-two diagonal similarity, which
    keeps the strongly non-normal oscillator blocks (entries of order ``2*mu``
    against order ``1``) accurate.  The approximant and the squarings run in
    ``numpy.longdouble``: with ``mu = 5e4`` the coupled propagator reaches
    entries near ``5e5`` by ``t = 10`` and float64 squaring alone leaves
    symplectic residuals above ``1e-9``.  Where ``longdouble`` is plain double
    the result is simply less accurate.
    """
    a = as_matrix(m)
    _check_square(a)
    t = float(t)
    if not math.isfinite(t):
        raise NumericsError(f"non-finite time {t!r}")
    n = a.shape[0]
    if t == 0.0 or not a.any():
        return np.eye(n)
    balanced, scale = _balance(a.tobytes(), a.shape)
    bt = balanced * np.longdouble(t)
    norm = float(np.abs(bt).sum(axis=0).max())
    s = 0
    if norm > _THETA13:
        s = int(math.ceil(math.log2(norm / _THETA13)))
    r = _pade13_expm(bt / np.longdouble(2.0) ** s)
    for _ in range(s):
        r = r @ r
    out = (r * scale[:, None] / scale[None, :]).astype(float)
    if not np.all(np.isfinite(out)):
        raise NumericsError("matrix exponential overflowed")
    return out


def inverse(m):
    """Inverse of a well-conditioned square matrix.

    Raises :class:`SingularMatrixError` carrying the 2-norm condition estimate
    when it exceeds ``MAX_CONDITION``.
    """
    a = as_matrix(m)
    _check_square(a)
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(cond)
    return np.linalg.solve(a, np.eye(a.shape[0]))


def _panel(f, a, b, vectorized):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GL_NODES
    if vectorized:
        y = np.asarray(f(x), dtype=float)
    else:
        y = np.array([f(xi) for xi in x], dtype=float)
    if y.shape != x.shape or not np.all(np.isfinite(y)):
        raise NumericsError(f"integrand returned non-finite or mis-shaped values on [{a}, {b}]")
    return half * float(np.dot(_GL_WEIGHTS, y))


def integrate(f, a, b, vectorized=False):
    """Adaptive composite Gauss-Legendre quadrature of ``f`` over ``[a, b]``.

    Each panel is compared against the sum over its two halves and split until
    the local difference fits its share of ``QUAD_ABS_TOL``.  Pass
    ``vectorized=True`` when ``f`` accepts an array of abscissae.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NumericsError("non-finite integration bounds")
    if a > b:
        raise NumericsError(f"lower bound {a} exceeds upper bound {b}")
    if a == b:
        return 0.0
    width = b - a
    total = 0.0
    stack = [(a, b, _panel(f, a, b, vectorized), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _panel(f, lo, mid, vectorized)
        right = _panel(f, mid, hi, vectorized)
        tol = QUAD_ABS_TOL * (hi - lo) / width
        if abs(left + right - whole) <= tol or depth >= _QUAD_MAX_DEPTH:
            total += left + right
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    return total
