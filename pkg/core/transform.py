"""Character transform over (Z_p)^n and exact integer helpers.

Every index used by the lab (field element, matrix, vertex) is a base-p
numeral whose digits add coordinatewise mod p, so a flat array indexed by
it is a function on (Z_p)^n and its character transform is the
n-dimensional DFT with p points per axis.
"""

import math

import numpy as np

from core.errors import FieldMismatchError, PrecisionLossError
from core.logger import logger

INT64_SAFE = 2**62
FLOAT_SAFE = 2**52


def digits_count(size: int, p: int) -> int:
    """n with p^n == size."""
    n = round(math.log(size, p)) if size > 1 else 0
    if p**n != size:
        raise FieldMismatchError(f"Array of size {size} is not indexed by (Z_{p})^n")
    return n


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """
    Unnormalised Walsh-Hadamard transform, the p = 2 character transform.

    Integer input stays integer; object arrays keep exact Python integers.
    """
    a = np.array(values, copy=True)
    size = a.size
    h = 1
    while h < size:
        view = a.reshape(-1, 2, h)
        low = view[:, 0, :].copy()
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = low - view[:, 1, :]
        h *= 2
    return a.reshape(size)


def character_transform(values: np.ndarray, p: int) -> np.ndarray:
    """
    f_hat(xi) = sum_x f(x) omega^{<xi, x>} over (Z_p)^n.

    Parameters
    ----------
    values : np.ndarray
        Flat array of length p^n
    p : int
        Prime

    Returns
    -------
    np.ndarray
        Integer array for p = 2, complex array otherwise
    """
    values = np.asarray(values)
    n = digits_count(values.size, p)
    logger.debug(f"Character transform over (Z_{p})^{n}, {values.size} points")
    if p == 2:
        return walsh_hadamard(values)
    return np.fft.fftn(values.astype(np.float64).reshape((p,) * n)).reshape(values.size)


def to_exact(values: np.ndarray, scale: int = 1, magnitude: float = 0.0) -> np.ndarray:
    """
    Round a transform output (divided by scale) to exact integers.

    Raises
    ------
    PrecisionLossError
        The values are too large for float64 or too far from integers
    """
    if values.dtype == object or np.issubdtype(values.dtype, np.integer):
        if scale == 1:
            return values
        quotient = values // scale
        if np.any(quotient * scale != values):
            raise PrecisionLossError("Integer transform is not divisible by its scale")
        return quotient
    if magnitude >= FLOAT_SAFE:
        raise PrecisionLossError(f"Magnitude {magnitude:.3g} exceeds the float64 exact range")
    real = np.real(values) / scale
    rounded = np.rint(real)
    residue = float(np.max(np.abs(real - rounded), initial=0.0))
    residue = max(residue, float(np.max(np.abs(np.imag(values)) / scale, initial=0.0)))
    if residue > 1e-3:
        raise PrecisionLossError(f"Transform residue {residue:.3g} is too large to round")
    return rounded.astype(np.int64)


def exact_dtype(bound: int):
    """int64 when every intermediate stays below 2^62, Python ints otherwise."""
    return np.int64 if bound < INT64_SAFE else object


def exact_dot(u: np.ndarray, v: np.ndarray) -> int:
    """Exact sum_i u_i v_i of nonnegative count arrays."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.size == 0:
        return 0
    bound = int(np.max(u, initial=0)) * int(np.max(v, initial=0)) * int(u.size)
    if bound < INT64_SAFE and u.dtype != object and v.dtype != object:
        return int(np.dot(u.astype(np.int64), v.astype(np.int64)))
    mask = (u != 0) & (v != 0)
    return sum(int(a) * int(b) for a, b in zip(u[mask], v[mask]))
