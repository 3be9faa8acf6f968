"""Input validation helpers used across the public API."""

import numbers

import numpy as np

from .exceptions import DomainError


def check_complex(z, name="z"):
    """Return ``z`` as a Python complex, rejecting NaN/Inf and non-numbers."""
    if isinstance(z, str):
        raise TypeError(f"{name} must be a number, got a string")
    if not isinstance(z, numbers.Number):
        raise TypeError(f"{name} must be a number, got {type(z).__name__}")
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return z


def check_upper_half_plane(z, name="z"):
    z = check_complex(z, name)
    if not z.imag > 0:
        raise DomainError(f"{name} must satisfy Im {name} > 0, got {z!r}")
    return z


def check_positive_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 1:
        raise ValueError(f"{name} must be positive, got {value}")
    return int(value)


def check_nonneg_int(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < 0:
        raise ValueError(f"{name} must be nonnegative, got {value}")
    return int(value)


def check_positive_real(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value}")
    return value


def check_int_vector(n, length=None, name="n"):
    """Return ``n`` as a tuple of Python ints, optionally of fixed length."""
    if isinstance(n, numbers.Integral) and not isinstance(n, bool):
        n = (n,)
    arr = np.asarray(n)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D integer vector")
    if arr.dtype.kind not in "iu":
        if arr.dtype.kind == "f" and np.all(arr == np.round(arr)):
            arr = arr.astype(np.int64)
        else:
            raise TypeError(f"{name} must contain integers, got dtype {arr.dtype}")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} must have length {length}, got {arr.size}")
    return tuple(int(v) for v in arr)


def check_complex_vector(x, length=None, name="x"):
    arr = np.atleast_1d(np.asarray(x, dtype=complex))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} must have length {length}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def check_complex_array(z, name="z"):
    """Return ``z`` as a finite complex ndarray (at least 1-D)."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr
