"""Scalar backend selection: IEEE doubles or mpmath extended precision.

Channel constructors pick the backend from the type of their parameters, so
passing ``mpmath.mpf`` values yields object arrays of ``mpmath.mpc`` entries
that carry the working precision of the surrounding ``mpmath.workdps``
context.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np

MP_TYPES = (mpmath.mpf, mpmath.mpc)


def is_mp(*values) -> bool:
    return any(isinstance(v, MP_TYPES) for v in values)


class FloatBackend:
    name = "double"
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)
    sqrt = staticmethod(math.sqrt)

    @staticmethod
    def scalar(x):
        return float(x)

    @staticmethod
    def zeros(shape):
        return np.zeros(shape, dtype=complex)

    @staticmethod
    def eye(n):
        return np.eye(n, dtype=complex)

    @staticmethod
    def asarray(a):
        return np.array(a, dtype=complex)


class MPBackend:
    name = "mpmath"
    sin = staticmethod(mpmath.sin)
    cos = staticmethod(mpmath.cos)
    sqrt = staticmethod(mpmath.sqrt)

    @staticmethod
    def scalar(x):
        return mpmath.mpf(x)

    @staticmethod
    def zeros(shape):
        return np.full(shape, mpmath.mpc(0), dtype=object)

    @staticmethod
    def eye(n):
        m = MPBackend.zeros((n, n))
        for i in range(n):
            m[i, i] = mpmath.mpc(1)
        return m

    @staticmethod
    def asarray(a):
        a = np.asarray(a)
        out = np.empty(a.shape, dtype=object)
        for idx, x in np.ndenumerate(a):
            out[idx] = x if isinstance(x, mpmath.mpc) else mpmath.mpc(x)
        return out


def backend_for(*values):
    """Backend matching the parameter types; doubles when none are mpmath."""
    return MPBackend if is_mp(*values) else FloatBackend


def to_float(x) -> float:
    """Real part of a scalar as a Python float."""
    return float(x.real) if hasattr(x, "real") else float(x)
