"""Dispersion laws of the two positive-energy branches and the series generator.

The (+) branch is gapless, ``omega_plus = c (sqrt(mu^2 + k^2) - mu)``; the (-)
branch carries a gap ``2 mu c``.  The first-order-in-time evolution of the
(+) branch is generated by ``i mu c sum_n a_n lap^n / mu^(2n)`` whose symbol
is ``-omega_plus``; truncating the sum gives a local operator of order 2N.
"""
from __future__ import annotations

import enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .units import NATURAL, PhysicalParams

N_EXACT_COEFFS = 64


class Branch(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, value) -> "Branch":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"branch must be 'plus' or 'minus', got {value!r}") from None


def _root(k2, params):
    return np.sqrt(params.mu**2 + k2)


def omega_plus_k2(k2, params: PhysicalParams = NATURAL):
    # c (sqrt(mu^2+k^2) - mu) without the cancellation at small k
    k2 = np.asarray(k2, dtype=float)
    return params.c * k2 / (_root(k2, params) + params.mu)


def omega_minus_k2(k2, params: PhysicalParams = NATURAL):
    k2 = np.asarray(k2, dtype=float)
    return params.c * (_root(k2, params) + params.mu)


def omega_branch(k, branch, params: PhysicalParams = NATURAL):
    """Angular frequency of a plane wave with wavenumber ``k`` on ``branch``.

    ``k`` may be a scalar, an array of scalars, or (for vectors) anything whose
    squared magnitude the caller has already reduced; the law is even in k.
    """
    branch = Branch.parse(branch)
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise DomainError("wavenumber must be finite")
    k2 = k * k
    out = omega_plus_k2(k2, params) if branch is Branch.PLUS else omega_minus_k2(k2, params)
    return float(out) if out.ndim == 0 else out


def group_velocity(k, params: PhysicalParams = NATURAL):
    """``d omega / dk = c k / sqrt(mu^2 + k^2)``, common to both branches."""
    k = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(k)):
        raise DomainError("wavenumber must be finite")
    out = params.c * k / _root(k * k, params)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=None)
def series_coeff(n: int) -> Fraction:
    """Exact coefficient ``a_n`` of ``1 - sqrt(1 + x) = sum_n a_n (-x)^n``.

    ``a_1 = 1/2`` and ``a_n = (2n-3)!! / (2n)!!`` for ``n >= 2``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"series index must be a positive integer, got {n!r}")
    n = int(n)
    if n == 1:
        return Fraction(1, 2)
    # a_n / a_{n-1} = (2n-3) / (2n)
    return series_coeff(n - 1) * Fraction(2 * n - 3, 2 * n)


# warm the exact table
SERIES_TABLE = tuple(series_coeff(n) for n in range(1, N_EXACT_COEFFS + 1))


def series_coeffs_float(order: int) -> np.ndarray:
    return np.array([float(series_coeff(n)) for n in range(1, int(order) + 1)])


def series_partial_sum(x, order: int):
    """``sum_{n=1}^{order} a_n (-x)^n`` evaluated by Horner's rule."""
    if int(order) != order or order < 1:
        raise DomainError(f"order must be a positive integer, got {order!r}")
    x = np.asarray(x, dtype=float)
    coeffs = series_coeffs_float(order)
    acc = np.zeros_like(x)
    for a in coeffs[::-1]:
        acc = (acc + a) * (-x)
    return float(acc) if acc.ndim == 0 else acc


def series_limit(x):
    """Closed form ``1 - sqrt(1 + x)`` written to avoid cancellation."""
    x = np.asarray(x, dtype=float)
    out = -x / (1.0 + np.sqrt(1.0 + x))
    return float(out) if out.ndim == 0 else out


def truncated_symbol(k2, order, params: PhysicalParams = NATURAL):
    """Order-N approximation of ``omega_plus`` from the series generator.

    ``-mu c sum_{n<=N} a_n (-k^2/mu^2)^n``; ``order=None`` sums every order
    (the closed form), which equals ``omega_plus`` for any k.
    """
    x = np.asarray(k2, dtype=float) / params.mu**2
    if order is None:
        s = series_limit(x)
    else:
        s = series_partial_sum(x, order)
    out = -params.mu * params.c * np.asarray(s)
    return float(out) if out.ndim == 0 else out


def schrodinger_symbol(k2, params: PhysicalParams = NATURAL):
    return params.hbar * np.asarray(k2, dtype=float) / (2.0 * params.m)


def dispersion_table(kmax: float, steps: int, params: PhysicalParams = NATURAL) -> np.ndarray:
    """Rows ``(k, omega_plus, omega_minus, v_group)`` for ``k = linspace(0, kmax, steps)``."""
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps!r}")
    if not (np.isfinite(kmax) and kmax >= 0):
        raise DomainError(f"kmax must be finite and >= 0, got {kmax!r}")
    k = np.linspace(0.0, float(kmax), int(steps))
    return np.column_stack(
        [
            k,
            omega_branch(k, Branch.PLUS, params),
            omega_branch(k, Branch.MINUS, params),
            group_velocity(k, params),
        ]
    )


DISPERSION_COLUMNS = ("k", "omega_plus", "omega_minus", "v_group")
