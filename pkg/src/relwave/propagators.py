"""Time evolution: exact two-branch phases, truncated series, Schrodinger, KGF map."""
from __future__ import annotations

import numpy as np

from .dispersion import omega_minus_k2, omega_plus_k2, schrodinger_symbol, series_coeffs_float, truncated_symbol
from .errors import DomainError
from .grid import ComplexField, apply_symbol, laplacian_power
from .units import NATURAL, PhysicalParams
from .wavefield import ModeAmplitudes, with_amplitudes

TO_PHI = "to_phi"
TO_PSI = "to_psi"


def evolve_exact(amps: ModeAmplitudes, dt: float) -> ModeAmplitudes:
    """Advance by ``dt`` (negative allowed): (+) modes pick up ``e^{-i w+ dt}``, (-) ``e^{+i w- dt}``."""
    wp, wm = amps.omegas()
    return with_amplitudes(
        amps,
        psi_plus=amps.psi_plus * np.exp(-1j * wp * dt),
        psi_minus=amps.psi_minus * np.exp(1j * wm * dt),
    )


def evolve_truncated(field: ComplexField, dt: float, order: int, params: PhysicalParams = NATURAL) -> ComplexField:
    """Evolve a (+) branch field with the order-``N`` series generator.

    Applied as the exact exponential of the truncated (diagonal) generator,
    so the only error relative to :func:`evolve_exact` is series truncation.
    Accuracy is only meaningful for fields band-limited below ``mu``.
    """
    if order is None or int(order) != order or order < 1:
        raise DomainError(f"order must be an integer >= 1, got {order!r}")
    omega = truncated_symbol(field.grid.k2, order, params)
    return apply_symbol(field, np.exp(-1j * omega * dt))


def evolve_plus(field: ComplexField, dt: float, params: PhysicalParams = NATURAL) -> ComplexField:
    """Exact (+) branch propagation of a field assumed to be single-branch."""
    return apply_symbol(field, np.exp(-1j * omega_plus_k2(field.grid.k2, params) * dt))


def schrodinger_reference(field: ComplexField, dt: float, params: PhysicalParams = NATURAL) -> ComplexField:
    """Free Schrodinger propagator, phase ``e^{-i hbar k^2 dt / 2m}`` per mode."""
    return apply_symbol(field, np.exp(-1j * schrodinger_symbol(field.grid.k2, params) * dt))


def kgf_phase_map(psi: ComplexField, t: float, params: PhysicalParams = NATURAL, direction: str = TO_PHI) -> ComplexField:
    """``phi = psi e^{-i mu c t}`` (``to_phi``) or its inverse (``to_psi``)."""
    if direction == TO_PHI:
        factor = np.exp(-1j * params.mu * params.c * t)
    elif direction == TO_PSI:
        factor = np.exp(1j * params.mu * params.c * t)
    else:
        raise DomainError(f"direction must be {TO_PHI!r} or {TO_PSI!r}, got {direction!r}")
    return psi * factor


def kgf_time_derivative(psi: ComplexField, psi_dot: ComplexField, t: float, params: PhysicalParams = NATURAL) -> ComplexField:
    """``d phi/dt = (d psi/dt - i mu c psi) e^{-i mu c t}``."""
    mc = params.mu * params.c
    values = (psi_dot.physical().values - 1j * mc * psi.physical().values) * np.exp(-1j * mc * t)
    return ComplexField(psi.grid, values)


def series_rhs(field: ComplexField, order: int, params: PhysicalParams = NATURAL) -> ComplexField:
    """``i mu c sum_{n<=N} a_n lap^n psi / mu^(2n)`` built from repeated Laplacians."""
    if int(order) != order or order < 1:
        raise DomainError(f"order must be an integer >= 1, got {order!r}")
    coeffs = series_coeffs_float(order)
    spec = field.spectral()
    acc = np.zeros(field.grid.shape, dtype=complex)
    term = spec
    for n, a in enumerate(coeffs, start=1):
        term = laplacian_power(term, 1)
        acc += a / params.mu ** (2 * n) * term.values
    out = ComplexField(field.grid, 1j * params.mu * params.c * acc, "spectral", False)
    return out.in_representation(field.representation)


def rk4_truncated(field: ComplexField, dt: float, steps: int, order: int, params: PhysicalParams = NATURAL) -> ComplexField:
    """Classical RK4 on the series equation; for cross-validation only."""
    h = dt / steps
    rep = field.representation
    y = field.spectral()
    for _ in range(int(steps)):
        k1 = series_rhs(y, order, params)
        k2 = series_rhs(y + k1 * (h / 2), order, params)
        k3 = series_rhs(y + k2 * (h / 2), order, params)
        k4 = series_rhs(y + k3 * h, order, params)
        y = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    return y.in_representation(rep)


def frequency_content(amps: ModeAmplitudes):
    """The angular frequencies a state oscillates at, per mode: ``-w+`` and ``+w-``.

    Signed as the exponent ``e^{i nu t}`` appears in the solution.
    """
    wp = omega_plus_k2(amps.grid.k2, amps.params)
    wm = omega_minus_k2(amps.grid.k2, amps.params)
    return -wp, wm
