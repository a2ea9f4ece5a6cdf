"""Densities, currents and continuity residuals.

All spatial derivatives are spectral and all time derivatives come from the
mode amplitudes, so a continuity residual measures only series truncation.
Inputs that arrive in spectral representation are used as-is; this keeps
high-order Laplacians of band-limited states free of transform noise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import series_coeff, series_coeffs_float, series_limit
from .errors import DomainError, StateError
from .grid import SPECTRAL, ComplexField, SpectralGrid, divergence_real
from .units import NATURAL, PhysicalParams
from .wavefield import ModeAmplitudes, generalized_momentum, time_derivatives

IMAG_RTOL = 1e-12


def _as_real(z: np.ndarray, what: str, scale: float | None = None) -> np.ndarray:
    """Drop the imaginary part of a nominally real quantity after checking it."""
    if scale is None:
        scale = float(np.max(np.abs(z))) if z.size else 0.0
    imag = float(np.max(np.abs(z.imag))) if z.size else 0.0
    if imag > IMAG_RTOL * max(scale, np.finfo(float).tiny):
        raise StateError(f"{what}: imaginary residue {imag:.3e} exceeds {IMAG_RTOL:g} x scale {scale:.3e}")
    return np.ascontiguousarray(z.real)


def _phys(values: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return np.fft.ifftn(values, axes=tuple(range(grid.dim)), norm="ortho")


def _spec(f: ComplexField) -> np.ndarray:
    return f.spectral().values


def _grad_phys(spec: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return np.array([_phys(sym * spec, grid) for sym in grid.derivative_symbols])


def _lap_phys(spec: np.ndarray, grid: SpectralGrid, n: int = 1) -> np.ndarray:
    return _phys((-grid.k2) ** n * spec, grid)


def _generator_spec(spec: np.ndarray, grid: SpectralGrid, order, params: PhysicalParams) -> np.ndarray:
    """Spectral ``sum_{n<=N} a_n lap^n psi / mu^(2n)``; ``order=None`` sums every order."""
    x = grid.k2 / params.mu**2
    if order is None:
        sym = series_limit(x)
    else:
        if int(order) != order or order < 1:
            raise DomainError(f"order must be an integer >= 1, got {order!r}")
        sym = np.zeros_like(x)
        for a in series_coeffs_float(order)[::-1]:
            sym = (sym + a) * (-x)
    return sym * spec


# -- probability -----------------------------------------------------------


def probability_density(psi: ComplexField) -> np.ndarray:
    return np.abs(psi.physical().values) ** 2


def kgf_rho(phi: ComplexField, phi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``(i / 2 mu c)(phi* dphi/dt - phi dphi*/dt)``; real but not sign-definite."""
    p = phi.physical().values
    q = phi_dot.physical().values
    z = 1j / (2.0 * params.mu * params.c) * (np.conj(p) * q - p * np.conj(q))
    return _as_real(z, "kgf_rho")


def probability_current_term(psi: ComplexField, n: int, params: PhysicalParams = NATURAL) -> np.ndarray:
    """The order-``n`` flux ``j_n``, shape ``(dim, ...)``.

    ``j_n = -i c a_n / mu^(2n-1) sum_{alpha=1}^{n}
    [lap^{alpha-1} psi* grad lap^{n-alpha} psi - lap^{alpha-1} psi grad lap^{n-alpha} psi*]``
    """
    if int(n) != n or n < 1:
        raise DomainError(f"current order must be an integer >= 1, got {n!r}")
    n = int(n)
    grid = psi.grid
    spec = _spec(psi)
    laps = [_lap_phys(spec, grid, m) if m else _phys(spec, grid) for m in range(n)]
    grads = [_grad_phys((-grid.k2) ** m * spec, grid) for m in range(n)]
    acc = np.zeros((grid.dim,) + grid.shape, dtype=complex)
    for alpha in range(1, n + 1):
        lo, hi = laps[alpha - 1], grads[n - alpha]
        acc += np.conj(lo) * hi - lo * np.conj(hi)
    pref = -1j * params.c * float(series_coeff(n)) / params.mu ** (2 * n - 1)
    return _as_real(pref * acc, f"j_{n}")


def probability_current(psi: ComplexField, order: int, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``sum_{n<=order} j_n``; ``order=1`` is the non-relativistic flux."""
    if int(order) != order or order < 1:
        raise DomainError(f"order must be an integer >= 1, got {order!r}")
    return sum(probability_current_term(psi, n, params) for n in range(1, int(order) + 1))


def _require_plus(amps: ModeAmplitudes):
    if not amps.is_single_branch("plus"):
        raise DomainError("series currents are defined for (+) branch states only")


def continuity_residual(amps: ModeAmplitudes, order: int, t: float = 0.0) -> np.ndarray:
    """``d|psi|^2/dt + div sum_{n<=N} j_n`` for a (+) branch state.

    ``d|psi|^2/dt`` is exact (``psi_dot = -i w+ psi`` per mode), so the
    residual is the truncated tail of the current series.
    """
    _require_plus(amps)
    psi, psi_dot = time_derivatives(amps, t, order=1)
    return density_rate(psi, psi_dot) + divergence_real(probability_current(psi, order, amps.params), amps.grid)


def density_rate(psi: ComplexField, psi_dot: ComplexField) -> np.ndarray:
    return 2.0 * np.real(np.conj(psi.physical().values) * psi_dot.physical().values)


def noether_charge_density(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``|psi|^2 - (i / 2 mu c)(psi dpsi*/dt - psi* dpsi/dt)`` from the phase symmetry."""
    p = psi.physical().values
    q = psi_dot.physical().values
    z = np.abs(p) ** 2 - 1j / (2.0 * params.mu * params.c) * (p * np.conj(q) - np.conj(p) * q)
    return _as_real(z, "noether charge")


def noether_continuity_residual(amps: ModeAmplitudes, t: float = 0.0) -> np.ndarray:
    """Exact phase-symmetry continuity law; vanishes for any two-branch state."""
    psi, psi_dot, psi_ddot = time_derivatives(amps, t, order=2)
    params = amps.params
    p, q, r = (f.physical().values for f in (psi, psi_dot, psi_ddot))
    # d/dt of the charge density, using the exact second derivative
    dq = 2.0 * np.real(np.conj(p) * q) - 1j / (2.0 * params.mu * params.c) * (p * np.conj(r) - np.conj(p) * r)
    dq = _as_real(dq, "noether rate")
    return dq + divergence_real(probability_current_term(psi, 1, params), amps.grid)


# -- Lagrangian, energy ----------------------------------------------------


def lagrangian_density(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``(hbar^2/2m)[|psi_t|^2/c^2 - |grad psi|^2 + i(mu/c)(psi* psi_t - psi psi_t*)]``."""
    grid = psi.grid
    p = psi.physical().values
    q = psi_dot.physical().values
    g = _grad_phys(_spec(psi), grid)
    z = (
        np.abs(q) ** 2 / params.c**2
        - np.sum(np.abs(g) ** 2, axis=0)
        + 1j * params.mu / params.c * (np.conj(p) * q - p * np.conj(q))
    )
    return _as_real(params.hbar**2 / (2.0 * params.m) * z, "lagrangian")


def lagrangian_density_onshell(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL, order=None) -> np.ndarray:
    """Lagrangian of a (+) branch state with the phase term traded for the series.

    ``-(hbar^2/2m)[|grad psi|^2 + (psi* lap psi + psi lap psi*)/2]
    + (hbar^2/2m)[|psi_t|^2/c^2 - mu^2 sum_{n>=2} a_n/mu^(2n)(psi lap^n psi* + psi* lap^n psi)]``.
    With ``order=None`` the series is summed in closed form.
    """
    grid = psi.grid
    spec = _spec(psi)
    p = _phys(spec, grid)
    q = psi_dot.physical().values
    g = _grad_phys(spec, grid)
    lap = _lap_phys(spec, grid)
    # generator minus its n=1 term
    gen = _phys(_generator_spec(spec, grid, order, params), grid)
    gen_tail = gen - 0.5 / params.mu**2 * lap
    first = np.sum(np.abs(g) ** 2, axis=0) + 0.5 * (np.conj(p) * lap + p * np.conj(lap))
    second = np.abs(q) ** 2 / params.c**2 - params.mu**2 * (p * np.conj(gen_tail) + np.conj(p) * gen_tail)
    z = params.hbar**2 / (2.0 * params.m) * (second - first)
    return _as_real(z, "on-shell lagrangian")


def hamiltonian_density(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``(hbar^2/2m)(|psi_t|^2/c^2 + |grad psi|^2)``, pointwise non-negative."""
    q = psi_dot.physical().values
    g = _grad_phys(_spec(psi), psi.grid)
    return params.hbar**2 / (2.0 * params.m) * (np.abs(q) ** 2 / params.c**2 + np.sum(np.abs(g) ** 2, axis=0))


def energy_flux(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``-(hbar^2/2m)(psi_t grad psi* + psi_t* grad psi)``, valid for any state."""
    q = psi_dot.physical().values
    g = _grad_phys(_spec(psi), psi.grid)
    return -params.hbar**2 / params.m * np.real(q * np.conj(g))


def energy_flux_series(psi: ComplexField, params: PhysicalParams = NATURAL, order=None) -> np.ndarray:
    """Series flux of a (+) branch state,
    ``-i hbar c^2 sum_{n<=N} a_n/(2 mu^(2n)) (lap^n psi grad psi* - lap^n psi* grad psi)``.
    """
    grid = psi.grid
    spec = _spec(psi)
    g = _grad_phys(spec, grid)
    gen = _phys(_generator_spec(spec, grid, order, params), grid)
    z = -0.5j * params.hbar * params.c**2 * (gen * np.conj(g) - np.conj(gen) * g)
    return _as_real(z, "energy flux series")


def energy_flux_nonrelativistic(psi: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """Leading term ``-(i hbar^3/4 m^2)(lap psi grad psi* - lap psi* grad psi)``."""
    grid = psi.grid
    spec = _spec(psi)
    g = _grad_phys(spec, grid)
    lap = _lap_phys(spec, grid)
    z = -1j * params.hbar**3 / (4.0 * params.m**2) * (lap * np.conj(g) - np.conj(lap) * g)
    return _as_real(z, "non-relativistic energy flux")


def energy_rate(psi: ComplexField, psi_dot: ComplexField, psi_ddot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """Exact ``dH/dt`` from the first and second time derivatives."""
    grid = psi.grid
    q = psi_dot.physical().values
    r = psi_ddot.physical().values
    g = _grad_phys(_spec(psi), grid)
    gq = _grad_phys(_spec(psi_dot), grid)
    return params.hbar**2 / params.m * (
        np.real(np.conj(q) * r) / params.c**2 + np.sum(np.real(np.conj(g) * gq), axis=0)
    )


def energy_residual(amps: ModeAmplitudes, t: float = 0.0, order=None) -> np.ndarray:
    """``dH/dt + div j_E``.

    ``order=None`` uses the canonical flux (exact for any state); an integer
    uses the series flux truncated at that order and needs a (+) state.
    """
    psi, psi_dot, psi_ddot = time_derivatives(amps, t, order=2)
    if order is None:
        flux = energy_flux(psi, psi_dot, amps.params)
    else:
        _require_plus(amps)
        flux = energy_flux_series(psi, amps.params, order)
    return energy_rate(psi, psi_dot, psi_ddot, amps.params) + divergence_real(flux, amps.grid)


# -- momentum --------------------------------------------------------------


def momentum_density(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """Canonical ``p_i = -pi d_i psi - pi* d_i psi*`` with ``pi`` the generalized momentum."""
    pi = generalized_momentum(psi, psi_dot, params).values
    g = _grad_phys(_spec(psi), psi.grid)
    return -2.0 * np.real(pi * g)


def _p_series_pair(u: np.ndarray, v: np.ndarray, grid, params, order) -> np.ndarray:
    """Sesquilinear form whose diagonal ``(psi, psi)`` is the series momentum density."""
    uu = _phys(u, grid)
    gv = _grad_phys(v, grid)
    gen_u = _phys(_generator_spec(u, grid, order, params), grid)
    return params.hbar * (np.imag(np.conj(uu) * gv) - np.imag(gv * np.conj(gen_u)))


def momentum_density_series(psi: ComplexField, params: PhysicalParams = NATURAL, order=None) -> np.ndarray:
    """Non-relativistic term ``-(i hbar/2)(psi* grad psi - psi grad psi*)`` plus series corrections.

    Corrections are ``(i hbar/2) sum_{n<=N} a_n/mu^(2n)(grad psi lap^n psi* - grad psi* lap^n psi)``;
    for (+) branch states and ``order=None`` this equals :func:`momentum_density`.
    """
    spec = _spec(psi)
    return _p_series_pair(spec, spec, psi.grid, params, order)


def momentum_density_nonrelativistic(psi: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    spec = _spec(psi)
    p = _phys(spec, psi.grid)
    g = _grad_phys(spec, psi.grid)
    return params.hbar * np.imag(np.conj(p) * g)


def stress_tensor(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    """``sigma_ik = L delta_ik + (hbar^2/2m)(d_k psi* d_i psi + d_k psi d_i psi*)``, shape ``(dim, dim, ...)``."""
    grid = psi.grid
    lag = lagrangian_density(psi, psi_dot, params)
    g = _grad_phys(_spec(psi), grid)
    sigma = params.hbar**2 / params.m * np.real(g[:, None] * np.conj(g[None, :]))
    for i in range(grid.dim):
        sigma[i, i] += lag
    return sigma


def momentum_rate(psi, psi_dot, psi_ddot, params: PhysicalParams = NATURAL) -> np.ndarray:
    """Exact ``dp/dt`` for the canonical momentum density."""
    grid = psi.grid
    pref = params.hbar**2 / (2.0 * params.m * params.c**2)
    mc = params.mu * params.c
    pi = generalized_momentum(psi, psi_dot, params).values
    pi_dot = pref * (np.conj(psi_ddot.physical().values) + 1j * mc * np.conj(psi_dot.physical().values))
    g = _grad_phys(_spec(psi), grid)
    gq = _grad_phys(_spec(psi_dot), grid)
    return -2.0 * np.real(pi_dot * g + pi * gq)


def momentum_residual(amps: ModeAmplitudes, t: float = 0.0, order=None) -> np.ndarray:
    """``dp_i/dt + d_k sigma_ik``, shape ``(dim, ...)``.

    With an integer ``order`` the density is the truncated series form
    (a (+) state is required) while the stress stays exact.
    """
    grid, params = amps.grid, amps.params
    psi, psi_dot, psi_ddot = time_derivatives(amps, t, order=2)
    if order is None:
        rate = momentum_rate(psi, psi_dot, psi_ddot, params)
    else:
        _require_plus(amps)
        u, v = _spec(psi), _spec(psi_dot)
        rate = _p_series_pair(v, u, grid, params, order) + _p_series_pair(u, v, grid, params, order)
    sigma = stress_tensor(psi, psi_dot, params)
    div = np.array([divergence_real(sigma[i], grid) for i in range(grid.dim)])
    return rate + div


def momentum_observables(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL):
    """``(p, sigma, P_total)``: canonical density, stress tensor and integrated momentum."""
    p = momentum_density(psi, psi_dot, params)
    sigma = stress_tensor(psi, psi_dot, params)
    return p, sigma, integrate(p, psi.grid)


# -- totals ----------------------------------------------------------------


def integrate(density: np.ndarray, grid: SpectralGrid):
    """Box quadrature ``sum f dV`` over the trailing grid axes."""
    axes = tuple(range(density.ndim - grid.dim, density.ndim))
    out = np.sum(density, axis=axes) * grid.dV
    return float(out) if np.ndim(out) == 0 else out


def total_energy(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> float:
    return integrate(hamiltonian_density(psi, psi_dot, params), psi.grid)


def total_momentum(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL) -> np.ndarray:
    return np.atleast_1d(integrate(momentum_density(psi, psi_dot, params), psi.grid))


def energy_closed_form(amps: ModeAmplitudes) -> float:
    """``(hbar^2 / 2 m c^2) sum (w^2 + c^2 k^2)|psi(k)|^2 dVk`` over both branches.

    Uses the same Nyquist convention as the spectral gradient.
    """
    grid, params = amps.grid, amps.params
    wp, wm = amps.omegas()
    k2 = np.sum(np.where(grid.nyquist_mask, 0.0, grid.k) ** 2, axis=0)
    c2k2 = params.c**2 * k2
    dens = (wp**2 + c2k2) * np.abs(amps.psi_plus) ** 2 + (wm**2 + c2k2) * np.abs(amps.psi_minus) ** 2
    return float(params.hbar**2 / (2.0 * params.m * params.c**2) * np.sum(dens) * grid.dVk)


# -- report ----------------------------------------------------------------


@dataclass
class ConservationReport:
    order: int | None
    mode: str
    rows: list = field(default_factory=list)

    COLUMNS_BASE = ("t", "total_norm", "total_energy")
    COLUMNS_TAIL = ("max_continuity_residual", "max_energy_residual", "max_momentum_residual")

    def columns(self, dim: int) -> list:
        axes = "xyz"[:dim]
        return list(self.COLUMNS_BASE) + [f"total_momentum_{a}" for a in axes] + list(self.COLUMNS_TAIL)

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def drift(self, column: str, dim: int = 1) -> float:
        """Largest relative deviation of a column from its first value."""
        arr = self.as_array()
        col = arr[:, self.columns(dim).index(column)]
        ref = abs(col[0])
        scale = ref if ref > 0 else max(float(np.max(np.abs(col))), np.finfo(float).tiny)
        return float(np.max(np.abs(col - col[0])) / scale)

    def summary(self, dim: int = 1) -> dict:
        arr = self.as_array()
        cols = self.columns(dim)
        out = {
            "order": self.order,
            "mode": self.mode,
            "samples": len(self.rows),
            "norm_drift": self.drift("total_norm", dim),
            "energy_drift": self.drift("total_energy", dim),
        }
        for a in "xyz"[:dim]:
            name = f"total_momentum_{a}"
            col = arr[:, cols.index(name)]
            out[f"momentum_{a}_drift_abs"] = float(np.max(np.abs(col - col[0])))
        for name in self.COLUMNS_TAIL:
            out[name] = float(np.max(arr[:, cols.index(name)]))
        return out


def conservation_report(amps: ModeAmplitudes, t_final: float, steps: int, order: int = 3) -> ConservationReport:
    """Evolve exactly over ``steps`` equal intervals and tabulate totals and residuals.

    A (+) branch state is checked against the series currents truncated at
    ``order``; any other state against the exact canonical/Noether forms.
    """
    from .propagators import evolve_exact

    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps!r}")
    plus_only = amps.is_single_branch("plus")
    report = ConservationReport(order=order if plus_only else None, mode="series" if plus_only else "canonical")
    dt = t_final / steps
    state = amps
    for i in range(steps + 1):
        t = i * dt
        psi, psi_dot = time_derivatives(state, 0.0, order=1)
        norm = psi.norm2()
        energy = total_energy(psi, psi_dot, state.params)
        mom = total_momentum(psi, psi_dot, state.params)
        if plus_only:
            r_cont = continuity_residual(state, order)
            r_en = energy_residual(state, order=order)
            r_mom = momentum_residual(state, order=order)
        else:
            r_cont = noether_continuity_residual(state)
            r_en = energy_residual(state)
            r_mom = momentum_residual(state)
        report.rows.append(
            [t, norm, energy, *mom.tolist(), float(np.max(np.abs(r_cont))), float(np.max(np.abs(r_en))), float(np.max(np.abs(r_mom)))]
        )
        if i < steps:
            state = evolve_exact(state, dt)
    return report
