"""Initial states, the two-branch mode decomposition, and field reconstruction.

On the periodic box of volume V a solution is

    psi(x, t) = (2 pi)^(-d/2) sum_k dVk
                [psi_plus(k) e^{-i w+(k) t} - psi_minus(k) e^{+i w-(k) t}] e^{i k x}

so ``sum |psi_pm(k)|^2 dVk`` is the norm carried by each branch.  Both
amplitude arrays are keyed by the wavenumber of their ``e^{i k x}`` factor;
a (-) amplitude stored at key ``k`` describes a particle of momentum
``-hbar k``.  Amplitude arrays use the FFT bin layout of the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dispersion import Branch, omega_minus_k2, omega_plus_k2
from .errors import DomainError
from .grid import PHYSICAL, SPECTRAL, ComplexField, SpectralGrid
from .units import NATURAL, PhysicalParams


@dataclass(frozen=True)
class InitialData:
    """Field and its time derivative at ``t = 0``."""

    psi0: ComplexField
    psi_dot0: ComplexField

    def __post_init__(self):
        if self.psi0.grid != self.psi_dot0.grid:
            raise DomainError("psi0 and psi_dot0 must share one grid")

    @property
    def grid(self) -> SpectralGrid:
        return self.psi0.grid


@dataclass(frozen=True)
class ModeAmplitudes:
    grid: SpectralGrid
    params: PhysicalParams
    psi_plus: np.ndarray
    psi_minus: np.ndarray

    def norm(self, branch) -> float:
        branch = Branch.parse(branch)
        amps = self.psi_plus if branch is Branch.PLUS else self.psi_minus
        return float(np.sum(np.abs(amps) ** 2) * self.grid.dVk)

    def omegas(self):
        k2 = self.grid.k2
        return omega_plus_k2(k2, self.params), omega_minus_k2(k2, self.params)

    def is_single_branch(self, branch, rtol: float = 1e-12) -> bool:
        branch = Branch.parse(branch)
        other = Branch.MINUS if branch is Branch.PLUS else Branch.PLUS
        return self.norm(other) <= rtol * max(self.norm(branch), np.finfo(float).tiny)


def _amp_factor(grid: SpectralGrid) -> np.ndarray:
    """Multiplier taking unitary-DFT bins to continuum-normalized amplitudes."""
    scale = grid.volume / np.sqrt(grid.n_total) / (2.0 * np.pi) ** (grid.dim / 2.0)
    return scale * grid.shift_phase


def bins_to_amplitudes(spec: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return spec * _amp_factor(grid)


def amplitudes_to_bins(amps: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    return amps / _amp_factor(grid)


def rescale_weight(k2, params: PhysicalParams = NATURAL):
    """``(mu^2 + k^2)^(1/4) / sqrt(mu)``: takes psi amplitudes to a amplitudes."""
    return (params.mu**2 + np.asarray(k2, dtype=float)) ** 0.25 / np.sqrt(params.mu)


def _synthesize_dot(spec: np.ndarray, grid, branch, params) -> np.ndarray:
    if branch is Branch.PLUS:
        return -1j * omega_plus_k2(grid.k2, params) * spec
    return 1j * omega_minus_k2(grid.k2, params) * spec


def _initial_data(spec: np.ndarray, grid, branch, params) -> InitialData:
    dot = _synthesize_dot(spec, grid, branch, params)
    psi0 = ComplexField(grid, spec, SPECTRAL).to_physical()
    psi_dot0 = ComplexField(grid, dot, SPECTRAL).to_physical()
    return InitialData(psi0, psi_dot0)


def single_branch(psi0: ComplexField, branch, params: PhysicalParams = NATURAL) -> InitialData:
    """Initial data for ``psi0`` taken to lie entirely on ``branch``."""
    return _initial_data(psi0.spectral().values, psi0.grid, Branch.parse(branch), params)


def plane_wave(k, branch, grid: SpectralGrid, params: PhysicalParams = NATURAL) -> InitialData:
    """Unit-norm plane wave ``exp(i k x) / sqrt(V)`` on one branch.

    ``psi_dot0`` is ``-i w+ psi0`` for the (+) branch and ``+i w- psi0`` for (-).
    """
    branch = Branch.parse(branch)
    idx = grid.lattice_index(k)
    spec = np.zeros(grid.shape, dtype=complex)
    # unit norm: one bin of weight 1/sqrt(dV), carrying the box-origin phase
    spec[idx] = 1.0 / np.sqrt(grid.dV) / grid.shift_phase[idx]
    return _initial_data(spec, grid, branch, params)


def gaussian_packet(
    x0,
    k0,
    sigma: float,
    branch,
    grid: SpectralGrid,
    params: PhysicalParams = NATURAL,
    kmax: float | None = None,
) -> InitialData:
    """Unit-norm periodic Gaussian packet centred at ``x0`` with carrier ``k0``.

    The packet is built in k-space, ``exp(-sigma^2 |k - k0|^2 - i k.x0)``, so
    ``|psi|^2`` has positional standard deviation ``sigma`` per axis.  With
    ``kmax`` set, every mode with ``|k| > kmax`` is removed (hard band limit).
    """
    branch = Branch.parse(branch)
    if not (np.isfinite(sigma) and sigma > 0):
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (grid.dim,))
    k0 = np.broadcast_to(np.asarray(k0, dtype=float), (grid.dim,))
    k_nyq = np.pi / grid.h
    # spectral tail at the Nyquist edge must be below 1e-12 of the peak
    if np.any(sigma * (k_nyq - np.abs(k0)) < np.sqrt(np.log(1e12))):
        raise DomainError(
            f"packet with sigma={sigma} and k0={k0.tolist()} is not resolved by "
            f"grid spacing {grid.h}"
        )
    dk = grid.k - k0.reshape((grid.dim,) + (1,) * grid.dim)
    phase = np.tensordot(x0, grid.k, axes=1)
    amps = np.exp(-(sigma**2) * np.sum(dk**2, axis=0) - 1j * phase)
    if kmax is not None:
        amps[np.sqrt(grid.k2) > kmax] = 0.0
    spec = amplitudes_to_bins(amps, grid)
    total = np.sum(np.abs(spec) ** 2) * grid.dV
    if total == 0:
        raise DomainError("band limit removes the whole packet")
    spec /= np.sqrt(total)
    return _initial_data(spec, grid, branch, params)


def random_state(
    grid: SpectralGrid,
    rng: np.random.Generator,
    branch=None,
    kmax: float | None = None,
    params: PhysicalParams = NATURAL,
) -> InitialData:
    """Unit-norm random state.

    ``branch=None`` draws independent random ``psi0`` and ``psi_dot0``; a
    branch name gives a single-branch state.  Nyquist bins are always empty.
    """
    shape = grid.shape
    band = ~np.any(grid.nyquist_mask, axis=0)
    if kmax is not None:
        band &= np.sqrt(grid.k2) <= kmax

    def draw():
        v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return np.where(band, v, 0.0)

    spec = draw()
    spec /= np.sqrt(np.sum(np.abs(spec) ** 2) * grid.dV)
    if branch is not None:
        return _initial_data(spec, grid, Branch.parse(branch), params)
    dot = draw() * (params.c * params.mu)
    psi0 = ComplexField(grid, spec, SPECTRAL).to_physical()
    psi_dot0 = ComplexField(grid, dot, SPECTRAL).to_physical()
    return InitialData(psi0, psi_dot0)


def split(data: InitialData, params: PhysicalParams = NATURAL) -> ModeAmplitudes:
    """Decompose ``(psi0, psi_dot0)`` into (+) and (-) mode amplitudes.

    Per mode, ``psi = A + B`` and ``psi_dot = -i w+ A + i w- B``; the system
    has determinant ``i (w+ + w-) = 2 i c sqrt(mu^2 + k^2)`` and is never
    singular.  ``psi_plus = A`` and ``psi_minus = -B`` (in amplitude units).
    """
    grid = data.grid
    p = data.psi0.spectral().values
    q = data.psi_dot0.spectral().values
    wp = omega_plus_k2(grid.k2, params)
    wm = omega_minus_k2(grid.k2, params)
    det = 1j * (wp + wm)
    a = (1j * wm * p - q) / det
    b = (q + 1j * wp * p) / det
    return ModeAmplitudes(grid, params, bins_to_amplitudes(a, grid), -bins_to_amplitudes(b, grid))


def mode_bins(amps: ModeAmplitudes, t: float = 0.0):
    """Per-bin ``A e^{-i w+ t}`` and ``B e^{+i w- t}`` (unitary-DFT units)."""
    wp, wm = amps.omegas()
    a = amplitudes_to_bins(amps.psi_plus, amps.grid) * np.exp(-1j * wp * t)
    b = -amplitudes_to_bins(amps.psi_minus, amps.grid) * np.exp(1j * wm * t)
    return a, b


def time_derivatives(amps: ModeAmplitudes, t: float = 0.0, order: int = 2):
    """``[psi, d psi/dt, d^2 psi/dt^2, ...]`` at time ``t``.

    Derivatives are synthesized exactly per mode, never by differencing, and
    returned in spectral representation.
    """
    wp, wm = amps.omegas()
    a, b = mode_bins(amps, t)
    out = []
    for j in range(order + 1):
        spec = (-1j * wp) ** j * a + (1j * wm) ** j * b
        out.append(ComplexField(amps.grid, spec, SPECTRAL))
    return out


def generalized_momentum(psi: ComplexField, psi_dot: ComplexField, params: PhysicalParams = NATURAL):
    """``pi = (hbar^2 / 2 m c^2) (d psi*/dt + i mu c psi*)`` pointwise."""
    pref = params.hbar**2 / (2.0 * params.m * params.c**2)
    values = pref * (np.conj(psi_dot.physical().values) + 1j * params.mu * params.c * np.conj(psi.physical().values))
    return ComplexField(psi.grid, values, PHYSICAL)


def generalized_momentum_from_modes(amps: ModeAmplitudes, t: float = 0.0) -> ComplexField:
    """The same ``pi`` summed directly over modes with the ``sqrt(mu^2+k^2)/mu`` weight."""
    grid, params = amps.grid, amps.params
    wp, wm = amps.omegas()
    weight = np.sqrt(params.mu**2 + grid.k2) / params.mu
    a = amplitudes_to_bins(amps.psi_plus, grid)
    m = amplitudes_to_bins(amps.psi_minus, grid)
    # coefficient of exp(+i k x) in pi is built from the amplitudes at -k
    conj_coeffs = weight * (np.conj(a) * np.exp(1j * wp * t) + np.conj(m) * np.exp(-1j * wm * t))
    spec = 0.5j * params.hbar * _negate_k(conj_coeffs)
    return ComplexField(grid, spec, SPECTRAL).to_physical()


def _negate_k(arr: np.ndarray) -> np.ndarray:
    """Re-index a bin array from ``k`` to ``-k`` (Nyquist maps to itself)."""
    out = arr
    for axis in range(arr.ndim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return out


def reconstruct(amps: ModeAmplitudes, t: float = 0.0):
    """Field ``psi`` and generalized momentum ``pi`` at time ``t``."""
    psi, psi_dot = time_derivatives(amps, t, order=1)
    return psi.to_physical(), generalized_momentum(psi, psi_dot, amps.params)


def initial_data_of(amps: ModeAmplitudes, t: float = 0.0) -> InitialData:
    psi, psi_dot = time_derivatives(amps, t, order=1)
    return InitialData(psi.to_physical(), psi_dot.to_physical())


def to_a_amplitudes(amps: ModeAmplitudes, params: PhysicalParams | None = None):
    """Rescaled amplitudes ``a = (mu^2+k^2)^(1/4)/sqrt(mu) * psi`` for both branches.

    With these, the total energy is ``sum hbar w |a|^2 dVk`` and the total
    momentum ``sum hbar k |a|^2 dVk`` (with ``-k`` for the (-) branch keys).
    """
    params = params or amps.params
    w = rescale_weight(amps.grid.k2, params)
    return w * amps.psi_plus, w * amps.psi_minus


def energy_from_modes(amps: ModeAmplitudes) -> float:
    a_plus, a_minus = to_a_amplitudes(amps)
    wp, wm = amps.omegas()
    hb = amps.params.hbar
    return float(np.sum(hb * wp * np.abs(a_plus) ** 2 + hb * wm * np.abs(a_minus) ** 2) * amps.grid.dVk)


def momentum_from_modes(amps: ModeAmplitudes) -> np.ndarray:
    a_plus, a_minus = to_a_amplitudes(amps)
    hb = amps.params.hbar
    weight = np.abs(a_plus) ** 2 - np.abs(a_minus) ** 2
    k = np.where(amps.grid.nyquist_mask, 0.0, amps.grid.k)
    axes = tuple(range(1, amps.grid.dim + 1))
    return hb * np.sum(k * weight, axis=axes) * amps.grid.dVk


def with_amplitudes(amps: ModeAmplitudes, psi_plus=None, psi_minus=None) -> ModeAmplitudes:
    return replace(
        amps,
        psi_plus=amps.psi_plus if psi_plus is None else psi_plus,
        psi_minus=amps.psi_minus if psi_minus is None else psi_minus,
    )


def reflect(field: ComplexField) -> ComplexField:
    """Spatial inversion ``x -> -x`` on the centred periodic grid."""
    phys = field.physical()
    out = phys.values
    for axis in range(field.grid.dim):
        out = np.roll(np.flip(out, axis=axis), 1, axis=axis)
    return ComplexField(field.grid, out, PHYSICAL).in_representation(field.representation)
