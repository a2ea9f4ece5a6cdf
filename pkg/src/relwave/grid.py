"""Periodic sampling grids and spectrally differentiated complex fields.

Fields live on a box ``[-box/2, box/2)**dim`` sampled with ``n`` points per
axis.  The spectral representation is the unitary discrete Fourier
transform (``norm="ortho"``), so ``sum |psi|**2`` is the same number in both
representations and ``sum |psi(x)|**2 * dV`` is the physical norm.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, StateError

PHYSICAL = "physical"
SPECTRAL = "spectral"
_REPRESENTATIONS = (PHYSICAL, SPECTRAL)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid with its wavenumber lattice.

    Parameters
    ----------
    dim : int
        Number of spatial dimensions (1, 2 or 3).
    n : int
        Even number of samples per axis.
    box : float
        Side length of the periodic box.
    """

    dim: int = 1
    n: int = 256
    box: float = 20.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dim must be 1, 2 or 3, got {self.dim!r}")
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise DomainError(f"n must be an even integer >= 2, got {self.n!r}")
        if not (np.isfinite(self.box) and self.box > 0):
            raise DomainError(f"box must be finite and > 0, got {self.box!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box", float(self.box))

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def n_total(self) -> int:
        return self.n**self.dim

    @property
    def h(self) -> float:
        return self.box / self.n

    @property
    def volume(self) -> float:
        return self.box**self.dim

    @property
    def dV(self) -> float:
        return self.h**self.dim

    @property
    def dVk(self) -> float:
        return (2.0 * np.pi / self.box) ** self.dim

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.box

    @cached_property
    def x_axis(self) -> np.ndarray:
        return -0.5 * self.box + self.h * np.arange(self.n)

    @cached_property
    def k_axis(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def x(self) -> np.ndarray:
        """Coordinates, shape ``(dim, n, ..., n)``."""
        return np.array(np.meshgrid(*([self.x_axis] * self.dim), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Wavenumber vectors, shape ``(dim, n, ..., n)``."""
        return np.array(np.meshgrid(*([self.k_axis] * self.dim), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask per axis, true where that axis sits on the Nyquist index."""
        idx = np.indices(self.shape)
        return idx == self.n // 2

    @cached_property
    def derivative_symbols(self) -> np.ndarray:
        """``i k_j`` per axis with the Nyquist entries zeroed."""
        return np.where(self.nyquist_mask, 0.0, 1j * self.k)

    @cached_property
    def shift_phase(self) -> np.ndarray:
        """``exp(-i k . x_first)``, relating DFT bins to ``exp(i k x)`` amplitudes."""
        return np.exp(-1j * self.k.sum(axis=0) * self.x_axis[0])

    def lattice_index(self, k) -> tuple:
        """Array index of wavenumber vector ``k``; raises if ``k`` is off-lattice."""
        kv = np.atleast_1d(np.asarray(k, dtype=float))
        if kv.shape != (self.dim,):
            raise DomainError(f"wavenumber must have {self.dim} components, got {k!r}")
        out = []
        for comp in kv:
            m = comp / self.dk
            mi = int(round(m))
            if abs(m - mi) > 1e-9 * max(1.0, abs(m)) or not (-self.n // 2 <= mi < self.n // 2):
                raise DomainError(f"wavenumber {comp!r} is not on the grid lattice")
            out.append(mi % self.n)
        return tuple(out)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "n": self.n, "box_length": self.box}


@dataclass
class ComplexField:
    """Complex samples on a grid, in physical or spectral representation."""

    grid: SpectralGrid
    values: np.ndarray
    representation: str = PHYSICAL
    _check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.representation not in _REPRESENTATIONS:
            raise StateError(f"unknown representation {self.representation!r}")
        self.values = np.asarray(self.values, dtype=complex)
        if self._check and self.values.shape != self.grid.shape:
            raise DomainError(
                f"values of shape {self.values.shape} do not match grid {self.grid.shape}"
            )

    def _new(self, values, representation=None):
        return ComplexField(self.grid, values, representation or self.representation, False)

    def to_spectral(self) -> "ComplexField":
        return transform(self, SPECTRAL)

    def to_physical(self) -> "ComplexField":
        return transform(self, PHYSICAL)

    def spectral(self) -> "ComplexField":
        """This field in spectral form, transforming only if needed."""
        return self if self.representation == SPECTRAL else transform(self, SPECTRAL)

    def physical(self) -> "ComplexField":
        return self if self.representation == PHYSICAL else transform(self, PHYSICAL)

    def in_representation(self, representation: str) -> "ComplexField":
        return self.spectral() if representation == SPECTRAL else self.physical()

    def conj(self) -> "ComplexField":
        return self.physical()._new(np.conj(self.physical().values))

    def norm2(self) -> float:
        """``sum |psi|**2 dV`` (identical in either representation)."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dV)

    def __add__(self, other):
        if isinstance(other, ComplexField):
            other = other.in_representation(self.representation)
            return self._new(self.values + other.values)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, ComplexField):
            other = other.in_representation(self.representation)
            return self._new(self.values - other.values)
        return NotImplemented

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return self._new(self.values * scalar)
        return NotImplemented

    __rmul__ = __mul__


def transform(field: ComplexField, direction: str) -> ComplexField:
    """Unitary DFT between representations.

    ``direction`` is the target representation and must differ from the
    field's current one.
    """
    if direction not in _REPRESENTATIONS:
        raise StateError(f"unknown direction {direction!r}")
    if field.representation == direction:
        raise StateError(f"field is already in {direction} representation")
    axes = tuple(range(field.grid.dim))
    if direction == SPECTRAL:
        values = np.fft.fftn(field.values, axes=axes, norm="ortho")
    else:
        values = np.fft.ifftn(field.values, axes=axes, norm="ortho")
    return ComplexField(field.grid, values, direction, False)


def apply_symbol(field: ComplexField, symbol) -> ComplexField:
    """Multiply every spectral coefficient by ``symbol``; keeps the input representation."""
    rep = field.representation
    spec = field.spectral()
    out = ComplexField(field.grid, spec.values * symbol, SPECTRAL, False)
    return out.in_representation(rep)


def laplacian_power(field: ComplexField, n: int) -> ComplexField:
    """``lap**n`` applied spectrally as ``(-k**2)**n``; ``n = 0`` is the identity."""
    if int(n) != n or n < 0:
        raise DomainError(f"power must be a non-negative integer, got {n!r}")
    if n == 0:
        return field._new(field.values.copy())
    return apply_symbol(field, (-field.grid.k2) ** int(n))


def gradient(field: ComplexField) -> list:
    """Spectral gradient, one field per axis, Nyquist derivative zeroed."""
    return [apply_symbol(field, sym) for sym in field.grid.derivative_symbols]


def divergence(components) -> ComplexField:
    """Spectral divergence of a vector field given as a sequence of per-axis fields."""
    components = list(components)
    grid = components[0].grid
    if len(components) != grid.dim:
        raise DomainError(f"expected {grid.dim} components, got {len(components)}")
    rep = components[0].representation
    total = np.zeros(grid.shape, dtype=complex)
    for sym, comp in zip(grid.derivative_symbols, components):
        total += sym * comp.spectral().values
    return ComplexField(grid, total, SPECTRAL, False).in_representation(rep)


def divergence_real(flux: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Spectral divergence of a real vector field stored as ``(dim, n, ...)``."""
    axes = tuple(range(1, grid.dim + 1))
    spec = np.fft.fftn(flux, axes=axes, norm="ortho")
    div = np.sum(grid.derivative_symbols * spec, axis=0)
    return np.fft.ifftn(div, norm="ortho").real


def random_field(grid: SpectralGrid, rng: np.random.Generator, *, keep_nyquist=True) -> ComplexField:
    """Complex white-noise field; optionally with every Nyquist coefficient removed."""
    values = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    field = ComplexField(grid, values)
    if keep_nyquist:
        return field
    spec = field.to_spectral()
    spec.values[np.any(grid.nyquist_mask, axis=0)] = 0.0
    return spec.to_physical()
