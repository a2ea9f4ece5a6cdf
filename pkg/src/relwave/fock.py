"""Finite-mode, truncated-occupation second quantization.

Each lattice mode ``k`` carries two bosonic species: ``a`` for (+) particles
and ``b`` for (-) particles.  Continuum delta functions become Kronecker
deltas on the box, so ``[a_k, a_k'^+] = delta_kk'`` and integrals over k are
plain sums.  Operators are stored as ``scipy.sparse`` CSR matrices; every
ladder operator has at most one non-zero per column, which is what makes the
integer-exact commutator check possible.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .dispersion import omega_minus_k2, omega_plus_k2
from .errors import DomainError, ResourceError
from .grid import SpectralGrid
from .units import NATURAL, PhysicalParams

DEFAULT_MAX_DIM = 4096
SPECIES = ("a", "b")


def max_fock_dim() -> int:
    raw = os.environ.get("RELWAVE_MAX_FOCK_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise DomainError(f"RELWAVE_MAX_FOCK_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise DomainError(f"RELWAVE_MAX_FOCK_DIM must be >= 1, got {value}")
    return value


def _lowering(levels: int, squared: bool = False) -> sp.csr_matrix:
    n = np.arange(1, levels)
    vals = n.astype(np.int64) if squared else np.sqrt(n)
    return sp.diags(vals, 1, shape=(levels, levels), format="csr")


@dataclass(frozen=True)
class FockSpace:
    """Truncated Fock space over ``M`` modes and two species.

    ``modes`` has shape ``(M, d)``.  ``box`` (side length) is needed only for
    the field operators.
    """

    modes: np.ndarray
    n_max: int
    box: float | None = None
    cap: int = field(default=DEFAULT_MAX_DIM, compare=False)

    @property
    def M(self) -> int:
        return self.modes.shape[0]

    @property
    def spatial_dim(self) -> int:
        return self.modes.shape[1]

    @property
    def levels(self) -> int:
        return self.n_max + 1

    @property
    def n_factors(self) -> int:
        return 2 * self.M

    @property
    def dim(self) -> int:
        return self.levels**self.n_factors

    @property
    def volume(self) -> float:
        if self.box is None:
            raise DomainError("this Fock space has no box length")
        return self.box**self.spatial_dim

    @cached_property
    def basis(self) -> np.ndarray:
        """Occupation tuples, shape ``(dim, 2M)``; columns ``a_0..a_{M-1}, b_0..b_{M-1}``."""
        return np.array(list(itertools.product(range(self.levels), repeat=self.n_factors)), dtype=np.int64)

    @cached_property
    def sub_truncation(self) -> np.ndarray:
        """Indices of basis states with every occupation below ``n_max``."""
        return np.flatnonzero(np.all(self.basis < self.n_max, axis=1))

    def factor(self, species: str, mode: int) -> int:
        if species not in SPECIES:
            raise DomainError(f"species must be 'a' or 'b', got {species!r}")
        if not 0 <= mode < self.M:
            raise DomainError(f"mode index {mode} out of range 0..{self.M - 1}")
        return mode if species == "a" else self.M + mode

    def _embed(self, single, f: int, dtype) -> sp.csr_matrix:
        left = sp.identity(self.levels**f, dtype=dtype, format="csr")
        right = sp.identity(self.levels ** (self.n_factors - f - 1), dtype=dtype, format="csr")
        return sp.kron(sp.kron(left, single), right, format="csr")

    def lower(self, species: str, mode: int) -> sp.csr_matrix:
        """Annihilation operator ``a_k`` or ``b_k``."""
        return self._lower_cached(self.factor(species, mode))

    def raise_(self, species: str, mode: int) -> sp.csr_matrix:
        return self.lower(species, mode).T.tocsr()

    def _lower_cached(self, f: int) -> sp.csr_matrix:
        cache = self.__dict__.setdefault("_ladder_cache", {})
        if f not in cache:
            cache[f] = self._embed(_lowering(self.levels), f, float)
        return cache[f]

    def lower_squared(self, species: str, mode: int) -> sp.csr_matrix:
        """Entrywise square of the annihilation operator, in exact integers."""
        f = self.factor(species, mode)
        return self._embed(_lowering(self.levels, squared=True), f, np.int64)

    def number(self, species: str, mode: int) -> sp.csr_matrix:
        occ = self.basis[:, self.factor(species, mode)]
        return sp.diags(occ.astype(float), 0, format="csr")

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def k2(self) -> np.ndarray:
        return np.sum(self.modes**2, axis=1)


def make_fock(modes, n_max: int, box: float | None = None, cap: int | None = None) -> FockSpace:
    """Build a truncated Fock space; raises :class:`ResourceError` above the cap.

    ``modes`` is a list of wavenumbers (scalars for 1-D, vectors otherwise).
    The cap defaults to ``RELWAVE_MAX_FOCK_DIM`` or 4096.
    """
    arr = np.asarray(modes, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DomainError("modes must be a non-empty list of wavenumbers")
    if len({tuple(np.round(m, 12)) for m in arr}) != len(arr):
        raise DomainError("modes must be distinct")
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    if box is not None and not (np.isfinite(box) and box > 0):
        raise DomainError(f"box must be > 0, got {box!r}")
    cap = max_fock_dim() if cap is None else int(cap)
    dim = (int(n_max) + 1) ** (2 * arr.shape[0])
    if dim > cap:
        raise ResourceError(f"Fock dimension {dim} exceeds cap {cap}")
    return FockSpace(arr, int(n_max), None if box is None else float(box), cap)


def fock_from_grid(grid: SpectralGrid, n_max: int, cap: int | None = None) -> FockSpace:
    """Fock space over every lattice mode of ``grid`` (a complete lattice)."""
    modes = grid.k.reshape(grid.dim, -1).T
    return make_fock(modes, n_max, grid.box, cap)


def lattice_grid(space: FockSpace) -> SpectralGrid | None:
    """The grid whose full lattice the space's modes form, if any."""
    if space.box is None:
        return None
    d = space.spatial_dim
    n = round(space.M ** (1.0 / d))
    if n**d != space.M or n % 2 or d > 3:
        return None
    grid = SpectralGrid(d, n, space.box)
    want = {tuple(np.round(v / grid.dk).astype(int)) for v in grid.k.reshape(d, -1).T}
    have = {tuple(np.round(v / grid.dk).astype(int)) for v in space.modes}
    if want != have or not np.allclose(space.modes / grid.dk, np.round(space.modes / grid.dk), atol=1e-9):
        return None
    return grid


# -- commutators -------------------------------------------------------------


def _restrict(mat, idx):
    return mat[idx][:, idx]


def _exact_commutator_deviation(x_sq, y_sq, expected: float, idx) -> float:
    """Max ``|sqrt(p) - sqrt(q) - expected*I|`` over a sub-block, in exact integers where possible.

    ``x_sq``/``y_sq`` are entrywise squares of non-negative monomial matrices,
    so ``(X Y)`` has entries ``sqrt`` of the entries of ``x_sq @ y_sq``.
    """
    pq = _restrict((x_sq @ y_sq).tocsr(), idx).todok()
    qp = _restrict((y_sq @ x_sq).tocsr(), idx).todok()
    keys = set(pq.keys()) | set(qp.keys())
    n = len(idx)
    for i in range(n):
        keys.add((i, i))
    worst = 0.0
    for key in keys:
        p, q = int(pq.get(key, 0)), int(qp.get(key, 0))
        target = expected if key[0] == key[1] else 0.0
        if p == q:
            dev = abs(target)
        else:
            rp, rq = math.isqrt(p), math.isqrt(q)
            if rp * rp == p and rq * rq == q:
                dev = abs((rp - rq) - target)
            else:
                dev = abs(math.sqrt(p) - math.sqrt(q) - target)
        worst = max(worst, dev)
    return worst


def commutator_check(space: FockSpace) -> dict:
    """Check the Bose algebra of all ladder operators.

    ``[X_k, Y_k'^+] = delta I`` is checked on the sub-truncation block (all
    occupations below ``n_max``); ``[X_k, Y_k']`` over the whole space.  The
    ``exact`` entries use integer arithmetic and are 0.0 when the identity
    holds exactly; the ``float`` entries come from dense floating products.
    """
    idx = space.sub_truncation
    full = np.arange(space.dim)
    labels = [(s, m) for s in SPECIES for m in range(space.M)]
    squares = {lab: space.lower_squared(*lab) for lab in labels}
    exact_ccr = exact_cross = 0.0
    float_ccr = float_cross = 0.0
    pairs = []
    for x, y in itertools.product(labels, repeat=2):
        expected = 1.0 if x == y else 0.0
        # [X, Y^+]
        dev = _exact_commutator_deviation(squares[x], squares[y].T.tocsr(), expected, idx)
        X, Yd = space.lower(*x), space.raise_(*y)
        comm = (X @ Yd - Yd @ X).toarray()[np.ix_(idx, idx)]
        fdev = float(np.max(np.abs(comm - expected * np.eye(len(idx)))))
        # [X, Y]
        dev0 = _exact_commutator_deviation(squares[x], squares[y], 0.0, full)
        Y = space.lower(*y)
        f0 = float(np.max(np.abs((X @ Y - Y @ X).toarray()))) if space.dim else 0.0
        if x == y:
            exact_ccr, float_ccr = max(exact_ccr, dev), max(float_ccr, fdev)
        else:
            exact_cross, float_cross = max(exact_cross, dev), max(float_cross, fdev)
        exact_cross = max(exact_cross, dev0)
        float_cross = max(float_cross, f0)
        pairs.append({"x": f"{x[0]}{x[1]}", "y": f"{y[0]}{y[1]}", "dagger_exact": dev, "plain_exact": dev0})
    # truncation edge: [a, a^+] = -n_max there
    edge = int(np.flatnonzero(space.basis[:, 0] == space.n_max)[0])
    a0 = space.lower("a", 0)
    edge_value = float((a0 @ a0.T - a0.T @ a0)[edge, edge])
    return {
        "sub_truncation_states": int(len(idx)),
        "ccr_exact_max_deviation": exact_ccr,
        "cross_exact_max_deviation": exact_cross,
        "ccr_float_max_deviation": float_ccr,
        "cross_float_max_deviation": float_cross,
        "truncation_edge_commutator": edge_value,
        "pairs": pairs,
    }


def b_redefinition_check(space: FockSpace) -> float:
    """``a^(-)(-k) = b_k^+`` has ``[a^(-), a^(-)+] = -I`` on the sub-truncation block.

    Returns the max deviation from ``-I``.
    """
    idx = space.sub_truncation
    worst = 0.0
    for m in range(space.M):
        am = space.raise_("b", m)
        comm = (am @ am.T - am.T @ am).toarray()[np.ix_(idx, idx)]
        worst = max(worst, float(np.max(np.abs(comm + np.eye(len(idx))))))
    return worst


# -- generators --------------------------------------------------------------


@dataclass
class Generators:
    H: sp.csr_matrix
    P: list
    N_plus: sp.csr_matrix
    N_minus: sp.csr_matrix
    H_symmetrized: sp.csr_matrix
    zero_point_energy: float


def _mode_frequencies(space: FockSpace, params: PhysicalParams):
    k2 = space.k2()
    return omega_plus_k2(k2, params), omega_minus_k2(k2, params)


def zero_point_energy(space: FockSpace, params: PhysicalParams = NATURAL) -> float:
    """``(1/2) sum_k hbar (w+ + w-) = sum_k hbar c sqrt(mu^2 + k^2)``."""
    wp, wm = _mode_frequencies(space, params)
    return float(0.5 * params.hbar * np.sum(wp + wm))


def build_generators(space: FockSpace, params: PhysicalParams = NATURAL) -> Generators:
    """Normal-ordered energy, momentum and number operators.

    All are diagonal in the occupation basis, built directly from the integer
    occupations.  ``H_symmetrized`` adds the zero-point constant.
    """
    wp, wm = _mode_frequencies(space, params)
    occ_a = space.basis[:, : space.M].astype(float)
    occ_b = space.basis[:, space.M :].astype(float)
    hb = params.hbar
    h_diag = hb * (occ_a @ wp + occ_b @ wm)
    H = sp.diags(h_diag, 0, format="csr")
    P = [sp.diags(hb * ((occ_a + occ_b) @ space.modes[:, i]), 0, format="csr") for i in range(space.spatial_dim)]
    N_plus = sp.diags(occ_a.sum(axis=1), 0, format="csr")
    N_minus = sp.diags(occ_b.sum(axis=1), 0, format="csr")
    e0 = zero_point_energy(space, params)
    H_sym = sp.diags(h_diag + e0, 0, format="csr")
    return Generators(H, P, N_plus, N_minus, H_sym, e0)


def symmetrized_hamiltonian_products(space: FockSpace, params: PhysicalParams = NATURAL) -> sp.csr_matrix:
    """``(1/2) sum_k hbar w (X^+ X + X X^+)`` built from ladder-operator products."""
    wp, wm = _mode_frequencies(space, params)
    out = sp.csr_matrix((space.dim, space.dim))
    for m in range(space.M):
        for species, w in (("a", wp[m]), ("b", wm[m])):
            X = space.lower(species, m)
            out = out + 0.5 * params.hbar * w * (X.T @ X + X @ X.T)
    return out.tocsr()


def one_particle_check(space: FockSpace, params: PhysicalParams = NATURAL) -> dict:
    """Apply H, P and the number operators to every one-particle state."""
    gens = build_generators(space, params)
    wp, wm = _mode_frequencies(space, params)
    vac = space.vacuum()
    rows = []
    worst = 0.0
    for m in range(space.M):
        for species, w in (("a", wp[m]), ("b", wm[m])):
            v = space.raise_(species, m) @ vac
            e_dev = float(np.max(np.abs(gens.H @ v - params.hbar * w * v)))
            p_dev = max(
                float(np.max(np.abs(gens.P[i] @ v - params.hbar * space.modes[m, i] * v)))
                for i in range(space.spatial_dim)
            )
            n_same, n_other = (gens.N_plus, gens.N_minus) if species == "a" else (gens.N_minus, gens.N_plus)
            n_dev = max(float(np.max(np.abs(n_same @ v - v))), float(np.max(np.abs(n_other @ v))))
            worst = max(worst, e_dev, p_dev, n_dev)
            rows.append(
                {
                    "mode": space.modes[m].tolist(),
                    "species": species,
                    "energy": float(params.hbar * w),
                    "energy_deviation": e_dev,
                    "momentum_deviation": p_dev,
                    "number_deviation": n_dev,
                }
            )
    return {"max_deviation": worst, "states": rows}


# -- field operators ---------------------------------------------------------


def _phase_dot(k, x) -> float:
    return float(np.dot(k, np.atleast_1d(np.asarray(x, dtype=float))))


def field_operator(space: FockSpace, params: PhysicalParams, t: float, x) -> sp.csr_matrix:
    """``psi(t, x) = V^-1/2 sum_k f_k [a_k e^{-i w+ t + i k x} - b_k^+ e^{i w- t - i k x}]``,
    ``f_k = sqrt(mu) (mu^2 + k^2)^(-1/4)``."""
    wp, wm = _mode_frequencies(space, params)
    f = np.sqrt(params.mu) * (params.mu**2 + space.k2()) ** -0.25 / np.sqrt(space.volume)
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for m in range(space.M):
        kx = _phase_dot(space.modes[m], x)
        a = space.lower("a", m)
        out = out + f[m] * np.exp(-1j * wp[m] * t + 1j * kx) * a
        out = out - f[m] * np.exp(1j * wm[m] * t - 1j * kx) * space.raise_("b", m)
    return out.tocsr()


def momentum_operator(space: FockSpace, params: PhysicalParams, t: float, x) -> sp.csr_matrix:
    """``pi(t, x) = (i hbar / 2) V^-1/2 sum_k w_k [a_k^+ e^{i w+ t - i k x} + b_k e^{-i w- t + i k x}]``,
    ``w_k = (mu^2 + k^2)^(1/4) / sqrt(mu)``."""
    wp, wm = _mode_frequencies(space, params)
    w = (params.mu**2 + space.k2()) ** 0.25 / np.sqrt(params.mu) / np.sqrt(space.volume)
    out = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for m in range(space.M):
        kx = _phase_dot(space.modes[m], x)
        out = out + w[m] * np.exp(1j * wp[m] * t - 1j * kx) * space.raise_("a", m)
        out = out + w[m] * np.exp(-1j * wm[m] * t + 1j * kx) * space.lower("b", m)
    return (0.5j * params.hbar * out).tocsr()


def delta_function(space: FockSpace, params: PhysicalParams, dt: float, dx) -> complex:
    """Box form ``(1/2V) sum_k [e^{-i w+ dt + i k dx} + e^{+i w- dt - i k dx}]``.

    On a lattice closed under ``k -> -k`` this equals
    ``(1/2V) sum_k [e^{-i w+ dt} + e^{i w- dt}] e^{i k dx}``.
    """
    wp, wm = _mode_frequencies(space, params)
    kx = np.array([_phase_dot(k, dx) for k in space.modes])
    terms = np.exp(-1j * wp * dt + 1j * kx) + np.exp(1j * wm * dt - 1j * kx)
    return complex(np.sum(terms) / (2.0 * space.volume))


def field_commutator_delta(space: FockSpace, params: PhysicalParams, t_offsets, x_offsets, require_complete: bool = True) -> list:
    """Tabulate ``Delta(dt, dx)`` and compare with ``[psi(dt, dx), pi(0, 0)] / (i hbar)``.

    The operator commutator is restricted to the sub-truncation block and
    compared against ``i hbar Delta I``.  With ``require_complete`` the modes
    must form a full grid lattice, so ``Delta(0, dx)`` is the box delta.
    """
    if require_complete and lattice_grid(space) is None:
        raise DomainError("modes do not form a complete grid lattice for the box")
    idx = space.sub_truncation
    eye = np.eye(len(idx))
    pi0 = momentum_operator(space, params, 0.0, np.zeros(space.spatial_dim))
    rows = []
    for dt in t_offsets:
        for dx in x_offsets:
            dxv = np.broadcast_to(np.asarray(dx, dtype=float), (space.spatial_dim,))
            psi = field_operator(space, params, float(dt), dxv)
            comm = (psi @ pi0 - pi0 @ psi).toarray()[np.ix_(idx, idx)]
            delta = delta_function(space, params, float(dt), dxv)
            dev = float(np.max(np.abs(comm - 1j * params.hbar * delta * eye)))
            rows.append({"dt": float(dt), "dx": dxv.tolist(), "delta_re": delta.real, "delta_im": delta.imag, "deviation": dev})
    return rows


def hamiltonian_from_field_expansion(space: FockSpace, params: PhysicalParams = NATURAL, t: float = 0.0):
    """Integrate the symmetrized energy density over the box, mode by mode.

    ``H = (hbar^2/4m) int [(psi_t^+ psi_t + psi_t psi_t^+)/c^2 + grad psi^+ grad psi + grad psi grad psi^+]``
    with ``int e^{i (q - q') x} dx = V delta_qq'`` on the continuous box.
    Returns ``(H, cross)`` where ``cross`` lists the coefficients of every
    ``a b`` / ``a^+ b^+`` pairing, which must vanish.
    """
    wp, wm = _mode_frequencies(space, params)
    V = space.volume
    f = np.sqrt(params.mu) * (params.mu**2 + space.k2()) ** -0.25 / np.sqrt(V)
    lattice = np.round(space.modes / (2.0 * np.pi / space.box)).astype(int)
    # expansion terms of psi: (coefficient, d/dt factor, operator, wavevector label, species)
    terms = []
    for m in range(space.M):
        terms.append((f[m] * np.exp(-1j * wp[m] * t), -1j * wp[m], space.lower("a", m), tuple(lattice[m]), space.modes[m], "a"))
        terms.append((-f[m] * np.exp(1j * wm[m] * t), 1j * wm[m], space.raise_("b", m), tuple(-lattice[m]), -space.modes[m], "b+"))
    pref = params.hbar**2 / (4.0 * params.m)
    H = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    cross = []
    for cj, dj, Oj, qj, kj, sj in terms:
        for cl, dl, Ol, ql, kl, sl in terms:
            if qj != ql:
                continue
            coef = pref * V * (
                np.conj(cj * dj) * (cl * dl) / params.c**2 + np.dot(np.conj(1j * kj * cj), 1j * kl * cl)
            )
            if sj != sl:
                cross.append(complex(coef))
            Ojd = Oj.conj().T
            H = H + coef * (Ojd @ Ol + Ol @ Ojd)
    return H.tocsr(), cross


def spectrum_two_particle(space: FockSpace, params: PhysicalParams = NATURAL):
    """Eigenvalues of H on the two-particle sector and the expected sums ``hbar(w_i + w_j)``."""
    gens = build_generators(space, params)
    total = space.basis.sum(axis=1)
    idx = np.flatnonzero(total == 2)
    block = gens.H.toarray()[np.ix_(idx, idx)]
    eig = np.sort(np.linalg.eigvalsh(block))
    wp, wm = _mode_frequencies(space, params)
    single = np.concatenate([wp, wm]) * params.hbar
    lo = 0 if space.n_max >= 2 else 1
    expect = sorted(single[i] + single[j] for i in range(len(single)) for j in range(i + lo, len(single)))
    return eig, np.array(expect)


def quantize_report(space: FockSpace, params: PhysicalParams = NATURAL, t_offsets=None, x_offsets=None) -> dict:
    """Everything the ``quantize`` subcommand reports, as plain JSON data."""
    gens = build_generators(space, params)
    vac = space.vacuum()
    comm = commutator_check(space)
    comm.pop("pairs")
    report = {
        "modes": space.modes.tolist(),
        "n_max": space.n_max,
        "fock_dim": space.dim,
        "commutators": comm,
        "b_redefinition_deviation": b_redefinition_check(space),
        "one_particle": one_particle_check(space, params),
        "vacuum": {
            "H_normal_ordered": float(np.real(vac.conj() @ (gens.H @ vac))),
            "H_symmetrized": float(np.real(vac.conj() @ (gens.H_symmetrized @ vac))),
            "zero_point_energy": gens.zero_point_energy,
            "P": [float(np.real(vac.conj() @ (p @ vac))) for p in gens.P],
        },
    }
    eig, expect = spectrum_two_particle(space, params)
    report["two_particle_spectrum_max_deviation"] = float(np.max(np.abs(eig - expect))) if len(eig) else 0.0
    if space.box is not None and lattice_grid(space) is not None:
        grid = lattice_grid(space)
        t_offsets = [0.0] if t_offsets is None else t_offsets
        x_offsets = list(grid.x_axis - grid.x_axis[0]) if x_offsets is None and space.spatial_dim == 1 else (x_offsets or [0.0])
        report["delta_function"] = {"complete_lattice": True, "rows": field_commutator_delta(space, params, t_offsets, x_offsets)}
    else:
        report["delta_function"] = {"complete_lattice": False, "rows": []}
    return report
