import itertools

import numpy as np
import pytest

from relwave.dispersion import omega_branch
from relwave.errors import DomainError, ResourceError
from relwave.fock import (
    b_redefinition_check,
    build_generators,
    commutator_check,
    delta_function,
    field_commutator_delta,
    field_operator,
    fock_from_grid,
    hamiltonian_from_field_expansion,
    lattice_grid,
    make_fock,
    max_fock_dim,
    momentum_operator,
    one_particle_check,
    quantize_report,
    spectrum_two_particle,
    symmetrized_hamiltonian_products,
    zero_point_energy,
)
from relwave.grid import SpectralGrid
from relwave.units import NATURAL, make_params


def _dense(m):
    return m.toarray()


def test_dimensions():
    assert make_fock([0.0], 1).dim == 4
    assert make_fock([0.0, 1.0], 2).dim == 81
    assert make_fock([0.0, 1.0], 3).dim == 256


def test_basis_layout():
    s = make_fock([0.0, 1.0], 1)
    assert s.basis.shape == (16, 4)
    assert s.basis[0].tolist() == [0, 0, 0, 0]
    assert s.basis[1].tolist() == [0, 0, 0, 1]
    assert len(s.sub_truncation) == 1


def test_cap_enforced(monkeypatch):
    with pytest.raises(ResourceError):
        make_fock([0.0, 1.0, 2.0], 4)  # 5^6 levels, above the default cap
    monkeypatch.setenv("RELWAVE_MAX_FOCK_DIM", "100")
    assert max_fock_dim() == 100
    with pytest.raises(ResourceError):
        make_fock([0.0, 1.0], 3)
    monkeypatch.setenv("RELWAVE_MAX_FOCK_DIM", "lots")
    with pytest.raises(DomainError):
        max_fock_dim()


def test_cap_boundary():
    assert make_fock([0.0, 1.0, 2.0], 3, cap=4096).dim == 4096


@pytest.mark.parametrize("modes, n_max", [([], 2), ([0.0, 0.0], 2), ([0.0], 0), ([0.0], 1.5)])
def test_bad_spaces(modes, n_max):
    with pytest.raises(DomainError):
        make_fock(modes, n_max)


def test_annihilators_kill_vacuum():
    s = make_fock([0.0, 1.0], 2)
    vac = s.vacuum()
    for species, m in itertools.product("ab", range(2)):
        assert np.max(np.abs(s.lower(species, m) @ vac)) == 0.0


def test_ladder_matrix_entries():
    s = make_fock([0.5], 3)
    a = _dense(s.lower("a", 0))
    # one factor of 4 levels, other factor identity: a = lower (x) I
    single = np.diag(np.sqrt([1.0, 2.0, 3.0]), 1)
    assert np.array_equal(a, np.kron(single, np.eye(4)))


def test_commutators_exact_two_modes():
    s = make_fock([0.0, 1.0], 3)
    rep = commutator_check(s)
    assert rep["ccr_exact_max_deviation"] == 0.0
    assert rep["cross_exact_max_deviation"] == 0.0
    assert rep["ccr_float_max_deviation"] < 1e-14
    assert rep["cross_float_max_deviation"] == 0.0
    assert rep["sub_truncation_states"] == 3**4
    # at the cut the algebra breaks as [a, a+] = -n_max
    assert rep["truncation_edge_commutator"] == pytest.approx(-3.0)


def test_commutator_oracle_dense():
    # independent: build a_k from scratch via occupation arithmetic
    s = make_fock([0.0, 2.0], 2)
    idx = {tuple(b): i for i, b in enumerate(s.basis.tolist())}
    for f in range(4):
        a = np.zeros((s.dim, s.dim))
        for occ, j in idx.items():
            if occ[f] > 0:
                lower = list(occ)
                lower[f] -= 1
                a[idx[tuple(lower)], j] = np.sqrt(occ[f])
        species, mode = ("a", f) if f < 2 else ("b", f - 2)
        assert np.array_equal(a, _dense(s.lower(species, mode)))


def test_b_redefinition_sign():
    assert b_redefinition_check(make_fock([0.0, 1.0], 2)) < 1e-14


def test_generators_vacuum_and_zero_point():
    s = make_fock([0.0, 1.0], 3)
    g = build_generators(s)
    vac = s.vacuum()
    assert vac @ (g.H @ vac) == 0.0
    assert vac @ (g.P[0] @ vac) == 0.0
    expect = np.sqrt(1.0) + np.sqrt(2.0)
    assert (vac @ (g.H_symmetrized @ vac)).real == pytest.approx(expect, abs=1e-12)
    assert zero_point_energy(s) == pytest.approx(expect, abs=1e-12)


def test_single_particle_energies():
    s = make_fock([0.0, 1.0], 2)
    g = build_generators(s)
    vac = s.vacuum()
    plus1 = s.raise_("a", 1) @ vac
    assert plus1 @ (g.H @ plus1) == pytest.approx(np.sqrt(2) - 1, rel=1e-15)
    rest_plus = s.raise_("a", 0) @ vac
    rest_minus = s.raise_("b", 0) @ vac
    assert rest_plus @ (g.H @ rest_plus) == 0.0
    assert rest_minus @ (g.H @ rest_minus) == pytest.approx(2.0)
    assert np.array_equal(g.N_plus @ plus1, plus1)
    assert np.max(np.abs(g.N_minus @ plus1)) == 0.0


def test_one_particle_check_exact():
    rep = one_particle_check(make_fock([0.0, -1.0], 3))
    assert rep["max_deviation"] == 0.0
    assert len(rep["states"]) == 4


def test_number_operators_integer():
    s = make_fock([0.0, 1.0], 3)
    g = build_generators(s)
    diag = g.N_plus.diagonal()
    assert np.array_equal(diag, np.round(diag))
    assert diag.max() == 6


def test_symmetrized_products_match_generator():
    s = make_fock([0.0, 1.0], 3)
    g = build_generators(s)
    idx = s.sub_truncation
    prod = _dense(symmetrized_hamiltonian_products(s))[np.ix_(idx, idx)]
    assert np.max(np.abs(prod - _dense(g.H_symmetrized)[np.ix_(idx, idx)])) < 1e-13


def test_two_particle_spectrum():
    eig, expect = spectrum_two_particle(make_fock([0.0, 1.0], 2))
    assert np.max(np.abs(eig - expect)) < 1e-14
    eig1, expect1 = spectrum_two_particle(make_fock([0.0, 1.0], 1))
    assert len(eig1) == len(expect1) == 6


def test_units_in_generators():
    p = make_params(2.0, 3.0, 0.5)
    s = make_fock([1.0], 1)
    g = build_generators(s, p)
    one_minus = s.raise_("b", 0) @ s.vacuum()
    assert one_minus @ (g.H @ one_minus) == pytest.approx(0.5 * omega_branch(1.0, "minus", p))


# -- field operators ---------------------------------------------------------------


def _complete(n_max=3):
    grid = SpectralGrid(1, 2, 3.0)
    return fock_from_grid(grid, n_max), grid


def test_lattice_detection():
    s, grid = _complete()
    assert lattice_grid(s) == grid
    assert lattice_grid(make_fock([0.0, 1.0], 1, box=3.0)) is None
    assert lattice_grid(make_fock([0.0, 1.0], 1)) is None


def test_equal_time_commutator_is_box_delta():
    s, grid = _complete()
    rows = field_commutator_delta(s, NATURAL, [0.0], [0.0, grid.h])
    assert rows[0]["delta_re"] == pytest.approx(1 / grid.dV, abs=1e-12)
    assert rows[0]["deviation"] < 1e-12
    assert abs(complex(rows[1]["delta_re"], rows[1]["delta_im"])) < 1e-12
    assert rows[1]["deviation"] < 1e-12


def test_delta_table_unequal_times():
    s, grid = _complete()
    rows = field_commutator_delta(s, NATURAL, [0.1, 0.25, 0.5, 1.0, 2.0], [0.0, grid.h])
    assert len(rows) == 10
    assert max(r["deviation"] for r in rows) < 1e-12


def test_single_mode_delta_formula():
    k, box = 0.0, 5.0
    s = make_fock([k], 2, box=box)
    dt, dx = 0.3, 0.7
    wp, wm = omega_branch(k, "plus"), omega_branch(k, "minus")
    expect = (np.exp(-1j * wp * dt) + np.exp(1j * wm * dt)) * np.exp(1j * k * dx) / (2 * box)
    assert delta_function(s, NATURAL, dt, [dx]) == pytest.approx(expect, abs=1e-15)
    rows = field_commutator_delta(s, NATURAL, [dt], [dx], require_complete=False)
    assert rows[0]["deviation"] < 1e-12


def test_incomplete_lattice_rejected():
    with pytest.raises(DomainError):
        field_commutator_delta(make_fock([0.0], 1, box=2.0), NATURAL, [0.0], [0.0])


def test_field_operators_need_box():
    with pytest.raises(DomainError):
        field_operator(make_fock([0.0], 1), NATURAL, 0.0, [0.0])


def test_field_and_momentum_adjoint_structure():
    s, _ = _complete(2)
    psi = _dense(field_operator(s, NATURAL, 0.0, [0.4]))
    pi = _dense(momentum_operator(s, NATURAL, 0.0, [0.4]))
    assert psi.shape == pi.shape == (s.dim, s.dim)
    # psi and psi+ commute with each other's partner at equal points off the edge
    idx = s.sub_truncation
    c = (psi @ psi.conj().T - psi.conj().T @ psi)[np.ix_(idx, idx)]
    # [psi, psi+] = (1/V) sum f_k^2 (1 - 1) = 0: both species enter with opposite signs
    assert np.max(np.abs(c)) < 1e-13


def test_field_expansion_hamiltonian_cross_terms_vanish():
    s, _ = _complete(2)
    H, cross = hamiltonian_from_field_expansion(s, NATURAL, t=0.37)
    assert cross and max(abs(c) for c in cross) < 1e-15
    idx = s.sub_truncation
    ref = _dense(build_generators(s).H_symmetrized)[np.ix_(idx, idx)]
    assert np.max(np.abs(_dense(H)[np.ix_(idx, idx)] - ref)) < 1e-12


def test_quantize_report_serializable():
    import json

    s, _ = _complete(1)
    rep = quantize_report(s)
    json.dumps(rep)
    assert rep["delta_function"]["complete_lattice"]
    assert rep["vacuum"]["H_normal_ordered"] == 0.0
