import numpy as np
import pytest

from nldstab.errors import GridMismatch
from nldstab.functionals import energy_terms, find_omega_E
from nldstab.grid import Grid, make_grid
from nldstab.jordan import (build_xi, c_matrix, chain_residuals, generalized_vector, inner,
                            jordan_report, vk_pairing)
from nldstab.linop import assemble_JL
from nldstab.model import make_model
from nldstab.profile import d_omega_profile, solve_profile, zero_profile

from conftest import cached_profile


def test_zero_profile():
    model = make_model("GN", 1)
    z = zero_profile(model, 0.5, Grid(30.0, 128))
    assert np.all(build_xi(z) == 0)
    c11, E, d = c_matrix(z)
    assert c11 == 0 and E == 0
    rep = chain_residuals(assemble_JL(model, z), z, np.zeros((4, 128)))
    assert rep.residual_kernel_U1 == 0 and rep.residual_kernel_tr == 0


def test_gn_cubic_chain():
    p = cached_profile("GN", 1, 0.5)
    rep = jordan_report(p)
    for name in ("residual_kernel_U1", "residual_kernel_tr", "residual_chain_U1", "residual_chain_tr"):
        assert getattr(rep, name) <= 1e-4
    assert rep.defect <= 1e-5 * max(abs(rep.energy), 1)
    assert abs(rep.cross_orthogonality) <= 1e-12
    assert abs(rep.xi_phi_overlap) <= 1e-10
    # vk pairing against the exact dQ/domega = -2/(omega^2 kappa)
    exact = -2 / (0.25 * np.sqrt(0.75))
    assert abs(rep.vk_pairing - exact / 2) <= 1e-5 * abs(exact)


@pytest.mark.parametrize("family,k,omega", [("MTM", 0.5, -0.3), ("MTM", 2, 0.6), ("GN", 3, 0.8),
                                            ("GN", 0.5, 0.4), ("MTM", 3, -0.7)])
def test_c11_is_energy(family, k, omega):
    c11, E, d = c_matrix(cached_profile(family, k, omega))
    assert d <= 1e-4 * max(abs(E), 1)


def test_c11_vanishes_at_zero_energy():
    model = make_model("MTM", 0.5)
    w = find_omega_E(model, (-0.9, -0.3))
    p = solve_profile(model, w, make_grid(model, w))
    c11, E, _ = c_matrix(p)
    assert abs(c11) <= 1e-3 * energy_terms(p).Q


def test_vk_pairing_small_at_vk_point():
    from nldstab.functionals import find_omega_VK
    model = make_model("GN", 3)
    w = find_omega_VK(model, (0.3, 0.99))
    p = solve_profile(model, w, make_grid(model, w))
    d = d_omega_profile(model, w, 1e-4, p.grid)
    assert abs(vk_pairing(p, d)) <= 1e-4 * energy_terms(p).Q


def test_vk_sign_matches_functional_sweep():
    model = make_model("GN", 3)
    for w in (0.7, 0.95):
        p = cached_profile("GN", 3, w)
        d = d_omega_profile(model, w, 1e-4, p.grid)
        from nldstab.functionals import dq_domega
        assert np.sign(vk_pairing(p, d)) == np.sign(dq_domega(model, w))


def test_grid_mismatch():
    p = cached_profile("GN", 1, 0.5)
    q = cached_profile("GN", 1, 0.6)
    with pytest.raises(GridMismatch):
        chain_residuals(assemble_JL(q.model, q), p, np.zeros((4, p.grid.M)))


def test_generalized_vector_solvable_only_at_vk():
    """J L u = d phi/d omega is solvable (in least squares) only where dQ/domega = 0."""
    from nldstab.functionals import find_omega_VK
    model = make_model("GN", 3)
    w_vk = find_omega_VK(model, (0.3, 0.99))
    out = {}
    for w in (w_vk, 0.6):
        g = make_grid(model, w, M=255)
        p = solve_profile(model, w, g)
        d = d_omega_profile(model, w, 1e-4, g)
        out[w] = generalized_vector(assemble_JL(model, p), p, d)[1]
    assert out[w_vk] < out[0.6] / 10
