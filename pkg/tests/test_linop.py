import numpy as np
import pytest
import scipy.linalg as sla

from nldstab.errors import GridMismatch, ParityDefect
from nldstab.grid import Grid, make_grid
from nldstab.linop import (assemble_JL, dump_operator, expand_field, load_operator_matrix,
                           parity_decompose, restrict_field)
from nldstab.model import J4, make_model
from nldstab.profile import WaveProfile, solve_profile, spatial_derivative, zero_profile
from nldstab.spectrum import relative_kernel_residuals

from conftest import cached_profile


def set_distance(a, b):
    d1 = np.abs(a[:, None] - b[None, :]).min(axis=1).max()
    d2 = np.abs(b[:, None] - a[None, :]).min(axis=1).max()
    return max(d1, d2)


@pytest.mark.parametrize("M", [128, 129])
@pytest.mark.parametrize("family,k,omega", [("MTM", 1, 0.2), ("GN", 2, 0.6)])
def test_parity_blocks_reproduce_spectrum(M, family, k, omega):
    p = cached_profile(family, k, omega, M=M)
    op = assemble_JL(p.model, p)
    even, odd = parity_decompose(op, p)
    assert even.shape[0] + odd.shape[0] == 4 * M
    full = sla.eigvals(op.A)
    union = np.concatenate([sla.eigvals(even), sla.eigvals(odd)])
    assert union.size == full.size
    scale = max(1.0, np.abs(full).max())
    assert set_distance(full, union) <= 1e-8 * scale


@pytest.mark.parametrize("family,k,omega", [("MTM", 0.5, -0.6), ("MTM", 3, 0.4), ("GN", 1, 0.5)])
def test_kernel_vectors(family, k, omega):
    p = cached_profile(family, k, omega)
    op = assemble_JL(p.model, p)
    res = relative_kernel_residuals(op, p)
    assert res["even"] < 1e-9 and res["odd"] < 1e-9
    # the phase mode lives in the even block, the translation mode in the odd one
    Jphi = np.einsum("ab,bm->am", J4, p.field)
    dx = spatial_derivative(p)
    assert np.allclose(expand_field(restrict_field(Jphi, "even"), p.grid.M, "even"), Jphi)
    assert np.allclose(expand_field(restrict_field(dx, "odd"), p.grid.M, "odd"), dx, atol=1e-12)
    assert not np.allclose(expand_field(restrict_field(dx, "even"), p.grid.M, "even"), dx)


def test_operator_is_self_adjoint_times_J():
    p = cached_profile("MTM", 2, -0.5)
    op = assemble_JL(p.model, p)
    assert op.weighted_symmetry_defect() < 1e-10
    M = p.grid.M
    Jbig = np.kron(J4, np.eye(M))
    assert np.allclose(Jbig @ op.S, op.A)


def test_zero_profile_band_edges():
    model = make_model("MTM", 1)
    omega = 0.3
    g = Grid(30.0, 128)
    z = zero_profile(model, omega, g)
    op = assemble_JL(model, z)
    lam = sla.eigvals(op.A)
    assert np.abs(lam.real).max() < 1e-10
    im = np.abs(lam.imag)
    assert im.min() >= 0.7 - 1e-10
    assert np.isclose(np.sort(im)[0], 0.7, atol=1e-10)
    assert op.band_edges == (-1.3, -0.7, 0.7, 1.3)


def test_grid_mismatch():
    p = cached_profile("GN", 1, 0.5)
    with pytest.raises(GridMismatch):
        assemble_JL(p.model, p, Grid(20.0, 128))


def test_parity_defect_detected():
    p = cached_profile("GN", 1, 0.5, M=128)
    v = p.v.copy()
    v[10] += 1e-3
    bad = WaveProfile(p.model, p.omega, p.grid, v, p.u)
    op = assemble_JL(p.model, p)
    with pytest.raises(ParityDefect):
        parity_decompose(op, bad)


def test_dump_roundtrip(tmp_path):
    p = cached_profile("GN", 1, 0.5, M=128)
    op = assemble_JL(p.model, p)
    path = dump_operator(op, tmp_path / "op.bin")
    head, A = load_operator_matrix(path)
    assert head["omega"] == 0.5 and head["grid"]["M"] == 128
    assert np.array_equal(A, op.A)


def test_fd4_scheme_kernel_order():
    model = make_model("GN", 1)
    res = []
    for M in (256, 512):
        g = make_grid(model, 0.5, M=M, scheme="fd4", stretch=None)
        p = solve_profile(model, 0.5, g)
        res.append(relative_kernel_residuals(assemble_JL(model, p), p))
    for block in ("even", "odd"):
        assert 12 < res[0][block] / res[1][block] < 20
