"""Acceptance criteria.  Each test prints one PASS/FAIL line to the terminal
(bypassing capture) and then asserts the same condition."""

import time
import warnings

import numpy as np
import pytest

from nldstab.functionals import energy_terms, find_omega_E, find_omega_VK
from nldstab.jordan import c_matrix, chain_residuals
from nldstab.linop import assemble_JL
from nldstab.model import make_model
from nldstab.profile import d_omega_profile, solve_resolved_profile
from nldstab.spectrum import eigen_slice, filter_resolved, real_pairs
from nldstab.sweep import run_sweep

KS = (0.5, 1, 2, 3)
MTM_OMEGAS = (-0.9, -0.75, -0.45, -0.15, 0.15, 0.45, 0.75, 0.9)
GN_OMEGAS = (0.1, 0.25, 0.4, 0.55, 0.7, 0.85, 0.95)


@pytest.fixture
def verdict(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail
    return _report


def _slice(model, omega, M=511, **kw):
    prof = solve_resolved_profile(model, omega, M=M, **kw)
    return prof, eigen_slice(assemble_JL(model, prof), prof)


def _profiles():
    for fam, omegas in (("MTM", MTM_OMEGAS), ("GN", GN_OMEGAS)):
        for k in KS:
            model = make_model(fam, k)
            for w in omegas:
                yield fam, k, w, solve_resolved_profile(model, w, M=512)


@pytest.fixture(scope="module")
def profile_suite():
    return list(_profiles())


def test_criterion_01_omega_E_mtm_half(verdict):
    t0 = time.perf_counter()
    wE = find_omega_E(make_model("MTM", 0.5), (-0.9, -0.3))
    dt = time.perf_counter() - t0
    ok = abs(wE + 0.6276) <= 0.005 and dt < 120
    verdict(1, ok, f"omega_E = {wE:.6f} (|diff from -0.6276| = {abs(wE + 0.6276):.2e}), {dt:.1f} s")


def test_criterion_02_collision_matches_energy_zero(verdict):
    model = make_model("MTM", 0.5)
    wE = find_omega_E(model, (-0.9, -0.3))
    t0 = time.perf_counter()
    res = run_sweep(model, count=100, omega_range=(-1.0, 0.0), M=512)
    dt = time.perf_counter() - t0
    events = [e for e in res.events if -1.0 < e.omega_star < 0.0]
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        n08 = len(real_pairs(_slice(model, -0.8)[1]))
        n03 = len(real_pairs(_slice(model, -0.3)[1]))
    ok = (len(events) == 1 and abs(events[0].omega_star - wE) <= 0.01
          and n08 == 1 and n03 == 0 and dt <= 900)
    stars = [round(e.omega_star, 6) for e in events]
    verdict(2, ok, f"events at {stars} vs omega_E = {wE:.6f}; real pairs at -0.8: {n08}, "
                   f"at -0.3: {n03}; sweep {dt:.0f} s")


def test_criterion_03_exact_eigenvalue_gn_linear(verdict):
    model = make_model("GN", 1)
    errs = {}
    for w in (0.3, 0.5, 0.8):
        _, sl = _slice(model, w)
        lam = sl.eigenvalues[sl.retained]
        target = 2j * w
        errs[w] = float(np.min(np.abs(lam - target)) / abs(target)) if lam.size else np.inf
    ok = all(e <= 1e-3 for e in errs.values())
    verdict(3, ok, "relative errors of 2*omega*i: "
                   + ", ".join(f"{w}: {e:.1e}" for w, e in errs.items()))


def test_criterion_04_integrable_case_clean(verdict):
    model = make_model("MTM", 1)
    lines, ok = [], True
    for w in (-0.5, 0.2, 0.7):
        prof, coarse = _slice(model, w)
        _, fine = _slice(model, w, M=1023)
        sl = filter_resolved(coarse, fine)
        gap = sl.gap_eigenvalues()
        sub = sl.retained & ~sl.near_band & (np.abs(sl.eigenvalues.imag) < sl.gap_threshold)
        zero_ok = bool(np.all(sl.zero_mode[sub]))
        small = np.abs(sl.eigenvalues[sl.zero_mode]).max() <= 5 * sl.eps_disc
        ok &= gap.size == 0 and zero_ok and small
        lines.append(f"{w}: {gap.size} gap eigenvalues, max zero mode "
                     f"{np.abs(sl.eigenvalues[sl.zero_mode]).max():.1e} <= 5*eps {5 * sl.eps_disc:.1e}")
    verdict(4, ok, "; ".join(lines))


def test_criterion_05_virial_suite(verdict, profile_suite):
    worst = [0.0, 0.0, 0.0]
    for *_, prof in profile_suite:
        r = energy_terms(prof)
        worst[0] = max(worst[0], r.defect_virial1 / max(abs(r.K), 1))
        worst[1] = max(worst[1], r.defect_virial2 / max(abs(r.omega * r.Q), 1))
        worst[2] = max(worst[2], r.defect_KL / max(abs(r.K), 1))
    ok = max(worst) <= 1e-6
    verdict(5, ok, f"{len(profile_suite)} profiles; worst scaled defects "
                   f"K+kV {worst[0]:.1e}, wQ-M-V {worst[1]:.1e}, K+L {worst[2]:.1e}")


def test_criterion_06_c11_equals_energy(verdict, profile_suite):
    worst = 0.0
    for *_, prof in profile_suite:
        c11, E, diff = c_matrix(prof)
        worst = max(worst, diff / max(abs(E), 1))
    verdict(6, worst <= 1e-4, f"{len(profile_suite)} profiles; worst |c11 - E|/max(|E|,1) = {worst:.1e}")


def test_criterion_07_jordan_chain_convergence(verdict):
    model, w, delta = make_model("GN", 1), 0.5, 1e-4
    res = []
    for M, d in ((512, delta), (1024, delta / 2)):
        prof = solve_resolved_profile(model, w, M=M)
        dphi = d_omega_profile(model, w, d, prof.grid)
        rep = chain_residuals(assemble_JL(model, prof), prof, dphi)
        res.append((rep.residual_chain_U1, rep.residual_chain_tr))
    (u0, t0), (u1, t1) = res
    ru, rt = u0 / u1, t0 / t1
    ok = max(u0, t0) <= 1e-4 and ru >= 4 and rt >= 4
    verdict(7, ok, f"GN k=1 omega=0.5: U1 chain {u0:.2e} -> {u1:.2e} (x{ru:.2f}), "
                   f"translation chain {t0:.2e} -> {t1:.2e} (x{rt:.2f})")


def test_criterion_08_gn_energy_positive(verdict, profile_suite):
    Es = [(k, w, energy_terms(p).E) for fam, k, w, p in profile_suite if fam == "GN"]
    bad = [(k, w) for k, w, E in Es if not E > 0]
    verdict(8, not bad, f"{len(Es)} GN profiles, min E = {min(E for *_, E in Es):.3e}, "
                        f"non-positive at {bad}")


def test_criterion_09_gn_cubic_vk(verdict):
    model = make_model("GN", 3)
    wVK = find_omega_VK(model, (0.6, 0.95))
    with warnings.catch_warnings():
        warnings.simplefilter("error", RuntimeWarning)
        _, above = _slice(model, wVK + 0.01)
        _, below = _slice(model, wVK - 0.01)
        pa, pb = real_pairs(above), real_pairs(below)
    gap = below.gap_eigenvalues()
    imag = gap[(np.abs(gap.real) < 1e-6) & (np.abs(gap.imag) > 0)]
    ok = bool(pa) and not pb and imag.size >= 2
    verdict(9, ok, f"omega_VK = {wVK:.5f}; real pairs above {np.round(pa, 5).tolist()}, "
                   f"below {pb}; imaginary pair below {np.round(imag, 5).tolist()}")


def test_criterion_10_mtm_higher_powers(verdict):
    out, ok = [], True
    for k in (2, 3):
        model = make_model("MTM", k)
        wE = find_omega_E(model, (-0.999, -0.9))
        w = max(0.5 * (wE - 1.0), -0.995)  # midway between omega_E and the gap edge
        pairs = real_pairs(_slice(model, w)[1])
        ok &= -1 < wE < 0 and len(pairs) >= 1
        out.append(f"k={k}: omega_E = {wE:.5f}, real pairs at {w:.4f}: "
                   f"{np.round(pairs, 6).tolist()}")
    wVK = find_omega_VK(make_model("MTM", 3), (0.1, 0.5))
    out.append(f"k=3: omega_VK = {wVK:.5f}")
    verdict(10, ok, "; ".join(out))
