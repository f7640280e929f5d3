"""Moment quadrature against an analytic oracle, path agreement, rotation,
energy accounting, serialization, and series reconstruction."""
import numpy as np
import pytest

from fmr import (
    BasisSpec,
    GrayImage,
    MomentSet,
    disk_mask,
    flush_small,
    fm_image,
    fmr_direct,
    fmr_harmonic_fft,
    fmr_polynomial,
    load_momentset,
    radon_forward,
    reconstruct,
    reconstruct_image_series,
    rotate,
    save_momentset,
    synthesize_sinogram,
)
from fmr.moments import order_lists
from fmr.errors import (
    GridMismatch,
    IncompleteMomentSet,
    ParamError,
    StabilityError,
    UnderResolved,
)

from conftest import offset_gaussian

# Moments of the offset Gaussian (amp 0.8, center (0.25,-0.15), sigma 0.2),
# whose sinogram is closed-form: amp sigma sqrt(2 pi) exp(-(r-d)^2/2 sigma^2)
# with d = x0 cos t + y0 sin t.  Values from 400-node Gauss-Legendre radial
# x 2048-angle quadrature of that formula, self-converged to 1e-14; the
# pipeline reproduces them within discretization error measured < 1e-2.
ORACLE_HARMONIC_A1 = {
    (0, 0): 1.13200420289742712e-01 + 0j,
    (1, 0): -1.25602492059179449e-02 - 6.32117974405374955e-02j,
    (2, 1): -8.43152588005148355e-03 + 6.87013478658217436e-04j,
    (-1, 2): -5.76949065874227465e-03 - 1.51656018405314855e-02j,
    (3, -3): -5.62566003386471246e-04 - 5.83464677927582787e-04j,
}
ORACLE_HARMONIC_A2_11 = 3.30999607810675139e-02 - 1.69197052010419194e-02j
ORACLE_POLY_A2 = {
    (0, 0): 6.34125181440948760e-02 + 0j,
    (1, 0): 8.59483407168356583e-02 + 0j,
    (2, 2): 8.53236627045310912e-04 + 1.59981867570997000e-03j,
    (3, 1): 1.72688997187244141e-02 + 1.03613398312346530e-02j,
}
ORACLE_TOL = 2e-2


@pytest.fixture(scope="module")
def gauss_sino():
    img = offset_gaussian(192)
    return img, radon_forward(img, disk_mask(img), 192, 192)


class TestAnalyticOracle:
    def test_harmonic_direct(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 3)
        for (n, m), ref in ORACLE_HARMONIC_A1.items():
            assert abs(ms.get(n, m) - ref) / abs(ref) < ORACLE_TOL

    def test_harmonic_alpha2(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 2.0), 1)
        assert abs(ms.get(1, 1) - ORACLE_HARMONIC_A2_11) / abs(ORACLE_HARMONIC_A2_11) < ORACLE_TOL

    def test_polynomial_direct(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("polynomial", 2.0, p=3.0, q=2.0), 3)
        for (n, m), ref in ORACLE_POLY_A2.items():
            assert abs(ms.get(n, m) - ref) / abs(ref) < ORACLE_TOL

    def test_fft_route_hits_oracle(self, gauss_sino):
        img, _ = gauss_sino
        wrp = radon_forward(img, disk_mask(img), 192, 192, warp_alpha=1.0)
        ms = fmr_harmonic_fft(wrp, 1.0, 3)
        for (n, m), ref in ORACLE_HARMONIC_A1.items():
            assert abs(ms.get(n, m) - ref) / abs(ref) < ORACLE_TOL

    def test_rectangular_grid(self, gauss_sino):
        img, _ = gauss_sino
        sino = radon_forward(img, disk_mask(img), 384, 64)
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 3)
        for (n, m), ref in ORACLE_HARMONIC_A1.items():
            assert abs(ms.get(n, m) - ref) / abs(ref) < ORACLE_TOL

    def test_m0_coefficients_are_real(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("polynomial", 2.0, p=3.0, q=2.0), 3)
        for n in range(4):
            v = ms.get(n, 0)
            assert abs(v.imag) < 1e-3 * abs(v)


class TestPathAgreement:
    def test_fft_vs_direct_dual_route(self, portrait):
        dom = disk_mask(portrait)
        for alpha in (1.0, 2.0):
            uni = radon_forward(portrait, dom, 128, 128)
            wrp = radon_forward(portrait, dom, 128, 128, warp_alpha=alpha)
            md = fmr_direct(uni, BasisSpec("harmonic", alpha), 6)
            mf = fmr_harmonic_fft(wrp, alpha, 6)
            mx = max(abs(v) for _, v in md.items())
            for (n, m), v in md.items():
                # max-normalized agreement; tight relative only above 10%
                # of peak, where the 128-grid quadrature floor allows it
                assert abs(mf.get(n, m) - v) / mx < 1e-2
                if abs(v) >= 0.1 * mx:
                    assert abs(mf.get(n, m) - v) / abs(v) < 1e-2

    def test_polynomial_recursive_vs_direct(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 128, 128)
        spec = BasisSpec("polynomial", 2.0, p=3.0, q=2.0)
        fast = fmr_polynomial(sino, spec, 10)
        slow = fmr_direct(sino, spec, 10)
        scale = max(abs(v) for _, v in slow.items())
        worst = max(abs(fast.get(n, m) - v) / scale for (n, m), v in slow.items())
        assert worst < 1e-8

    def test_fft_requires_matching_warp_grid(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 64, 64)
        with pytest.raises(GridMismatch):
            fmr_harmonic_fft(sino, 2.0, 4)


class TestRotation:
    def test_quarter_turn_magnitudes(self, portrait):
        dom = disk_mask(portrait)
        spec = BasisSpec("harmonic", 1.0)
        m0 = fmr_direct(radon_forward(portrait, dom, 256, 256), spec, 6)
        m90 = fmr_direct(radon_forward(rotate(portrait, 90.0), dom, 256, 256), spec, 6)
        mx = max(abs(v) for _, v in m0.items())
        for (n, m), v in m0.items():
            if abs(v) >= 1e-3 * mx:
                assert abs(abs(m90.get(n, m)) - abs(v)) / abs(v) < 0.05

    def test_phase_shift_law(self, portrait):
        # rotation by phi multiplies M_nm by exp(-j m phi) under the
        # conjugated projection; a 90 degree turn realizes it exactly
        dom = disk_mask(portrait)
        spec = BasisSpec("harmonic", 1.0)
        m0 = fmr_direct(radon_forward(portrait, dom, 128, 128), spec, 4)
        m90 = fmr_direct(radon_forward(rotate(portrait, 90.0), dom, 128, 128), spec, 4)
        mx = max(abs(v) for _, v in m0.items())
        for (n, m), v in m0.items():
            if abs(v) >= 1e-2 * mx:
                expected = v * np.exp(-1j * m * np.pi / 2)
                assert abs(m90.get(n, m) - expected) / abs(v) < 1e-6


class TestEnergy:
    def test_parseval_monotone_and_bounded(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 256, 256)
        vals = sino.values / sino.radius
        wr = np.gradient(sino.r_norm)
        energy = float(
            ((np.abs(vals) ** 2) * (wr * sino.r_norm)[:, None]).sum() * (2 * np.pi / sino.V)
        )
        spec = BasisSpec("harmonic", 1.0)
        prev = 0.0
        for K in (2, 5, 10):
            s = sum(abs(v) ** 2 for _, v in fmr_direct(sino, spec, K).items())
            assert s >= prev - 1e-12
            prev = s
        assert prev <= 1.01 * energy
        assert prev > 0.9 * energy  # K=10 already captures most of the portrait


class TestGuardsAndSets:
    def test_resolution_guard(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 16, 16)
        with pytest.raises(UnderResolved):
            fmr_direct(sino, BasisSpec("harmonic", 1.0), 5)

    def test_polynomial_direct_order_cap(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 128, 128)
        with pytest.raises(StabilityError):
            fmr_direct(sino, BasisSpec("polynomial", 2.0, p=3.0, q=2.0), 21)

    def test_order_lists_shapes(self):
        n_h, m_h = order_lists(BasisSpec("harmonic", 1.0), 3)
        assert list(n_h) == list(range(-3, 4))
        assert list(m_h) == list(range(-3, 4))
        n_p, m_p = order_lists(BasisSpec("polynomial", 1.0), 3)
        assert list(n_p) == list(range(0, 4))
        assert list(m_p) == list(range(-3, 4))

    def test_get_outside_set(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 2)
        with pytest.raises(IncompleteMomentSet):
            ms.get(5, 0)


class TestSerialization:
    def test_round_trip_identical_file(self, gauss_sino, tmp_path):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("polynomial", 2.0, p=3.0, q=2.0), 3)
        p1, p2 = tmp_path / "a.fmr", tmp_path / "b.fmr"
        save_momentset(ms, p1)
        back = load_momentset(p1)
        save_momentset(back, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert back.spec == ms.spec and back.K == ms.K
        flushed = flush_small(ms)
        assert np.array_equal(back.values, flushed.values)

    def test_unknown_header_key_tolerated(self, gauss_sino, tmp_path):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 1)
        path = tmp_path / "a.fmr"
        save_momentset(ms, path)
        lines = path.read_text().splitlines()
        lines.insert(1, "config fmr-config alpha=1")
        path.write_text("\n".join(lines) + "\n")
        back = load_momentset(path)
        assert back.K == 1

    def test_missing_line_rejected(self, gauss_sino, tmp_path):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 1)
        path = tmp_path / "a.fmr"
        save_momentset(ms, path)
        lines = path.read_text().strip().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(IncompleteMomentSet):
            load_momentset(path)

    def test_flush_small_zeroes_denormals(self, gauss_sino):
        _, sino = gauss_sino
        ms = fmr_direct(sino, BasisSpec("harmonic", 1.0), 2)
        vals = ms.values.copy()
        vals[0, 0] = 1e-20
        tweaked = MomentSet(vals, ms.n_orders, ms.m_orders, ms.spec, ms.K, ms.domain_tag)
        assert flush_small(tweaked).values[0, 0] == 0.0


class TestImageDomain:
    def test_symmetric_image_has_no_angular_content(self):
        size = 128
        t = (np.arange(size) + 0.5) / size * 2 - 1
        x, y = np.meshgrid(t, -t)
        rings = GrayImage(0.5 + 0.5 * np.cos(8 * np.pi * np.sqrt(x * x + y * y)) * (x * x + y * y <= 1))
        ms = fm_image(rings, disk_mask(rings), BasisSpec("harmonic", 1.0), 4)
        mx = max(abs(v) for _, v in ms.items())
        for (n, m), v in ms.items():
            if m != 0:
                assert abs(v) < 1e-3 * mx

    def test_zero_image_zero_moments(self):
        img = GrayImage(np.zeros((64, 64)))
        ms = fm_image(img, disk_mask(img), BasisSpec("harmonic", 1.0), 3)
        assert max(abs(v) for _, v in ms.items()) == 0.0

    def test_quarter_turn_magnitudes(self, portrait):
        spec = BasisSpec("harmonic", 1.0)
        dom = disk_mask(portrait)
        m0 = fm_image(portrait, dom, spec, 5)
        m90 = fm_image(rotate(portrait, 90.0), dom, spec, 5)
        mx = max(abs(v) for _, v in m0.items())
        for (n, m), v in m0.items():
            if abs(v) >= 1e-3 * mx:
                assert abs(abs(m90.get(n, m)) - abs(v)) / abs(v) < 0.05


class TestReconstruction:
    def test_zero_set_reconstructs_to_zero(self):
        spec = BasisSpec("harmonic", 1.0)
        n_o, m_o = order_lists(spec, 2)
        zero = MomentSet(
            np.zeros((n_o.size, m_o.size), dtype=complex), n_o, m_o, spec, 2, "radon"
        )
        sino, img = reconstruct(zero, (64, 64), 64)
        assert np.max(np.abs(sino.values)) == 0.0
        assert np.max(np.abs(img.pixels)) == 0.0

    def test_sinogram_rms_decreases_with_order(self, portrait):
        dom = disk_mask(portrait)
        sino = radon_forward(portrait, dom, 256, 256)
        spec = BasisSpec("harmonic", 1.0)
        errs = []
        for K in (5, 10, 20, 30):
            ms = fmr_direct(sino, spec, K)
            synth = synthesize_sinogram(ms, sino.U, sino.V, sino.radius)
            errs.append(float(np.sqrt(np.mean((synth.values - sino.values) ** 2))))
        assert all(a > b for a, b in zip(errs, errs[1:]))

    def test_domain_mismatch_rejected(self, portrait):
        ms = fm_image(portrait, disk_mask(portrait), BasisSpec("harmonic", 1.0), 2)
        with pytest.raises(ParamError):
            reconstruct(ms, (64, 64), 64)
        sino = radon_forward(portrait, disk_mask(portrait), 64, 64)
        msr = fmr_direct(sino, BasisSpec("harmonic", 1.0), 2)
        with pytest.raises(ParamError):
            reconstruct_image_series(msr, 64)

    def test_image_series_recovers_smooth_image(self):
        img = offset_gaussian(128, amp=0.7, x0=0.1, y0=0.05, sig=0.3)
        dom = disk_mask(img)
        ms = fm_image(img, dom, BasisSpec("harmonic", 1.0), 12)
        rec = reconstruct_image_series(ms, 128)
        mask = dom.pixel_mask(128, 128)
        mse = float(np.mean((rec.pixels[mask] - img.pixels[mask]) ** 2))
        assert mse < 5e-3
