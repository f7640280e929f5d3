"""Geometric-moment series route, checked against the sinogram pipeline.

The two routes share no quadrature code: one integrates projections of
the image, the other sums weighted geometric moments of the image
itself, so agreement on the integer-exponent parameter islands is a
genuine cross-validation.
"""
import numpy as np
import pytest

from fmr import (
    BasisSpec,
    GeometricMomentTable,
    GrayImage,
    SeriesTruncation,
    cross_validate,
    crossval_to_csv,
    disk_mask,
    fmr_direct,
    fmr_explicit_harmonic,
    fmr_explicit_polynomial,
    geometric_moment,
    radial_harmonic,
    radial_poly_direct,
    radon_forward,
    theta_integral,
    w1,
    w2_w3,
)
from fmr.errors import (
    ConstraintViolated,
    FractionalPowerOfNegative,
    ParamError,
    TruncationNotConverged,
)

ISLAND_TOL = 5e-2


class TestSeriesWeights:
    def test_theta_integral_frozen_values(self):
        assert theta_integral(0, 2, 0) == pytest.approx(np.pi, rel=1e-12)
        assert theta_integral(1, 1, 0) == pytest.approx(np.pi, rel=1e-12)
        assert theta_integral(1, 0, 1) == pytest.approx(-1j * np.pi, rel=1e-12)

    def test_theta_integral_structural_zero(self):
        # exact float zero: the series skips the paired geometric moment
        assert theta_integral(0, 1, 1) == 0.0

    def test_theta_integral_rejects_negative_exponents(self):
        with pytest.raises(FractionalPowerOfNegative):
            theta_integral(0, -1, 0)

    def test_w1_frozen_values(self):
        assert w1(2.0, 1, 0) == pytest.approx(0.56418958354775639, rel=1e-13)
        assert w1(2.0, -1, 2) == pytest.approx(-11.136655993663418, rel=1e-13)
        assert w1(2.0, 0, 0) == pytest.approx(np.sqrt(2 / (2 * np.pi)), rel=1e-13)
        assert w1(2.0, 0, 3) == 0.0  # n=0 keeps only the k=0 term

    def test_w2_w3_frozen_values(self):
        W2, W3 = w2_w3(2.0, 3.0, 2.0, 0, 0, 0)
        assert W2 == pytest.approx(2 * np.sqrt(3 / (2 * np.pi)), rel=1e-13)
        assert W3 == 1.0

    def test_harmonic_kernel_equals_its_series(self):
        r = np.linspace(0.05, 0.95, 7)
        alpha, n = 2.0, 2
        acc = np.zeros_like(r, dtype=complex)
        for k in range(41):
            acc += w1(alpha, n, k) * r ** (alpha * k + alpha / 2 - 1)
        assert np.max(np.abs(acc - radial_harmonic(alpha, n, r))) < 1e-5

    def test_polynomial_kernel_equals_its_series_nonterminating(self):
        # (p-q)/2 = 1/2: the s-sum is an infinite binomial series
        r = np.linspace(0.05, 0.95, 7)
        alpha, p, q, n = 2.0, 3.0, 2.0, 2
        acc = np.zeros_like(r)
        for k in range(n + 1):
            for s in range(200):
                W2, W3 = w2_w3(alpha, p, q, n, k, s)
                acc += W2 * W3 * r ** (alpha * (q / 2 + k + s) - 1)
        assert np.max(np.abs(acc - radial_poly_direct(alpha, p, q, n, r))) < 1e-9

    def test_polynomial_kernel_equals_its_series_terminating(self):
        # (p-q)/2 = 1: the s-sum stops after two terms
        r = np.linspace(0.05, 0.95, 7)
        alpha, p, q, n = 2.0, 4.0, 2.0, 2
        acc = np.zeros_like(r)
        for k in range(n + 1):
            for s in range(2):
                W2, W3 = w2_w3(alpha, p, q, n, k, s)
                acc += W2 * W3 * r ** (alpha * (q / 2 + k + s) - 1)
        assert np.max(np.abs(acc - radial_poly_direct(alpha, p, q, n, r))) < 1e-12


class TestGeometricMoments:
    def test_unit_disk_moments(self):
        size = 128
        t = (np.arange(size) + 0.5) / size * 2 - 1
        x, y = np.meshgrid(t, -t)
        disk = GrayImage((x * x + y * y <= 1.0).astype(float))
        dom = disk_mask(disk)
        assert geometric_moment(disk, dom, 0.0, 0.0) == pytest.approx(np.pi, rel=1e-2)
        assert geometric_moment(disk, dom, 2.0, 0.0) == pytest.approx(np.pi / 4, rel=1e-2)
        assert geometric_moment(disk, dom, 1.0, 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_table_matches_one_shot(self, blob):
        dom = disk_mask(blob)
        tab = GeometricMomentTable(blob, dom)
        assert tab.geometric(2.0, 1.0) == geometric_moment(blob, dom, 2.0, 1.0)

    def test_exponent_validation(self, blob):
        tab = GeometricMomentTable(blob, disk_mask(blob))
        with pytest.raises(ParamError):
            tab.geometric(-1.0, 0.0)
        with pytest.raises(FractionalPowerOfNegative):
            tab.geometric(0.5, 0.0)
        assert np.isfinite(tab.geometric(0.5, 0.0, positive_support=True))

    def test_exponent_audit(self, blob):
        # regression: the (n=3, m=0, p=4, q=2, alpha=2) series consumes a
        # fixed set of monomial moments; repeats must hit the memo only
        dom = disk_mask(blob)
        tab = GeometricMomentTable(blob, dom)
        spec = BasisSpec("polynomial", 2.0, p=4.0, q=2.0)
        fmr_explicit_polynomial(blob, dom, spec, 3, 0, table=tab)
        pairs = tab.geometric_exponents()
        assert len(pairs) == 31
        powers = {2.0, 4.0, 6.0, 8.0, 10.0}
        for xi1, xi2 in pairs:
            assert xi1 >= 0 and xi2 >= 0
            assert xi1 == int(xi1) and xi2 == int(xi2)
            assert xi1 + xi2 in powers
        fmr_explicit_polynomial(blob, dom, spec, 3, 0, table=tab)
        assert len(tab.geometric_exponents()) == 31


class TestCrossValidation:
    def test_harmonic_island(self, blob):
        dom = disk_mask(blob)
        rows = cross_validate(blob, dom, BasisSpec("harmonic", 2.0), 2, 2)
        assert len(rows) == 9
        assert max(r["rel_diff"] for r in rows) < ISLAND_TOL
        assert max(r["tail"] for r in rows) < 1e-3

    def test_polynomial_island(self, blob):
        dom = disk_mask(blob)
        spec = BasisSpec("polynomial", 2.0, p=4.0, q=2.0)
        rows = cross_validate(blob, dom, spec, 2, 2)
        assert max(r["rel_diff"] for r in rows) < ISLAND_TOL

    def test_negative_orders_spot(self, blob):
        dom = disk_mask(blob)
        sino = radon_forward(blob, dom, 96, 96)
        ms = fmr_direct(sino, BasisSpec("harmonic", 2.0), 2)
        for n, m in ((2, -2), (-2, 1), (1, -1)):
            ex = fmr_explicit_harmonic(blob, dom, 2.0, n, m)
            im = ms.get(n, m)
            assert abs(ex - im) / abs(im) < ISLAND_TOL

    def test_value_stable_under_deeper_truncation(self, blob):
        dom = disk_mask(blob)
        vals = [
            fmr_explicit_harmonic(blob, dom, 2.0, 2, 0, trunc=SeriesTruncation(k_max=km))
            for km in (12, 16, 20)
        ]
        assert abs(vals[0] - vals[2]) < 1e-6
        assert abs(vals[1] - vals[2]) < abs(vals[0] - vals[2]) + 1e-12

    def test_csv_output(self, blob, tmp_path):
        dom = disk_mask(blob)
        rows = cross_validate(blob, dom, BasisSpec("harmonic", 2.0), 1, 1)
        path = tmp_path / "xval.csv"
        crossval_to_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "n,m,implicit_re,implicit_im,explicit_re,explicit_im,rel_diff,tail"
        assert len(lines) == 1 + len(rows)


class TestGuards:
    def test_shallow_truncation_raises(self, blob):
        dom = disk_mask(blob)
        with pytest.raises(TruncationNotConverged):
            fmr_explicit_harmonic(blob, dom, 2.0, 2, 0, trunc=SeriesTruncation(k_max=4))

    def test_rim_heavy_image_fails_to_converge(self):
        size = 96
        t = (np.arange(size) + 0.5) / size * 2 - 1
        x, y = np.meshgrid(t, -t)
        rho = np.sqrt(x * x + y * y)
        ring = GrayImage(np.exp(-((rho - 0.9) ** 2) / (2 * 0.03**2)))
        with pytest.raises(TruncationNotConverged):
            fmr_explicit_harmonic(ring, disk_mask(ring), 2.0, 2, 0)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 3.0])
    def test_series_needs_even_alpha(self, blob, alpha):
        dom = disk_mask(blob)
        with pytest.raises(FractionalPowerOfNegative):
            fmr_explicit_harmonic(blob, dom, alpha, 1, 1)

    def test_polynomial_family_checks(self, blob):
        dom = disk_mask(blob)
        with pytest.raises(ParamError):
            fmr_explicit_polynomial(blob, dom, BasisSpec("harmonic", 2.0), 1, 0)
        spec = BasisSpec("polynomial", 2.0, p=4.0, q=2.0)
        with pytest.raises(ParamError):
            fmr_explicit_polynomial(blob, dom, spec, -1, 0)

    def test_truncation_validation(self):
        for kw in (dict(k_max=-1), dict(s_max=-2), dict(t_max=-3), dict(tail_tol=-1.0)):
            with pytest.raises(ConstraintViolated):
                SeriesTruncation(**kw)
