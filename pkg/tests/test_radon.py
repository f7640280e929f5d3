"""Forward/inverse projection, grids, noise-gain accounting, serialization."""
import numpy as np
import pytest

from fmr import (
    GrayImage,
    disk_mask,
    load_sinogram,
    radon_forward,
    radon_inverse,
    rotate,
    save_sinogram,
    snr_gain,
    snr_gain_theoretical,
)
from fmr.radon import Sinogram, full_turn_angles, sinogram_to_csv, uniform_radii, warped_radii
from fmr.errors import DegenerateGrid, NegativeVariance


def unit_disk(size=256):
    t = (np.arange(size) + 0.5) / size * 2 - 1
    x, y = np.meshgrid(t, -t)
    return GrayImage((x * x + y * y <= 1.0).astype(float))


class TestGrids:
    def test_uniform_radii_are_cell_midpoints(self):
        assert np.allclose(uniform_radii(8), (np.arange(8) + 0.5) / 8)

    def test_warped_radii_uniform_in_gamma(self):
        for alpha in (0.5, 1.0, 2.0):
            gam = warped_radii(16, alpha) ** alpha
            assert gam[0] == pytest.approx(0.0, abs=1e-15)
            assert np.allclose(np.diff(gam), 1.0 / 16)

    def test_full_turn_angles(self):
        th = full_turn_angles(8)
        assert th[0] == 0.0 and len(th) == 8
        assert np.allclose(np.diff(th), np.pi / 4)
        assert th[-1] < 2 * np.pi


class TestForwardProjection:
    def test_chord_length_oracle(self):
        # line integral through the unit disk is the chord 2 R sqrt(1-r^2)
        disk = unit_disk()
        dom = disk_mask(disk)
        sino = radon_forward(disk, dom, 128, 8)
        chord = 2.0 * dom.radius * np.sqrt(np.maximum(0.0, 1.0 - sino.r_norm**2))
        sel = sino.r_norm <= 0.9
        rel = np.abs(sino.values[sel, :] - chord[sel, None]) / chord[sel, None]
        assert rel.max() < 0.02

    def test_angle_independence_for_symmetric_image(self):
        disk = unit_disk(128)
        sino = radon_forward(disk, disk_mask(disk), 64, 32)
        spread = sino.values.max(axis=1) - sino.values.min(axis=1)
        assert spread.max() < 1e-9

    def test_quarter_rotation_is_circular_shift(self, portrait):
        dom = disk_mask(portrait)
        s0 = radon_forward(portrait, dom, 128, 128)
        s90 = radon_forward(rotate(portrait, 90.0), dom, 128, 128)
        rolled = np.roll(s0.values, 128 // 4, axis=1)
        assert np.max(np.abs(rolled - s90.values)) < 1e-6

    def test_zero_image_zero_sinogram(self):
        img = GrayImage(np.zeros((64, 64)))
        sino = radon_forward(img, disk_mask(img), 32, 16)
        assert np.max(np.abs(sino.values)) == 0.0

    def test_linearity(self, portrait):
        dom = disk_mask(portrait)
        half = GrayImage(portrait.pixels * 0.5)
        a = radon_forward(portrait, dom, 64, 32).values
        b = radon_forward(half, dom, 64, 32).values
        assert np.max(np.abs(a - 2 * b)) < 1e-9

    def test_degenerate_grid(self, portrait):
        with pytest.raises(DegenerateGrid):
            radon_forward(portrait, disk_mask(portrait), 1, 16)

    def test_warp_alpha_recorded(self, portrait):
        sino = radon_forward(portrait, disk_mask(portrait), 32, 16, warp_alpha=2.0)
        assert sino.warp_alpha == 2.0
        assert np.allclose(sino.r_norm, warped_radii(32, 2.0))


class TestInverse:
    def test_disk_round_trip(self):
        disk = unit_disk()
        sino = radon_forward(disk, disk_mask(disk), 256, 256)
        rec = radon_inverse(sino, 128)
        ref = unit_disk(128)
        mse = float(np.mean((rec.pixels - ref.pixels) ** 2))
        assert mse < 0.01

    def test_odd_angle_count_rejected(self):
        disk = unit_disk(64)
        sino = radon_forward(disk, disk_mask(disk), 32, 15)
        with pytest.raises(DegenerateGrid):
            radon_inverse(sino, 64)


class TestSnrGain:
    def test_theoretical_value_exact(self):
        # mean 0.5, variance 0.1, 256 lines: 255 * 0.25 / 0.1
        assert snr_gain_theoretical(0.5, 0.1, 256) == 637.5

    def test_measured_within_factor_two(self, portrait):
        rep = snr_gain(portrait, 0.1, seed=5, V=256)
        ratio = rep.mean_measured() / rep.mean_theoretical()
        assert 0.5 < ratio < 2.0

    def test_guards(self, portrait):
        with pytest.raises(NegativeVariance):
            snr_gain(portrait, -0.1, seed=0, V=16)
        with pytest.raises(DegenerateGrid):
            snr_gain(portrait, 0.1, seed=0, V=1)


class TestSerialization:
    def test_binary_round_trip_exact(self, portrait, tmp_path):
        sino = radon_forward(portrait, disk_mask(portrait), 48, 32, warp_alpha=1.5)
        path = tmp_path / "s.sino"
        save_sinogram(sino, path)
        back = load_sinogram(path)
        assert np.array_equal(back.values, sino.values)
        assert np.array_equal(back.r_norm, sino.r_norm)
        assert np.array_equal(back.theta, sino.theta)
        assert back.radius == sino.radius
        assert back.warp_alpha == sino.warp_alpha

    def test_truncated_payload_rejected(self, portrait, tmp_path):
        sino = radon_forward(portrait, disk_mask(portrait), 16, 8)
        path = tmp_path / "s.sino"
        save_sinogram(sino, path)
        path.write_bytes(path.read_bytes()[:-16])
        with pytest.raises(DegenerateGrid):
            load_sinogram(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "s.sino"
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(DegenerateGrid):
            load_sinogram(path)

    def test_csv_layout(self, tmp_path):
        disk = unit_disk(64)
        sino = radon_forward(disk, disk_mask(disk), 8, 4)
        path = tmp_path / "s.csv"
        sinogram_to_csv(sino, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "u,v,r_norm,theta,value"
        assert len(lines) == 1 + 8 * 4

    def test_constructor_rejects_mismatched_axes(self):
        with pytest.raises(DegenerateGrid):
            Sinogram(np.zeros((4, 4)), np.linspace(0.1, 1, 5), np.zeros(4), radius=1.0)
