"""Shared fixtures: deterministic test images and a tolerance helper.

Session-scoped fixtures hold only immutable inputs (GrayImage wraps a
clipped copy); tests must not mutate pixel arrays in place.
"""
import numpy as np
import pytest

from fmr import GrayImage, synthetic_suite


def three_lobe_blob(size: int = 96) -> GrayImage:
    """Concentrated asymmetric blob, mass inside rho ~ 0.5.

    Used for the explicit-series cross checks: the monomial split of
    (x cos t + y sin t)^P amplifies cancellation error like (2 rho)^P,
    so the oracle image must keep its mass well inside the half-radius.
    """
    t = (np.arange(size) + 0.5) / size * 2 - 1
    x, y = np.meshgrid(t, -t)
    img = np.zeros_like(x)
    for amp, r0, ang, sig in (
        (0.85, 0.20, 0.4, 0.095),
        (0.55, 0.22, 2.5, 0.085),
        (0.40, 0.18, 4.4, 0.075),
    ):
        img += amp * np.exp(
            -((x - r0 * np.cos(ang)) ** 2 + (y - r0 * np.sin(ang)) ** 2) / (2 * sig**2)
        )
    return GrayImage(np.clip(img, 0, 1))


def offset_gaussian(size: int, amp=0.8, x0=0.25, y0=-0.15, sig=0.2) -> GrayImage:
    """Gaussian with a closed-form sinogram; the moment-oracle image."""
    t = (np.arange(size) + 0.5) / size * 2 - 1
    x, y = np.meshgrid(t, -t)
    return GrayImage(amp * np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / (2 * sig**2)))


@pytest.fixture(scope="session")
def blob() -> GrayImage:
    return three_lobe_blob()


@pytest.fixture(scope="session")
def suite10():
    return synthetic_suite(10, 128)


@pytest.fixture(scope="session")
def portrait(suite10) -> GrayImage:
    return dict(suite10)["portrait"]


@pytest.fixture(scope="session")
def spokes(suite10) -> GrayImage:
    return dict(suite10)["spokes"]


def rel_err(got: complex, ref: complex) -> float:
    return abs(got - ref) / abs(ref)
