"""Moment transforms of sinograms (FMR) and images (FM), and reconstruction.

The inner product is taken over the unit disk in normalized polar
coordinates with measure r dr dtheta.  Sinogram values are divided by
the stored disk radius first, which converts pixel-unit line integrals
into the normalized units the basis lives in; image-domain moments use
intensities directly.

Three routes compute the same Radon-domain coefficients:

* fmr_direct: trapezoid-in-r / exact-DFT-in-theta quadrature on the
  sinogram's native grid, with the direct radial formulas (slow
  reference for both families).
* fmr_harmonic_fft: the power-warped substitution gamma = r^alpha turns
  the harmonic inner product into a plain 2-D Fourier transform; one FFT
  yields every order at once, so the order cap K does not affect cost.
* fmr_polynomial: recursive radial tables with the fmr_direct
  quadrature; stable far beyond the factorial form's order limit.
"""
from __future__ import annotations

import dataclasses
import math
from pathlib import Path

import numpy as np

from .basis import BasisSpec, radial_harmonic, radial_matrix, radial_poly_direct
from .errors import (
    GridMismatch,
    IncompleteMomentSet,
    ParamError,
    StabilityError,
    UnderResolved,
)
from .image import DiskDomain, GrayImage, bilinear_sample
from .radon import Sinogram, full_turn_angles, radon_inverse, uniform_radii, warped_radii

_MAGIC = "FMRMOM1"
_FLUSH_REL = 1e-12


@dataclasses.dataclass
class MomentSet:
    """Complex coefficients over the order set S(K).

    Harmonic layout has radial orders -K..K, polynomial 0..K; angular
    orders always run -K..K.  domain_tag records whether the transform
    consumed a sinogram ("radon") or an image ("image").
    """

    values: np.ndarray  # shape (len(n_orders), 2K+1)
    n_orders: np.ndarray
    m_orders: np.ndarray
    spec: BasisSpec
    K: int
    domain_tag: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        self.n_orders = np.asarray(self.n_orders, dtype=np.int64)
        self.m_orders = np.asarray(self.m_orders, dtype=np.int64)
        if self.values.shape != (self.n_orders.size, self.m_orders.size):
            raise IncompleteMomentSet("coefficient grid does not match order lists")
        if not np.isfinite(self.values).all():
            raise IncompleteMomentSet("coefficients must be finite")
        if self.domain_tag not in ("radon", "image"):
            raise ParamError(f"unknown domain tag {self.domain_tag!r}")

    def get(self, n: int, m: int) -> complex:
        ni = np.nonzero(self.n_orders == n)[0]
        mi = np.nonzero(self.m_orders == m)[0]
        if ni.size == 0 or mi.size == 0:
            raise IncompleteMomentSet(f"order ({n},{m}) outside this set")
        return complex(self.values[ni[0], mi[0]])

    def items(self):
        """Yield ((n, m), coefficient) in lexicographic (n, m) order."""
        for i, n in enumerate(self.n_orders):
            for j, m in enumerate(self.m_orders):
                yield (int(n), int(m)), complex(self.values[i, j])


def order_lists(spec: BasisSpec, K: int) -> tuple[np.ndarray, np.ndarray]:
    if K < 0:
        raise ParamError("K must be >= 0")
    m = np.arange(-K, K + 1)
    n = np.arange(0, K + 1) if spec.family == "polynomial" else np.arange(-K, K + 1)
    return n, m


def _radial_weights(r: np.ndarray) -> np.ndarray:
    """Trapezoid weights on the native nodes, closed over [0,1].

    The integrand of every moment carries the factor r, so it vanishes
    at r=0; the left closure uses that known zero, the right closure
    extends the last node's value to the rim.
    """
    w = np.zeros_like(r)
    if r.size == 1:
        return np.array([1.0])
    w[1:-1] = (r[2:] - r[:-2]) / 2.0
    w[0] = (r[1] - r[0]) / 2.0 + r[0] / 2.0
    w[-1] = (r[-1] - r[-2]) / 2.0 + (1.0 - r[-1])
    return w


def _angular_spectrum(values: np.ndarray, m_orders: np.ndarray) -> np.ndarray:
    """Columns F[u, j] = sum_v values[u,v] exp(-j m_j theta_v) * dtheta."""
    V = values.shape[1]
    spec = np.fft.fft(values, axis=1) * (2.0 * np.pi / V)
    return spec[:, np.mod(m_orders, V)]


def _basis_rows(spec: BasisSpec, n_orders, r: np.ndarray, direct: bool) -> np.ndarray:
    """Radial values per order; rows at r=0 are the (zero) integrand limit."""
    pos = r > 0
    rows = np.zeros((len(n_orders), r.size), dtype=np.complex128)
    if spec.family == "harmonic":
        for i, n in enumerate(n_orders):
            rows[i, pos] = radial_harmonic(spec.alpha, int(n), r[pos])
    elif direct:
        for i, n in enumerate(n_orders):
            rows[i, pos] = radial_poly_direct(spec.alpha, spec.p, spec.q, int(n), r[pos])
    else:
        rows[:, pos] = radial_matrix(spec, [int(n) for n in n_orders], r[pos])
    return rows


def _quadrature(
    values: np.ndarray,
    r: np.ndarray,
    spec: BasisSpec,
    K: int,
    domain_tag: str,
    direct_radial: bool,
    warp_alpha: float | None = None,
) -> MomentSet:
    n_orders, m_orders = order_lists(spec, K)
    F = _angular_spectrum(values, m_orders)
    B = _basis_rows(spec, n_orders, r, direct=direct_radial)
    if warp_alpha is None:
        W = np.conj(B) * (_radial_weights(r) * r)[None, :]
    else:
        # warped grids are uniform in gamma = r^alpha, so the trapezoid
        # lives there; the integrand picks up the Jacobian dr/dgamma
        a = warp_alpha
        gam = np.arange(r.size) / r.size
        jac = np.zeros_like(r)
        jac[1:] = gam[1:] ** (1.0 / a - 1.0) / a
        W = np.conj(B) * (_radial_weights(gam) * r * jac)[None, :]
        if spec.family == "harmonic" and a == 2.0:
            # R_n(r) r dr/dgamma has the finite limit sqrt(1/4pi) here
            W[:, 0] = np.sqrt(1.0 / (4.0 * np.pi)) * _radial_weights(gam)[0]
    out = W @ F
    return MomentSet(out, n_orders, m_orders, spec, K, domain_tag)


def _check_resolution(U: int, V: int, K: int) -> None:
    if U < 4 * K or V < 4 * K:
        raise UnderResolved(f"grid {U}x{V} below the 4K Nyquist guard for K={K}")


def fmr_direct(sino: Sinogram, spec: BasisSpec, K: int) -> MomentSet:
    """Slow-reference FMR coefficients on the sinogram's native grid.

    Polynomial radial factors use the direct factorial formula here, so
    this path doubles as the oracle for the recursive route; its order
    cap therefore applies.
    """
    _check_resolution(sino.U, sino.V, K)
    if spec.family == "polynomial" and K > 20:
        raise StabilityError("direct polynomial reference capped at K <= 20")
    return _quadrature(
        sino.values / sino.radius,
        sino.r_norm,
        spec,
        K,
        "radon",
        direct_radial=True,
        warp_alpha=sino.warp_alpha,
    )


def fmr_polynomial(sino: Sinogram, spec: BasisSpec, K: int) -> MomentSet:
    """Polynomial-family FMR via recursive radial tables."""
    if spec.family != "polynomial":
        raise ParamError("fmr_polynomial needs a polynomial BasisSpec")
    _check_resolution(sino.U, sino.V, K)
    return _quadrature(
        sino.values / sino.radius,
        sino.r_norm,
        spec,
        K,
        "radon",
        direct_radial=False,
        warp_alpha=sino.warp_alpha,
    )


def fmr_harmonic_fft(sino: Sinogram, alpha: float, K: int) -> MomentSet:
    """Harmonic FMR through one 2-D FFT on the power-warped grid.

    The sinogram must be sampled at r_u = (u/M)^(1/alpha) on a square
    M x M grid.  Runtime is governed by M alone.
    """
    if sino.U != sino.V:
        raise GridMismatch("fast path expects a square M x M grid")
    M = sino.U
    expected = warped_radii(M, alpha)
    if sino.warp_alpha is None or not np.allclose(sino.r_norm, expected, atol=1e-12):
        raise GridMismatch(f"sinogram not on the warped grid for alpha={alpha}")
    _check_resolution(M, M, K)

    S = warp_rows(M, alpha)[:, None] * (sino.values / sino.radius)
    spectrum = np.fft.fft2(S) * (2.0 * np.pi / M**2)
    spec = BasisSpec("harmonic", alpha)
    n_orders, m_orders = order_lists(spec, K)
    out = spectrum[np.ix_(np.mod(n_orders, M), np.mod(m_orders, M))]
    return MomentSet(out, n_orders, m_orders, spec, K, "radon")


def warp_rows(M: int, alpha: float) -> np.ndarray:
    """Per-row multipliers turning warped sinogram samples into the FFT input.

    Substituting gamma = r^alpha into the inner product leaves the
    integrand weight sqrt(gamma^(2/alpha-1) / (2 pi alpha)).  Edge rows
    carry the same conventions as the reference trapezoid in gamma: the
    u=0 endpoint value is zero for alpha < 2 and finite (half-weighted)
    at alpha = 2; for alpha > 2 it is singular, so the first cell gets
    the weight's analytic cell average instead.  The last row stands in
    for the uncovered sliver up to gamma = 1.
    """
    gam = np.arange(M) / M
    expo = 2.0 / alpha - 1.0
    rows = np.empty(M)
    rows[1:] = np.sqrt(gam[1:] ** expo / (2.0 * np.pi * alpha))
    if alpha > 2.0:
        rows[0] = np.sqrt((1.0 / M) ** expo / (2.0 * np.pi * alpha)) * (
            2.0 * alpha / (2.0 + alpha)
        )
    elif alpha == 2.0:
        rows[0] = np.sqrt(1.0 / (4.0 * np.pi)) / 2.0
    else:
        rows[0] = 0.0
    rows[-1] *= 1.5
    return rows


def polar_resample(
    img: GrayImage, domain: DiskDomain, U: int, V: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample an image on the uniform polar grid; returns (values, r, theta)."""
    r = uniform_radii(U)
    theta = full_turn_angles(V)
    r_pix = r * domain.radius
    x = r_pix[:, None] * np.cos(theta)[None, :]
    y = r_pix[:, None] * np.sin(theta)[None, :]
    vals = bilinear_sample(img.pixels, domain.cy - y, domain.cx + x)
    return vals, r, theta


def fm_image(
    img: GrayImage,
    domain: DiskDomain,
    spec: BasisSpec,
    K: int,
    U: int | None = None,
    V: int | None = None,
) -> MomentSet:
    """Image-domain moments (FM): the baseline every comparison is made against.

    The image is resampled onto the uniform polar grid (side length
    defaults to the larger image dimension) and fed through the same
    quadrature as fmr_direct, with the stable radial evaluators.
    """
    N = max(img.width, img.height)
    U = N if U is None else U
    V = N if V is None else V
    _check_resolution(U, V, K)
    vals, r, _ = polar_resample(img, domain, U, V)
    return _quadrature(vals, r, spec, K, "image", direct_radial=False)


def synthesize_sinogram(ms: MomentSet, U: int, V: int, radius: float) -> Sinogram:
    """Evaluate the truncated series sum M_nm R_n(r) A_m(theta) on a
    uniform grid, returning pixel-unit sinogram values."""
    r = uniform_radii(U)
    theta = full_turn_angles(V)
    B = _basis_rows(ms.spec, ms.n_orders, r, direct=False)
    A = np.exp(1j * np.outer(ms.m_orders, theta))
    synth = (B.T @ ms.values @ A).real * radius
    return Sinogram(synth, r, theta, radius=radius, warp_alpha=None)


def reconstruct(
    ms: MomentSet, grid: tuple[int, int], out_size: int
) -> tuple[Sinogram, GrayImage]:
    """Series reconstruction of the sinogram plus filtered back-projection."""
    if ms.domain_tag != "radon":
        raise ParamError("reconstruct consumes Radon-domain moments")
    n_ref, m_ref = order_lists(ms.spec, ms.K)
    if ms.n_orders.size != n_ref.size or ms.m_orders.size != m_ref.size:
        raise IncompleteMomentSet("moment set does not cover S(K)")
    U, V = grid
    sino = synthesize_sinogram(ms, U, V, radius=out_size / 2.0)
    return sino, radon_inverse(sino, out_size)


def reconstruct_image_series(ms: MomentSet, out_size: int) -> GrayImage:
    """Evaluate image-domain moments back into an image (FM counterpart).

    The truncated series approximates intensities directly; values are
    clipped to [0,1] and zeroed outside the inscribed disk.
    """
    if ms.domain_tag != "image":
        raise ParamError("series evaluation consumes image-domain moments")
    n = out_size
    c = (n - 1) / 2.0
    x = np.tile((np.arange(n) - c) / (n / 2.0), (n, 1))
    y = np.tile((c - np.arange(n)) / (n / 2.0), (n, 1)).T
    rho = np.sqrt(x * x + y * y)
    phi = np.arctan2(y, x)
    mask = rho <= 1.0

    rho_flat = rho[mask]
    # keep radial arguments off the basis singularity at the exact center
    rho_flat = np.maximum(rho_flat, 0.5 / n)
    phi_flat = phi[mask]
    B = _basis_rows(ms.spec, ms.n_orders, rho_flat, direct=False)
    A = np.exp(1j * np.outer(ms.m_orders, phi_flat))
    series = np.einsum("nm,np,mp->p", ms.values, B, A)
    out = np.zeros((n, n))
    out[mask] = np.clip(series.real, 0.0, 1.0)
    return GrayImage(out)


def flush_small(ms: MomentSet) -> MomentSet:
    """Zero coefficients below 1e-12 of the largest magnitude."""
    mags = np.abs(ms.values)
    tiny = mags < _FLUSH_REL * (mags.max() if mags.size else 0.0)
    vals = ms.values.copy()
    vals[tiny] = 0.0
    return MomentSet(vals, ms.n_orders, ms.m_orders, ms.spec, ms.K, ms.domain_tag)


def save_momentset(ms: MomentSet, path: str | Path) -> None:
    """Versioned text format; identical files mean identical moment sets."""
    ms = flush_small(ms)
    lines = [
        _MAGIC,
        f"family {ms.spec.family}",
        f"alpha {ms.spec.alpha:.17g}",
        f"p {ms.spec.p:.17g}",
        f"q {ms.spec.q:.17g}",
        f"K {ms.K}",
        f"domain {ms.domain_tag}",
        "end-header",
    ]
    for (n, m), c in ms.items():
        lines.append(f"{n} {m} {c.real:.17g} {c.imag:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_momentset(path: str | Path) -> MomentSet:
    text = Path(path).read_text(encoding="ascii").splitlines()
    if not text or text[0] != _MAGIC:
        raise IncompleteMomentSet(f"not a moment-set file: {path}")
    header: dict[str, str] = {}
    body_start = None
    for i, line in enumerate(text[1:], start=1):
        if line == "end-header":
            body_start = i + 1
            break
        key, _, val = line.partition(" ")
        header[key] = val
    if body_start is None:
        raise IncompleteMomentSet("missing end-header line")
    try:
        spec = BasisSpec(
            header["family"],
            float(header["alpha"]),
            p=float(header["p"]),
            q=float(header["q"]),
        )
        K = int(header["K"])
        domain_tag = header["domain"]
    except KeyError as exc:
        raise IncompleteMomentSet(f"header missing field {exc}") from exc

    n_orders, m_orders = order_lists(spec, K)
    values = np.full((n_orders.size, m_orders.size), np.nan, dtype=np.complex128)
    for line in text[body_start:]:
        if not line.strip():
            continue
        n_s, m_s, re_s, im_s = line.split()
        i = int(n_s) - int(n_orders[0])
        j = int(m_s) + K
        values[i, j] = complex(float(re_s), float(im_s))
    if np.isnan(values).any():
        raise IncompleteMomentSet("coefficient lines missing for part of S(K)")
    return MomentSet(values, n_orders, m_orders, spec, K, domain_tag)
