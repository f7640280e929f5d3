"""Benchmark harness: histogram stability, reconstruction curves, recognition.

Three desk-scale studies compare Radon-domain moments (FMR) against their
image-domain counterpart (FM): single-feature magnitude histograms under
noise, MSRE/SSIM reconstruction curves against the truncation order K, and
a rotation-plus-noise minimum-distance recognition benchmark.  Every run is
deterministic for a fixed seed; accuracy percentages are exact rational
counts scaled by 100, so repeated runs agree bit for bit.

A generated suite of 128x128 grayscale images stands in for the photo
collections used at full scale; :func:`synthetic_suite` enumerates them in
a fixed order so class labels are stable across runs.
"""

from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .basis import BasisSpec
from .errors import ConstraintViolated, EmptyDataset, ParamError
from .features import FeatureVector, magnitude_features, min_distance_classify
from .image import GrayImage, add_gaussian_noise, disk_mask, load_gray, rotate
from .metrics import mse_reconstruction_error, ssim
from .moments import fm_image, fmr_direct, reconstruct, reconstruct_image_series
from .radon import radon_forward

_RASTER_SUFFIXES = (".png", ".pgm", ".pnm")


@dataclasses.dataclass(frozen=True)
class MethodSpec:
    """One benchmarked representation: a basis plus the domain it acts in.

    domain "radon" projects through the sinogram (FMR); "image" applies the
    same basis to the polar-resampled image (FM).  Paired comparisons use
    two MethodSpecs differing only in domain.
    """

    name: str
    domain: str
    basis: BasisSpec
    K: int
    weighting: str = "none"

    def __post_init__(self) -> None:
        if self.domain not in ("radon", "image"):
            raise ParamError(f"domain must be radon or image, got {self.domain!r}")
        if self.K < 1:
            raise ConstraintViolated(f"K must be >= 1, got {self.K}")
        if self.weighting not in ("none", "n_plus_1"):
            raise ParamError(f"unknown weighting {self.weighting!r}")


@dataclasses.dataclass(frozen=True)
class BenchmarkConfig:
    """Recognition-benchmark protocol: methods x variances x angles."""

    methods: tuple[MethodSpec, ...]
    variances: tuple[float, ...]
    angles: tuple[float, ...]
    seed: int
    dataset: str | None = None

    def __post_init__(self) -> None:
        if not self.methods:
            raise ConstraintViolated("need at least one method")
        for v in self.variances:
            if not 0.0 <= v <= 1.0:
                raise ConstraintViolated(f"variance {v} outside [0,1]")
        for a in self.angles:
            if not 0.0 <= a < 360.0:
                raise ConstraintViolated(f"angle {a} outside [0,360)")


def _trial_seed(seed: int, *indices: int) -> int:
    """Stable per-trial RNG seed; independent of evaluation order."""
    return int(np.random.SeedSequence((seed,) + indices).generate_state(1)[0])


def _fft_grid(size: int, K: int) -> int:
    """Polar grid side: covers the image and the 4K resolution guard."""
    need = max(size, 4 * K)
    g = 1
    while g < need:
        g *= 2
    return g


def extract_features(img: GrayImage, method: MethodSpec) -> FeatureVector:
    """Magnitude feature vector of one image under one method."""
    dom = disk_mask(img)
    grid = _fft_grid(max(img.height, img.width), method.K)
    if method.domain == "radon":
        sino = radon_forward(img, dom, grid, grid)
        ms = fmr_direct(sino, method.basis, method.K)
    else:
        ms = fm_image(img, dom, method.basis, method.K, U=grid, V=grid)
    return magnitude_features(ms, weighting=method.weighting)


# ---------------------------------------------------------------------------
# synthetic image suite


def _coords(n: int):
    yy, xx = np.mgrid[0:n, 0:n].astype(float)
    c = (n - 1) / 2.0
    x = (xx - c) / (n / 2.0)
    y = (c - yy) / (n / 2.0)
    return x, y, np.hypot(x, y), np.arctan2(y, x)


def _portrait(n: int) -> np.ndarray:
    x, y, rho, phi = _coords(n)
    img = 0.30 + 0.15 * y
    img += 0.04 * np.sin(14 * np.pi * x) * np.sin(14 * np.pi * y)
    img += 0.38 * np.exp(-((x / 0.52) ** 2 + ((y - 0.08) / 0.62) ** 2) ** 2)
    hair = np.exp(-(((rho - 0.55) / 0.16) ** 2)) * (y > 0.05)
    img += hair * (0.08 * np.sin(34 * phi) - 0.16)
    for sx in (-0.20, 0.20):
        img -= 0.30 * np.exp(-(((x - sx) / 0.075) ** 2 + ((y - 0.18) / 0.055) ** 2))
    img -= 0.22 * np.exp(-((x / 0.17) ** 2 + ((y + 0.32) / 0.05) ** 2))
    img += 0.10 * np.exp(-((x / 0.055) ** 2 + ((y - 0.02) / 0.11) ** 2))
    img += ((y < -0.55) & (rho < 0.98)) * 0.10 * np.sign(np.sin(24 * np.pi * x))
    return img


def _smooth_field(n: int, seed: int, cutoff: float) -> np.ndarray:
    """Random field with the spectrum cut at ``cutoff`` of Nyquist."""
    rng = np.random.default_rng(seed)
    spec = np.fft.fft2(rng.standard_normal((n, n)))
    f = np.hypot(*np.meshgrid(np.fft.fftfreq(n), np.fft.fftfreq(n), indexing="ij"))
    field = np.fft.ifft2(spec * (f < cutoff * 0.5)).real
    lo, hi = field.min(), field.max()
    return (field - lo) / (hi - lo) if hi > lo else np.full((n, n), 0.5)


def _suite_builders():
    def rings(x, y, rho, phi):
        return 0.5 + 0.45 * np.cos(2 * np.pi * 5 * rho)

    def spokes(x, y, rho, phi):
        return 0.5 + 0.45 * np.cos(9 * phi) * (rho < 0.95)

    def checker(x, y, rho, phi):
        n = x.shape[0]
        tile = ((np.arange(n) // 8)[:, None] + (np.arange(n) // 8)[None, :]) % 2
        return 0.15 + 0.70 * tile

    def blobs(x, y, rho, phi):
        img = np.full_like(x, 0.34)
        for k in range(4):
            a = np.pi * k / 2 + 0.4
            img += 0.58 * np.exp(
                -(((x - 0.68 * np.cos(a)) ** 2 + (y - 0.68 * np.sin(a)) ** 2) / 0.030)
            )
        return img

    def bars(x, y, rho, phi):
        return 0.5 + 0.4 * np.sin(2 * np.pi * 7 * y)

    def ramp(x, y, rho, phi):
        return 0.5 + 0.45 * x

    def spiral(x, y, rho, phi):
        return 0.5 + 0.4 * np.cos(6 * phi + 10 * np.pi * rho)

    def crescent(x, y, rho, phi):
        ring = (rho > 0.45) & (rho < 0.80)
        mouth = np.abs(np.mod(phi - 0.3 + np.pi, 2 * np.pi) - np.pi) < 2.1
        return 0.15 + 0.75 * (ring & mouth)

    def triangle(x, y, rho, phi):
        inside = (y < 0.6) & (y > 1.8 * x - 0.7) & (y > -1.8 * x - 0.7)
        return 0.2 + 0.7 * inside

    def texture_lf(x, y, rho, phi):
        return _smooth_field(x.shape[0], 101, 0.12)

    def texture_hf(x, y, rho, phi):
        return 0.5 * _smooth_field(x.shape[0], 102, 0.12) + 0.5 * _smooth_field(
            x.shape[0], 103, 0.55
        )

    def petals(x, y, rho, phi):
        return 0.15 + 0.75 * np.cos(3 * phi) ** 2 * np.exp(-((rho / 0.7) ** 4))

    def target(x, y, rho, phi):
        return 0.2 + 0.6 * (np.floor(6 * rho) % 2)

    def wedge(x, y, rho, phi):
        return (np.mod(phi, 2 * np.pi) / (2 * np.pi)) * (rho < 1)

    def dots(x, y, rho, phi):
        img = np.full_like(x, 0.2)
        for gx in (-0.6, -0.2, 0.2, 0.6):
            for gy in (-0.6, -0.2, 0.2, 0.6):
                img += 0.55 * np.exp(-(((x - gx) ** 2 + (y - gy) ** 2) / 0.008))
        return img

    def cross(x, y, rho, phi):
        return 0.2 + 0.65 * ((np.abs(x) < 0.18) | (np.abs(y) < 0.18))

    def dome(x, y, rho, phi):
        return np.clip(1.0 - rho**2, 0, 1) * 0.9

    def saddle(x, y, rho, phi):
        return 0.5 + 0.8 * x * y

    def weave(x, y, rho, phi):
        base = 0.15 + 0.70 * (((np.floor((x + 1) * 8) + np.floor((y + 1) * 8)) % 2))
        return 0.7 * base + 0.3 * _smooth_field(x.shape[0], 104, 0.2)

    # the first ten are mutually well separated in both feature domains and
    # form the default recognition classes; the rest extend the suite to 20
    return [
        ("portrait", lambda x, y, rho, phi: _portrait(x.shape[0])),
        ("rings", rings),
        ("spokes", spokes),
        ("blobs", blobs),
        ("ramp", ramp),
        ("spiral", spiral),
        ("crescent", crescent),
        ("target", target),
        ("cross", cross),
        ("saddle", saddle),
        ("checker", checker),
        ("bars", bars),
        ("triangle", triangle),
        ("texture-lf", texture_lf),
        ("texture-hf", texture_hf),
        ("petals", petals),
        ("wedge", wedge),
        ("dots", dots),
        ("dome", dome),
        ("weave", weave),
    ]


def synthetic_suite(count: int = 10, size: int = 128) -> list[tuple[str, GrayImage]]:
    """First ``count`` images of the fixed 20-image generated suite.

    All entries are deterministic (texture fields use frozen seeds), so the
    suite doubles as a reproducible dataset for the benchmarks.
    """
    builders = _suite_builders()
    if not 1 <= count <= len(builders):
        raise ParamError(f"count must be in 1..{len(builders)}, got {count}")
    x, y, rho, phi = _coords(size)
    out = []
    for name, build in builders[:count]:
        out.append((name, GrayImage(np.clip(build(x, y, rho, phi), 0.0, 1.0))))
    return out


def save_suite(folder: str | Path, count: int = 10, size: int = 128) -> list[Path]:
    """Write the generated suite as PGM files; returns the paths."""
    folder = Path(folder)
    folder.mkdir(parents=True, exist_ok=True)
    from .image import save_gray

    paths = []
    for name, img in synthetic_suite(count, size):
        p = folder / f"{name}.pgm"
        save_gray(img, p)
        paths.append(p)
    return paths


def load_dataset(folder: str | Path) -> list[tuple[str, GrayImage]]:
    """Load every PNG/PGM in a folder, labeled by file stem, sorted by name."""
    folder = Path(folder)
    if not folder.is_dir():
        raise EmptyDataset(f"not a dataset folder: {folder}")
    entries = sorted(
        p for p in folder.iterdir() if p.suffix.lower() in _RASTER_SUFFIXES
    )
    if not entries:
        raise EmptyDataset(f"no raster images under {folder}")
    return [(p.stem, load_gray(p)) for p in entries]


# ---------------------------------------------------------------------------
# histogram study


@dataclasses.dataclass
class HistogramStudy:
    """Single-feature magnitudes per image across noise levels."""

    feature: tuple[int, int]
    variances: tuple[float, ...]
    magnitudes: dict[str, tuple[float, ...]]

    def within_spread(self, name: str) -> float:
        """Relative spread (max-min)/mean of one image's noisy series."""
        vals = self.magnitudes[name]
        mean = sum(vals) / len(vals)
        if mean == 0.0:
            return 0.0
        return (max(vals) - min(vals)) / mean

    def between_gap(self) -> float:
        """Smallest pairwise distance between per-image mean magnitudes."""
        means = [sum(v) / len(v) for v in self.magnitudes.values()]
        gaps = [
            abs(means[i] - means[j])
            for i in range(len(means))
            for j in range(i + 1, len(means))
        ]
        return min(gaps)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["image"] + [f"var={v:g}" for v in self.variances])
            for name, vals in self.magnitudes.items():
                w.writerow([name] + [f"{v:.17g}" for v in vals])


def run_histogram_study(
    images,
    variances,
    spec: BasisSpec,
    nm: tuple[int, int],
    seed: int = 0,
) -> HistogramStudy:
    """Track |M_nm| of each image across noise variances (Radon route).

    ``images`` is a dataset folder or a list of (name, GrayImage) pairs;
    at least two images are required so the between-image gap is defined.
    """
    if isinstance(images, (str, Path)):
        images = load_dataset(images)
    if len(images) < 2:
        raise EmptyDataset("histogram study needs at least two images")
    n, m = nm
    if spec.family == "polynomial" and n < 0:
        raise ParamError("polynomial family has no negative radial orders")
    K = max(abs(n), abs(m), 1)
    magnitudes: dict[str, tuple[float, ...]] = {}
    for i, (name, img) in enumerate(images):
        dom = disk_mask(img)
        grid = _fft_grid(max(img.height, img.width), K)
        series = []
        for j, var in enumerate(variances):
            noisy = (
                img if var == 0 else add_gaussian_noise(img, var, _trial_seed(seed, i, j))
            )
            sino = radon_forward(noisy, dom, grid, grid)
            ms = fmr_direct(sino, spec, K)
            series.append(abs(ms.get(n, m)))
        magnitudes[name] = tuple(series)
    return HistogramStudy(feature=(n, m), variances=tuple(variances), magnitudes=magnitudes)


# ---------------------------------------------------------------------------
# reconstruction study


@dataclasses.dataclass
class ReconstructionStudy:
    """MSRE/SSIM of FM and FMR reconstructions against K."""

    noise_var: float
    K_values: tuple[int, ...]
    msre_fm: tuple[float, ...]
    ssim_fm: tuple[float, ...]
    msre_fmr: tuple[float, ...]
    ssim_fmr: tuple[float, ...]

    def gap(self, K: int) -> float:
        """FM error minus FMR error at one K; positive favors FMR."""
        i = self.K_values.index(K)
        return self.msre_fm[i] - self.msre_fmr[i]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["K", "msre_fm", "ssim_fm", "msre_fmr", "ssim_fmr"])
            for i, k in enumerate(self.K_values):
                w.writerow(
                    [k]
                    + [
                        f"{v:.17g}"
                        for v in (
                            self.msre_fm[i],
                            self.ssim_fm[i],
                            self.msre_fmr[i],
                            self.ssim_fmr[i],
                        )
                    ]
                )

    def to_plot_data(self, path: str | Path) -> None:
        """Whitespace-separated columns for gnuplot."""
        with open(path, "w") as fh:
            fh.write("# K msre_fm ssim_fm msre_fmr ssim_fmr\n")
            for i, k in enumerate(self.K_values):
                fh.write(
                    f"{k} {self.msre_fm[i]:.17g} {self.ssim_fm[i]:.17g} "
                    f"{self.msre_fmr[i]:.17g} {self.ssim_fmr[i]:.17g}\n"
                )


def run_reconstruction_study(
    img: GrayImage,
    noise_var: float,
    spec: BasisSpec,
    K_values,
    seed: int = 0,
) -> ReconstructionStudy:
    """Reconstruct one noisy image from FM and FMR at each K; score vs clean.

    The same noisy realization feeds every K so the curves differ only in
    truncation.  Both routes share one polar grid sized for the largest K.
    """
    K_values = tuple(int(k) for k in K_values)
    if not K_values or min(K_values) < 1:
        raise ConstraintViolated("K values must be positive")
    if not 0.0 <= noise_var <= 1.0:
        raise ConstraintViolated(f"variance {noise_var} outside [0,1]")
    dom = disk_mask(img)
    size = max(img.height, img.width)
    grid = _fft_grid(size, max(K_values))
    noisy = img if noise_var == 0 else add_gaussian_noise(img, noise_var, seed)
    sino = radon_forward(noisy, dom, grid, grid)
    rows = {"mf": [], "sf": [], "mr": [], "sr": []}
    for K in K_values:
        ms_r = fmr_direct(sino, spec, K)
        _, rec_r = reconstruct(ms_r, (grid, grid), size)
        ms_f = fm_image(noisy, dom, spec, K, U=grid, V=grid)
        rec_f = reconstruct_image_series(ms_f, size)
        rows["mf"].append(mse_reconstruction_error(rec_f, img))
        rows["sf"].append(ssim(rec_f, img))
        rows["mr"].append(mse_reconstruction_error(rec_r, img))
        rows["sr"].append(ssim(rec_r, img))
    return ReconstructionStudy(
        noise_var=noise_var,
        K_values=K_values,
        msre_fm=tuple(rows["mf"]),
        ssim_fm=tuple(rows["sf"]),
        msre_fmr=tuple(rows["mr"]),
        ssim_fmr=tuple(rows["sr"]),
    )


# ---------------------------------------------------------------------------
# recognition benchmark


@dataclasses.dataclass
class AccuracyTable:
    """Correct-classification counts per (method, variance), angles pooled."""

    methods: tuple[str, ...]
    variances: tuple[float, ...]
    correct: dict[tuple[str, float], int]
    total: dict[tuple[str, float], int]

    def percentage(self, method: str, variance: float) -> float:
        key = (method, variance)
        return 100.0 * self.correct[key] / self.total[key]

    def mean_accuracy(self, method: str, variances=None) -> float:
        vs = tuple(variances) if variances is not None else self.variances
        return sum(self.percentage(method, v) for v in vs) / len(vs)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "variance", "correct", "total", "percent"])
            for m in self.methods:
                for v in self.variances:
                    key = (m, v)
                    w.writerow(
                        [m, f"{v:g}", self.correct[key], self.total[key],
                         f"{self.percentage(m, v):.10g}"]
                    )


def run_recognition_benchmark(
    cfg: BenchmarkConfig,
    images=None,
    threads: int = 1,
) -> AccuracyTable:
    """Clean-train / degraded-test recognition over variances x angles.

    Training features come from the clean class images; each test trial
    rotates a class image (exact permutation at multiples of 90 degrees,
    bilinear otherwise), adds Gaussian noise with a per-trial seed derived
    from cfg.seed, and classifies by minimum feature distance.  The same
    degraded image feeds every method, so comparisons are paired.  Thread
    count affects scheduling only, never the counts.
    """
    if images is None:
        if cfg.dataset is None:
            raise EmptyDataset("no dataset folder configured and no images given")
        images = load_dataset(cfg.dataset)
    if len(images) < 2:
        raise EmptyDataset("recognition needs at least two classes")
    train = {
        ms.name: [(label, extract_features(img, ms)) for label, img in images]
        for ms in cfg.methods
    }

    trials = [
        (ci, vi, ai)
        for ci in range(len(images))
        for vi in range(len(cfg.variances))
        for ai in range(len(cfg.angles))
    ]

    def run_trial(t):
        ci, vi, ai = t
        label, img = images[ci]
        var = cfg.variances[vi]
        deg = rotate(img, cfg.angles[ai]) if cfg.angles[ai] != 0 else img
        if var > 0:
            deg = add_gaussian_noise(deg, var, _trial_seed(cfg.seed, ci, vi, ai))
        hits = []
        for ms in cfg.methods:
            fv = extract_features(deg, ms)
            hits.append(min_distance_classify(train[ms.name], fv) == label)
        return hits

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_trial, trials))
    else:
        results = [run_trial(t) for t in trials]

    correct: dict[tuple[str, float], int] = {}
    total: dict[tuple[str, float], int] = {}
    for ms in cfg.methods:
        for v in cfg.variances:
            correct[(ms.name, v)] = 0
            total[(ms.name, v)] = 0
    for (ci, vi, ai), hits in zip(trials, results):
        v = cfg.variances[vi]
        for ms, hit in zip(cfg.methods, hits):
            total[(ms.name, v)] += 1
            correct[(ms.name, v)] += int(hit)
    return AccuracyTable(
        methods=tuple(ms.name for ms in cfg.methods),
        variances=tuple(cfg.variances),
        correct=correct,
        total=total,
    )
