"""Fractional-order radial moments of images computed in Radon projection space.

The pipeline: a grayscale image is mapped to its inscribed disk, Radon
projected onto a full-turn sinogram, and expanded against a fractional
radial basis (oscillatory harmonic or Jacobi polynomial family).  The
resulting coefficients are noise-robust, rotation-invariant descriptors
that also support reconstruction, recognition benchmarks, explicit
geometric-moment cross validation, and zero-watermarking.
"""

from .basis import (
    BasisSpec,
    RadialTable,
    angular,
    radial_harmonic,
    radial_matrix,
    radial_poly_direct,
    radial_poly_recursive,
    radial_table_to_csv,
    zero_locations,
)
from .errors import FmrError
from .explicit import (
    GeometricMomentTable,
    SeriesTruncation,
    cross_validate,
    crossval_to_csv,
    fmr_explicit_harmonic,
    fmr_explicit_polynomial,
    geometric_moment,
    theta_integral,
    validate_series_spec,
    w1,
    w2_w3,
)
from .features import (
    FeatureVector,
    PhaseCancelSpec,
    magnitude_features,
    min_distance_classify,
    phase_cancel_invariant,
)
from .harness import (
    AccuracyTable,
    BenchmarkConfig,
    HistogramStudy,
    MethodSpec,
    ReconstructionStudy,
    extract_features,
    load_dataset,
    run_histogram_study,
    run_reconstruction_study,
    run_recognition_benchmark,
    save_suite,
    synthetic_suite,
)
from .image import (
    DiskDomain,
    GrayImage,
    add_gaussian_noise,
    disk_mask,
    load_gray,
    rotate,
    save_gray,
)
from .metrics import mse_reconstruction_error, psnr, ssim
from .moments import (
    MomentSet,
    fm_image,
    fmr_direct,
    fmr_harmonic_fft,
    fmr_polynomial,
    load_momentset,
    reconstruct,
    reconstruct_image_series,
    save_momentset,
    synthesize_sinogram,
)
from .radon import (
    Sinogram,
    SnrGainReport,
    load_sinogram,
    radon_forward,
    radon_inverse,
    save_sinogram,
    snr_gain,
    snr_gain_theoretical,
)
from .watermark import (
    CopyrightCode,
    HashSpec,
    WatermarkRecord,
    hash_with_spec,
    load_record,
    perceptual_hash,
    register,
    save_record,
    verify,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
