"""Rotation-invariant descriptors built from moment sets.

Rotating the underlying image multiplies each coefficient by a pure
phase exp(j m phi), so magnitudes are invariant on their own, and
products whose angular orders cancel are invariant with phase retained.
"""
from __future__ import annotations

import dataclasses
import warnings
from pathlib import Path

import numpy as np

from .errors import (
    BadLength,
    ConstraintViolated,
    EmptyTrainingSet,
    LayoutMismatch,
    NearZeroFactor,
    ParamError,
)
from .moments import MomentSet

_WEIGHTINGS = ("none", "n_plus_1")


@dataclasses.dataclass
class FeatureVector:
    """Real descriptor vector with its (n, m) layout."""

    values: np.ndarray
    layout: tuple
    weighting: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.layout = tuple((int(n), int(m)) for n, m in self.layout)
        if self.values.ndim != 1 or self.values.size != len(self.layout):
            raise BadLength("feature vector length must match its layout")
        if not np.isfinite(self.values).all():
            raise BadLength("feature values must be finite")
        if list(self.layout) != sorted(self.layout):
            raise LayoutMismatch("layout must be sorted lexicographically")
        if self.weighting not in _WEIGHTINGS:
            raise ParamError(f"unknown weighting {self.weighting!r}")

    def to_csv(self, path: str | Path) -> None:
        lines = ["n,m,value"]
        for (n, m), v in zip(self.layout, self.values):
            lines.append(f"{n},{m},{v:.17g}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    def to_bytes(self) -> bytes:
        """Deterministic little-endian blob of the values."""
        head = b"FMRFV1" + len(self.layout).to_bytes(4, "little")
        return head + self.values.astype("<f8").tobytes()


def magnitude_features(ms: MomentSet, weighting: str = "none") -> FeatureVector:
    """Coefficient magnitudes over S(K), optionally balanced by (n+1).

    The (n+1) factor counteracts the decay of high-order Radon-domain
    magnitudes; it is skipped for image-domain moment sets, where it
    amplifies resampling error instead.
    """
    if weighting not in _WEIGHTINGS:
        raise ParamError(f"unknown weighting {weighting!r}")
    layout = []
    vals = []
    for (n, m), c in ms.items():
        w = n + 1 if weighting == "n_plus_1" and ms.domain_tag == "radon" else 1
        layout.append((n, m))
        vals.append(abs(c) * w)
    return FeatureVector(np.array(vals), tuple(layout), weighting)


@dataclasses.dataclass
class PhaseCancelSpec:
    """Angular orders and exponents with sum(m_i * k_i) = 0."""

    terms: tuple

    def __post_init__(self) -> None:
        self.terms = tuple((int(m), int(k)) for m, k in self.terms)
        if len(self.terms) < 1:
            raise ConstraintViolated("need at least one (m, k) term")
        if sum(m * k for m, k in self.terms) != 0:
            raise ConstraintViolated("exponent-weighted angular orders must cancel")


def phase_cancel_invariant(
    ms: MomentSet, spec: PhaseCancelSpec, n_choices: list[int]
) -> complex:
    """Product of coefficient powers whose rotation phases cancel."""
    if sum(m * k for m, k in spec.terms) != 0:
        raise ConstraintViolated("exponent-weighted angular orders must cancel")
    if len(n_choices) != len(spec.terms):
        raise BadLength("one radial order required per term")
    if all(k == 0 for _, k in spec.terms):
        warnings.warn("all exponents zero: invariant degenerates to 1")
    out = 1.0 + 0.0j
    for n, (m, k) in zip(n_choices, spec.terms):
        c = ms.get(int(n), m)
        if k < 0 and abs(c) < 1e-9:
            raise NearZeroFactor(f"coefficient ({n},{m}) too small for exponent {k}")
        out *= c**k
    return out


def min_distance_classify(train: list, query: FeatureVector):
    """Label of the Euclidean-nearest training vector; first wins ties."""
    if not train:
        raise EmptyTrainingSet("no training vectors")
    dists = []
    for _, fv in train:
        if fv.layout != query.layout or fv.weighting != query.weighting:
            raise LayoutMismatch("training and query vectors disagree on layout")
        dists.append(float(np.linalg.norm(fv.values - query.values)))
    return train[int(np.argmin(dists))][0]
