"""Command-line front end for the whole pipeline.

One executable, one subcommand per stage: forward transform, moment
computation over any of the three paths, reconstruction, feature
extraction, explicit-series cross validation, the benchmark studies,
zero-watermark registration/verification, and radial-basis tables.

Every run prints a one-line configuration fingerprint built solely from
the parsed options (never from the clock or the host), and the same line
is embedded into text outputs whose formats tolerate a header comment.
Identical argv and inputs therefore produce byte-identical outputs; the
--threads knob controls scheduling only and is excluded from the
fingerprint.

Exit status: 0 on success, 1 on usage errors, 2 when a computation or
I/O step fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .basis import BasisSpec, radial_matrix, zero_locations
from .errors import FmrError
from .explicit import SeriesTruncation, cross_validate, crossval_to_csv
from .features import magnitude_features
from .harness import (
    BenchmarkConfig,
    MethodSpec,
    load_dataset,
    run_histogram_study,
    run_reconstruction_study,
    run_recognition_benchmark,
    save_suite,
    synthetic_suite,
)
from .image import disk_mask, load_gray, save_gray
from .moments import (
    fm_image,
    fmr_direct,
    fmr_harmonic_fft,
    fmr_polynomial,
    load_momentset,
    reconstruct,
    reconstruct_image_series,
    save_momentset,
)
from .radon import radon_forward, save_sinogram
from .watermark import (
    CopyrightCode,
    load_record,
    register,
    save_record,
    verify,
)


class _UsageError(Exception):
    """Post-parse validation failure; reported like a parser error."""


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc


def _orders(text: str) -> tuple[int, ...]:
    """Accept 'a:b' (inclusive range) or a comma list."""
    if ":" in text:
        a, _, b = text.partition(":")
        try:
            return tuple(range(int(a), int(b) + 1))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad order range {text!r}") from exc
    return _int_list(text)


def _basis_flags(sp) -> None:
    sp.add_argument("--family", choices=("harmonic", "polynomial"),
                    default="harmonic", help="radial basis family (default harmonic)")
    sp.add_argument("--alpha", type=float, default=1.0,
                    help="fractional order (default 1)")
    sp.add_argument("--p", type=float, default=3.0,
                    help="polynomial parameter p (default 3)")
    sp.add_argument("--q", type=float, default=2.0,
                    help="polynomial parameter q (default 2)")


def _common_flags(sp, grid=True) -> None:
    sp.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker threads where supported; never changes outputs")
    sp.add_argument("--config", type=Path, default=None,
                    help="key=value file overriding the flags above")
    if grid:
        sp.add_argument("-M", "--grid", type=int, default=None,
                        help="sinogram grid side (default: image side, M=N)")


def _spec_from(ns) -> BasisSpec:
    if ns.family == "harmonic":
        return BasisSpec(family="harmonic", alpha=ns.alpha)
    return BasisSpec(family="polynomial", alpha=ns.alpha, p=ns.p, q=ns.q)


_EXCLUDED = {"config", "threads", "func"}


def _fingerprint(ns) -> str:
    """Deterministic one-liner of every configuration field."""
    parts = []
    for key in sorted(vars(ns)):
        if key in _EXCLUDED:
            continue
        val = getattr(ns, key)
        if val is None:
            val = "-"
        elif isinstance(val, float):
            val = f"{val:.12g}"
        elif isinstance(val, (tuple, list)):
            val = ",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in val)
        parts.append(f"{key}={val}")
    return "fmr-config " + " ".join(parts)


def _apply_config(ns, parser) -> None:
    """Overlay key=value lines from --config; file values win."""
    if ns.config is None:
        return
    try:
        lines = Path(ns.config).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise _UsageError(f"cannot read config file: {exc}") from exc
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise _UsageError(f"config line needs key=value: {raw!r}")
        dest = key.strip().replace("-", "_")
        val = val.strip()
        if not hasattr(ns, dest) or dest in ("config", "func"):
            raise _UsageError(f"unknown config key {key.strip()!r}")
        current = getattr(ns, dest)
        try:
            if isinstance(current, bool):
                if val.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(val)
                parsed = val.lower() in ("true", "1")
            elif isinstance(current, int) and not isinstance(current, bool):
                parsed = int(val)
            elif isinstance(current, float):
                parsed = float(val)
            elif isinstance(current, tuple):
                parsed = (_float_list(val) if any(isinstance(v, float) for v in current)
                          else _int_list(val))
            elif isinstance(current, Path):
                parsed = Path(val)
            elif current is None and dest == "grid":
                parsed = int(val)
            else:
                parsed = val
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise _UsageError(f"bad config value for {key.strip()!r}: {val!r}") from exc
        setattr(ns, dest, parsed)


def _embed_header_key(path: Path, fingerprint: str) -> None:
    """Insert 'config <fp>' after the magic line of a key-value text format."""
    lines = path.read_text(encoding="ascii").splitlines()
    lines.insert(1, f"config {fingerprint}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _prepend_comment(path: Path, fingerprint: str) -> None:
    body = path.read_text(encoding="ascii")
    path.write_text(f"# {fingerprint}\n" + body, encoding="ascii")


def _forward(ns, img, domain, warp=None):
    M = ns.grid if ns.grid is not None else max(img.height, img.width)
    return radon_forward(img, domain, M, M, warp_alpha=warp)


def _cmd_radon(ns, fp):
    img = load_gray(ns.input)
    sino = _forward(ns, img, disk_mask(img), warp=ns.warp_alpha)
    save_sinogram(sino, ns.out)
    print(f"sinogram {sino.U}x{sino.V} -> {ns.out}")
    return 0


def _cmd_moments(ns, fp):
    if ns.path == "fft" and ns.family != "harmonic":
        raise _UsageError("--path fft applies to the harmonic family only")
    if ns.path == "poly" and ns.family != "polynomial":
        raise _UsageError("--path poly applies to the polynomial family only")
    img = load_gray(ns.input)
    domain = disk_mask(img)
    spec = _spec_from(ns)
    if ns.path == "fft":
        sino = _forward(ns, img, domain, warp=ns.alpha)
        ms = fmr_harmonic_fft(sino, ns.alpha, ns.k)
    else:
        sino = _forward(ns, img, domain)
        ms = fmr_direct(sino, spec, ns.k) if ns.path == "direct" else fmr_polynomial(sino, spec, ns.k)
    save_momentset(ms, ns.out)
    _embed_header_key(Path(ns.out), fp)
    print(f"moments K={ns.k} path={ns.path} -> {ns.out}")
    return 0


def _cmd_reconstruct(ns, fp):
    ms = load_momentset(ns.input)
    if ms.domain_tag == "image":
        img = reconstruct_image_series(ms, ns.size)
    else:
        G = ns.grid if ns.grid is not None else max(ns.size, 4 * ms.K)
        _, img = reconstruct(ms, (G, G), ns.size)
    save_gray(img, ns.out)
    print(f"reconstruction {ns.size}x{ns.size} from {ms.domain_tag} moments -> {ns.out}")
    return 0


def _cmd_features(ns, fp):
    img = load_gray(ns.input)
    sino = _forward(ns, img, disk_mask(img))
    fv = magnitude_features(fmr_direct(sino, _spec_from(ns), ns.k), ns.weighting)
    out = Path(ns.out)
    if out.suffix == ".bin":
        out.write_bytes(fv.to_bytes())
    else:
        fv.to_csv(out)
        _prepend_comment(out, fp)
    print(f"{fv.values.size} features -> {ns.out}")
    return 0


def _cmd_xval(ns, fp):
    img = load_gray(ns.input)
    trunc = SeriesTruncation(k_max=ns.k_max, tail_tol=ns.tail_tol)
    rows = cross_validate(img, disk_mask(img), _spec_from(ns), ns.n_max, ns.m_max, trunc)
    crossval_to_csv(rows, ns.out)
    _prepend_comment(Path(ns.out), fp)
    worst = max(r["rel_diff"] for r in rows)
    print(f"cross-validated {len(rows)} coefficients, worst relative diff {worst:.3e} -> {ns.out}")
    return 0


def _dataset(ns):
    if ns.input is not None:
        return load_dataset(ns.input)
    return synthetic_suite(10, 128)


def _cmd_bench_histogram(ns, fp):
    study = run_histogram_study(_dataset(ns), ns.variances, _spec_from(ns),
                                (ns.n, ns.m), seed=ns.seed)
    study.to_csv(ns.out)
    _prepend_comment(Path(ns.out), fp)
    spread = max(study.within_spread(name) for name in study.magnitudes)
    print(f"within-image spread max {spread:.4g}, "
          f"between-image gap {study.between_gap():.4g} -> {ns.out}")
    return 0


def _cmd_bench_reconstruct(ns, fp):
    img = load_gray(ns.input)
    study = run_reconstruction_study(img, ns.variance, _spec_from(ns),
                                     ns.k_values, seed=ns.seed)
    study.to_csv(ns.out)
    _prepend_comment(Path(ns.out), fp)
    gaps = ", ".join(f"K={k}: {study.gap(k):+.5f}" for k in ns.k_values)
    print(f"msre gap (fm - fmr) {gaps} -> {ns.out}")
    return 0


def _cmd_bench_recognize(ns, fp):
    methods = (
        MethodSpec(f"fmr-{ns.family}", "radon", _spec_from(ns), ns.k),
        MethodSpec(f"fm-{ns.family}", "image", _spec_from(ns), ns.k),
    )
    cfg = BenchmarkConfig(methods=methods, variances=ns.variances,
                          angles=ns.angles, seed=ns.seed)
    table = run_recognition_benchmark(cfg, images=_dataset(ns), threads=ns.threads)
    table.to_csv(ns.out)
    _prepend_comment(Path(ns.out), fp)
    means = ", ".join(f"{m.name}: {table.mean_accuracy(m.name):.2f}%" for m in methods)
    print(f"mean accuracy {means} -> {ns.out}")
    return 0


def _cmd_bench_suite(ns, fp):
    paths = save_suite(ns.out_dir, count=ns.count, size=ns.size)
    print(f"{len(paths)} benchmark images -> {ns.out_dir}")
    return 0


def _code_from(ns) -> CopyrightCode:
    if ns.code is not None:
        return CopyrightCode.from_string(ns.code)
    return CopyrightCode.from_text(ns.code_text, ns.bits)


def _cmd_zw_register(ns, fp):
    img = load_gray(ns.input)
    rec = register(img, _code_from(ns), ns.key_seed, family=ns.family, domain=ns.domain)
    save_record(rec, ns.out)
    _embed_header_key(Path(ns.out), fp)
    print(f"registered B={rec.hash_spec.B} key_seed={rec.key_seed} -> {ns.out}")
    return 0


def _cmd_zw_verify(ns, fp):
    img = load_gray(ns.input)
    rec = load_record(ns.record)
    ns.bits = rec.hash_spec.B
    recovered, ber = verify(img, rec, _code_from(ns))
    print(f"BER={ber:.6f} recovered={''.join(str(b) for b in recovered.bits)}")
    return 0


def _cmd_plot_basis(ns, fp):
    spec = _spec_from(ns)
    r = (np.arange(ns.r_points) + 0.5) / ns.r_points
    rows = radial_matrix(spec, list(ns.orders), r)
    lines = ["r," + ",".join(f"n{n}_re,n{n}_im" for n in ns.orders)]
    for j in range(r.size):
        vals = ",".join(f"{rows[i, j].real:.17g},{rows[i, j].imag:.17g}"
                        for i in range(len(ns.orders)))
        lines.append(f"{r[j]:.17g},{vals}")
    Path(ns.out).write_text("\n".join(lines) + "\n", encoding="ascii")
    _prepend_comment(Path(ns.out), fp)
    for n in ns.orders:
        zeros = ", ".join(f"{z:.6f}" for z in zero_locations(spec, n))
        print(f"n={n} zeros: {zeros or 'none'}")
    print(f"radial table ({len(ns.orders)} orders x {ns.r_points} radii) -> {ns.out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="fmr", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("radon", help="forward transform to a sinogram file")
    sp.add_argument("input", type=Path, help="grayscale image (png or pgm)")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--warp-alpha", type=float, default=None,
                    help="power-warped radial grid exponent (fast-path layout)")
    _common_flags(sp)
    sp.set_defaults(func=_cmd_radon)

    sp = sub.add_parser("moments", help="image -> Radon-domain moment set")
    sp.add_argument("input", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--k", type=int, default=10, help="order cap K (default 10)")
    sp.add_argument("--path", choices=("direct", "fft", "poly"), default="direct",
                    help="direct quadrature, harmonic FFT fast path, or recursive polynomial")
    sp.add_argument("--fast", action="store_true", help="shorthand for --path fft")
    _basis_flags(sp)
    _common_flags(sp)
    sp.set_defaults(func=_cmd_moments)

    sp = sub.add_parser("reconstruct", help="moment set -> image")
    sp.add_argument("input", type=Path, help="moment-set file")
    sp.add_argument("--out", type=Path, required=True, help="output png")
    sp.add_argument("--size", type=int, default=128, help="output side (default 128)")
    _common_flags(sp)
    sp.set_defaults(func=_cmd_reconstruct)

    sp = sub.add_parser("features", help="rotation-invariant magnitude descriptors")
    sp.add_argument("input", type=Path)
    sp.add_argument("--out", type=Path, required=True,
                    help="csv, or .bin for the packed binary form")
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--weighting", choices=("none", "n_plus_1"), default="none")
    _basis_flags(sp)
    _common_flags(sp)
    sp.set_defaults(func=_cmd_features)

    sp = sub.add_parser("xval-explicit",
                        help="explicit geometric-moment series vs quadrature path")
    sp.add_argument("input", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--n-max", type=int, default=3)
    sp.add_argument("--m-max", type=int, default=3)
    sp.add_argument("--k-max", type=int, default=20)
    sp.add_argument("--tail-tol", type=float, default=1e-3)
    _basis_flags(sp)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_xval)

    sp = sub.add_parser("bench-histogram", help="|M_nm| spread across noise levels")
    sp.add_argument("input", type=Path, nargs="?", default=None,
                    help="dataset folder (default: built-in suite)")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--variances", type=_float_list, default=(0.0, 0.02, 0.05, 0.1))
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=int, default=0)
    _basis_flags(sp)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_bench_histogram)

    sp = sub.add_parser("bench-reconstruct", help="FM vs FMR reconstruction error vs K")
    sp.add_argument("input", type=Path)
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--variance", type=float, default=0.2)
    sp.add_argument("--k-values", type=_int_list, default=(10, 30, 50))
    _basis_flags(sp)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_bench_reconstruct)

    sp = sub.add_parser("bench-recognize", help="paired FM vs FMR recognition accuracy")
    sp.add_argument("input", type=Path, nargs="?", default=None,
                    help="dataset folder (default: built-in suite)")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--k", type=int, default=10)
    sp.add_argument("--variances", type=_float_list, default=(0.1, 0.15, 0.2))
    sp.add_argument("--angles", type=_float_list, default=(0.0, 150.0))
    _basis_flags(sp)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_bench_recognize)

    sp = sub.add_parser("bench-suite", help="write the built-in benchmark images")
    sp.add_argument("out_dir", type=Path)
    sp.add_argument("--count", type=int, default=10)
    sp.add_argument("--size", type=int, default=128)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_bench_suite)

    zw = sub.add_parser("zw", help="zero-watermark registration and verification")
    zw_sub = zw.add_subparsers(dest="zw_command", required=True, parser_class=_Parser)

    sp = zw_sub.add_parser("register", help="bind an image to a copyright code")
    sp.add_argument("input", type=Path)
    sp.add_argument("--out", type=Path, required=True, help="record file")
    sp.add_argument("--key-seed", type=int, required=True)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--code", help="literal bit string")
    group.add_argument("--code-text", help="derive the code from text via SHA-256")
    sp.add_argument("--bits", type=int, default=64, help="code length for --code-text")
    sp.add_argument("--family", choices=("harmonic", "polynomial"), default="harmonic")
    sp.add_argument("--domain", choices=("radon", "image"), default="radon")
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_zw_register)

    sp = zw_sub.add_parser("verify", help="recover the code and report BER")
    sp.add_argument("input", type=Path)
    sp.add_argument("--record", type=Path, required=True)
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--code", help="reference bit string")
    group.add_argument("--code-text", help="reference code from text via SHA-256")
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_zw_verify)

    sp = sub.add_parser("plot-basis", help="radial kernel samples and zero locations")
    sp.add_argument("--out", type=Path, required=True)
    sp.add_argument("--orders", type=_orders, default=(0, 1, 2, 3),
                    help="'a:b' range or comma list (default 0:3)")
    sp.add_argument("--r-points", type=int, default=512)
    _basis_flags(sp)
    _common_flags(sp, grid=False)
    sp.set_defaults(func=_cmd_plot_basis)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        _apply_config(ns, parser)
        if getattr(ns, "fast", False):
            ns.path = "fft"
        fp = _fingerprint(ns)
        print(fp)
        return ns.func(ns, fp)
    except _UsageError as exc:
        print(f"fmr: error: {exc}", file=sys.stderr)
        return 1
    except FmrError as exc:
        print(f"fmr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fmr: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
