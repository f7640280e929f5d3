"""Angular and radial basis functions over the unit disk.

Two radial families share the weighted orthonormality
2*pi * integral_0^1 R_n(r) conj(R_n'(r)) r dr = delta_nn':

* harmonic: R_n(r) = sqrt(alpha r^(alpha-2) / 2pi) * exp(j 2 n pi r^alpha)
* polynomial: a Jacobi-type polynomial in r^alpha under the weight
  r^(alpha q - 2) (1 - r^alpha)^(p - q), parameters p - q > -1, q > 0.

The polynomial family has a direct factorial form, kept as a test oracle
up to n = 20 (the alternating sum loses digits beyond that), and a
stable three-term recursion used everywhere else.  Gamma factors are
formed in log space.
"""
from __future__ import annotations

import dataclasses
import math
from math import lgamma
from pathlib import Path

import numpy as np

from .errors import DomainError, ParamError, StabilityError

_DIRECT_N_MAX = 20


@dataclasses.dataclass(frozen=True)
class BasisSpec:
    """Bundle of basis parameters.

    family is "harmonic" or "polynomial"; alpha > 0 is the fractional
    radial exponent; (n, m) are radial and angular orders; (p, q) apply
    to the polynomial family only and stay fixed within one transform.
    """

    family: str
    alpha: float
    n: int = 0
    m: int = 0
    p: float = 3.0
    q: float = 2.0

    def __post_init__(self) -> None:
        if self.family not in ("harmonic", "polynomial"):
            raise ParamError(f"unknown family {self.family!r}")
        if not self.alpha > 0:
            raise ParamError(f"alpha must be positive, got {self.alpha}")
        if self.family == "polynomial":
            if not self.q > 0:
                raise ParamError(f"need q > 0, got q={self.q}")
            if not self.p - self.q > -1:
                raise ParamError(f"need p - q > -1, got p={self.p}, q={self.q}")
            if self.n < 0:
                raise ParamError("polynomial radial order must be >= 0")


@dataclasses.dataclass
class RadialTable:
    """Samples of one radial basis function on a stated grid in (0,1]."""

    r: np.ndarray
    values: np.ndarray


def angular(m: int, theta):
    """A_m(theta) = exp(j m theta); unit modulus."""
    return np.exp(1j * m * np.asarray(theta, dtype=np.float64))


def radial_harmonic(alpha: float, n: int, r):
    """Harmonic radial function, vectorized over r in (0,1].

    Unbounded at r=0 when alpha < 2, hence DomainError there; callers
    integrating across r=0 use the warped quadrature instead.
    """
    if not alpha > 0:
        raise ParamError(f"alpha must be positive, got {alpha}")
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0) or np.any(r > 1):
        raise DomainError("radial argument must lie in [0,1]")
    if alpha < 2 and np.any(r == 0):
        raise DomainError("harmonic radial function unbounded at r=0 for alpha<2")
    mag = np.sqrt(alpha * r ** (alpha - 2.0) / (2.0 * np.pi))
    return mag * np.exp(1j * 2.0 * n * np.pi * r**alpha)


def _poly_validate(alpha: float, p: float, q: float) -> None:
    BasisSpec("polynomial", alpha, p=p, q=q)


def _is_integral(x: float) -> bool:
    return abs(x - round(x)) < 1e-12


def _poly_prefactor(alpha: float, p: float, q: float, n: int, r: np.ndarray) -> np.ndarray:
    """sqrt of the weight-and-norm factor common to direct and recursive forms."""
    ln_norm = (
        math.log(alpha)
        + math.log(p + 2 * n)
        + lgamma(q + n)
        + lgamma(n + 1)
        - math.log(2 * np.pi)
        - lgamma(p + n)
        - lgamma(p - q + n + 1)
    )
    return np.sqrt(np.exp(ln_norm) * r ** (alpha * q - 2.0) * (1.0 - r**alpha) ** (p - q))


def _check_poly_domain(alpha: float, p: float, q: float, r: np.ndarray) -> None:
    if np.any(r < 0) or np.any(r > 1):
        raise DomainError("radial argument must lie in [0,1]")
    if alpha * q < 2 and np.any(r == 0):
        raise DomainError("polynomial weight unbounded at r=0 for alpha*q < 2")
    if p < q and np.any(r == 1):
        raise DomainError("polynomial weight unbounded at r=1 for p < q")


def radial_poly_direct(alpha: float, p: float, q: float, n: int, r, counter=None):
    """Polynomial radial function by explicit summation.

    The alternating factorial sum is evaluated with exact integer
    coefficients when p and q are integral, in extended precision either
    way.  Guarded at n <= 20; the recursion does not share this limit.
    """
    _poly_validate(alpha, p, q)
    if n < 0:
        raise ParamError("polynomial radial order must be >= 0")
    if n > _DIRECT_N_MAX:
        raise StabilityError(
            f"direct factorial evaluation unstable for n={n} > {_DIRECT_N_MAX}"
        )
    r = np.asarray(r, dtype=np.float64)
    _check_poly_domain(alpha, p, q, r)

    gam = r.astype(np.longdouble) ** np.longdouble(alpha)
    use_exact = _is_integral(p) and _is_integral(q)
    coef = np.empty(n + 1, dtype=np.longdouble)
    for k in range(n + 1):
        if use_exact:
            c = math.factorial(int(round(p)) + n + k - 1) // (
                math.factorial(k)
                * math.factorial(n - k)
                * math.factorial(int(round(q)) + k - 1)
            )
            coef[k] = np.longdouble((-1) ** k) * np.longdouble(c)
        else:
            ln_c = lgamma(p + n + k) - lgamma(k + 1) - lgamma(n - k + 1) - lgamma(q + k)
            coef[k] = np.longdouble((-1) ** k) * np.exp(np.longdouble(ln_c))
    acc = np.zeros_like(gam)
    for c in coef[::-1]:
        acc = acc * gam + c
        if counter is not None:
            counter["additions"] = counter.get("additions", 0) + gam.size
    return (_poly_prefactor(alpha, p, q, n, r).astype(np.longdouble) * acc).astype(
        np.float64
    )


def radial_poly_recursive(
    alpha: float, p: float, q: float, n_max: int, r, counter=None
) -> list[RadialTable]:
    """Tables of the polynomial radial functions for n = 0..n_max.

    Three-term recursion on the polynomial part with a separately
    recursed normalization; cost grows linearly in n_max, and the result
    matches the direct form to rounding error.  The optional counter
    dict collects the number of scalar additions performed.
    """
    _poly_validate(alpha, p, q)
    if n_max < 0:
        raise ParamError("n_max must be >= 0")
    r = np.asarray(r, dtype=np.float64)
    _check_poly_domain(alpha, p, q, r)
    gam = r**alpha

    def count(n_adds: int) -> None:
        if counter is not None:
            counter["additions"] = counter.get("additions", 0) + n_adds

    P = [np.full_like(r, np.exp(lgamma(p) - lgamma(q)))]
    if n_max >= 1:
        P.append((1.0 - gam * (p + 1.0) / q) * np.exp(lgamma(p + 1) - lgamma(q)))
        count(r.size)
    for n in range(2, n_max + 1):
        L1 = -(2 * n + p - 1) * (2 * n + p - 2) / (n * (q + n - 1))
        L2 = (p + 2 * n - 2) + L1 * (n - 1) * (q + n - 2) / (p + 2 * n - 3)
        L3 = (
            (p + 2 * n - 4) * (p + 2 * n - 3) / 2.0
            + L1 * (q + n - 3) * (n - 2) / 2.0
            - (p + 2 * n - 4) * L2
        )
        P.append((L1 * gam + L2) * P[n - 1] + L3 * P[n - 2])
        count(2 * r.size)

    c_n = math.sqrt(math.exp(lgamma(q) - lgamma(p) - lgamma(p - q + 1)))
    tables = []
    for n in range(n_max + 1):
        if n >= 1:
            c_n *= math.sqrt(n * (q + n - 1) / ((p + n - 1) * (p - q + n)))
        pref = np.sqrt(
            (p + 2 * n) * alpha * r ** (alpha * q - 2.0) * (1.0 - gam) ** (p - q)
            / (2.0 * np.pi)
        )
        tables.append(RadialTable(r=r, values=pref * c_n * P[n]))
    return tables


def radial_matrix(spec: BasisSpec, orders, r, counter=None) -> np.ndarray:
    """Stack radial basis values, one row per requested order.

    Production dispatcher: harmonic orders (any sign) use the closed
    form, polynomial orders (n >= 0) the stable recursion.
    """
    orders = list(orders)
    r = np.asarray(r, dtype=np.float64)
    if spec.family == "harmonic":
        return np.stack([radial_harmonic(spec.alpha, n, r) for n in orders])
    if any(n < 0 for n in orders):
        raise ParamError("polynomial radial order must be >= 0")
    tables = radial_poly_recursive(spec.alpha, spec.p, spec.q, max(orders), r, counter)
    return np.stack([tables[n].values for n in orders]).astype(np.complex128)


def zero_locations(spec: BasisSpec, n: int) -> list[float]:
    """Radial zeros in (0,1), sorted ascending.

    Harmonic zeros are where the real part cos(2 n pi r^alpha) vanishes,
    in closed form.  Polynomial zeros come from a sign-change scan of
    the recursion's polynomial part over 10^4 brackets plus bisection.
    """
    if spec.family == "harmonic":
        if n == 0:
            return []
        k = np.arange(2 * abs(n))
        return list(((2 * k + 1) / (4.0 * abs(n))) ** (1.0 / spec.alpha))

    if n < 0:
        raise ParamError("polynomial radial order must be >= 0")
    if n == 0:
        return []
    # polynomial part only: the positive weight prefactor adds no zeros
    p, q, alpha = spec.p, spec.q, spec.alpha

    def poly_part(r: np.ndarray) -> np.ndarray:
        gam = r**alpha
        P_prev = np.full_like(r, np.exp(lgamma(p) - lgamma(q)))
        P_cur = (1.0 - gam * (p + 1.0) / q) * np.exp(lgamma(p + 1) - lgamma(q))
        if n == 1:
            return P_cur
        for nn in range(2, n + 1):
            L1 = -(2 * nn + p - 1) * (2 * nn + p - 2) / (nn * (q + nn - 1))
            L2 = (p + 2 * nn - 2) + L1 * (nn - 1) * (q + nn - 2) / (p + 2 * nn - 3)
            L3 = (
                (p + 2 * nn - 4) * (p + 2 * nn - 3) / 2.0
                + L1 * (q + nn - 3) * (nn - 2) / 2.0
                - (p + 2 * nn - 4) * L2
            )
            P_prev, P_cur = P_cur, (L1 * gam + L2) * P_cur + L3 * P_prev
        return P_cur

    grid = np.linspace(1e-9, 1.0 - 1e-9, 10_000)
    vals = poly_part(grid)
    zeros = []
    sign = np.sign(vals)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        lo, hi = grid[i], grid[i + 1]
        flo = vals[i]
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            fmid = float(poly_part(np.array([mid]))[0])
            if flo * fmid <= 0:
                hi = mid
            else:
                lo, flo = mid, fmid
        zeros.append(0.5 * (lo + hi))
    return zeros


def radial_table_to_csv(table: RadialTable, path: str | Path) -> None:
    """Columns r, real, imag, abs, phase; suits line plots directly."""
    vals = np.asarray(table.values, dtype=np.complex128)
    with open(path, "w", encoding="ascii") as fh:
        fh.write("r,real,imag,abs,phase\n")
        for rr, vv in zip(table.r, vals):
            fh.write(
                f"{rr:.17g},{vv.real:.17g},{vv.imag:.17g},"
                f"{abs(vv):.17g},{np.angle(vv):.17g}\n"
            )
