"""Theta series: exact enumeration, Jacobi closed forms, the rational
approximation, lattice Gaussians, flatness factor and VNR.

Closed forms are evaluated two ways: numerically through the Jacobi
theta functions, and as exact integer power series (coefficients kept
as Fractions in quarter-exponent units until the final integrality
check). The series path is what makes coefficient-level cross-checks
against enumeration possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, UnknownForm
from .lattice import Lattice, enumerate_coeffs, minimal_norm

__all__ = [
    "ThetaSeries",
    "ThetaApproxResult",
    "FlatnessPoint",
    "theta_exact",
    "jacobi_theta",
    "theta_closed_form",
    "theta_form_coefficients",
    "theta_approx",
    "theta_approx_for",
    "upper_incomplete_gamma",
    "lattice_gaussian",
    "flatness_factor",
    "flatness_from_theta",
    "truncated_sum_baseline",
    "baseline_for_entry",
    "sigma2_to_q",
]

NORM_TOL = 1e-9


def sigma2_to_q(sigma2: float) -> float:
    """Nome q = exp(-1/(2 sigma^2)) for a Gaussian of variance sigma^2."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    return math.exp(-1.0 / (2.0 * sigma2))


@dataclass(frozen=True)
class ThetaSeries:
    """Truncated exact theta data: squared norm -> shell count."""

    terms: dict[float, int]
    r_max: float
    includes_origin: bool = True

    @property
    def lambda1(self) -> float:
        return min(self.terms)

    @property
    def kissing(self) -> int:
        return self.terms[self.lambda1]

    def evaluate(self, q: float) -> float:
        if not 0 <= q < 1:
            raise DomainError("q must be in [0, 1)")
        total = 1.0 if self.includes_origin else 0.0
        for r, count in self.terms.items():
            total += count * q**r
        return total


@dataclass(frozen=True)
class ThetaApproxResult:
    value: float
    q: float
    n: int
    lambda1: float
    volume: float
    sigma2: float | None = None


@dataclass(frozen=True)
class FlatnessPoint:
    sigma2: float
    epsilon: float
    vnr: float
    mode: str


def theta_exact(lat: Lattice, r_max: float, budget: int | None = None) -> ThetaSeries:
    """Exact shell counts by enumeration, bucketed at 1e-9 in the norm."""
    _, _, sq = enumerate_coeffs(lat, r_max, budget=budget)
    sq = np.sort(sq[sq > NORM_TOL])
    terms: dict[float, int] = {}
    i = 0
    while i < len(sq):
        j = i
        while j + 1 < len(sq) and sq[j + 1] - sq[j] <= NORM_TOL:
            j += 1
        shell = float(round(float(np.mean(sq[i:j + 1])), 9))
        terms[shell] = j - i + 1
        i = j + 1
    return ThetaSeries(terms=terms, r_max=float(r_max))


def jacobi_theta(kind: int, q: float, tol: float = 1e-15) -> float:
    """Jacobi theta constants theta_2/3/4 as partial sums at nome q."""
    if not 0 <= q < 1:
        raise DomainError("q must be in [0, 1)")
    if kind == 2:
        total = 0.0
        k = 0
        while True:
            term = 2.0 * q ** ((k + 0.5) ** 2)
            total += term
            if term < tol:
                return total
            k += 1
    if kind in (3, 4):
        sign = 1.0 if kind == 3 else -1.0
        total = 1.0
        k = 1
        while True:
            term = 2.0 * (sign**k) * q ** (k * k)
            total += term
            if abs(term) < tol:
                return total
            k += 1
    raise ValueError("kind must be 2, 3 or 4")


def _closed_form_value(form: str, dim: int, q: float) -> float:
    jt = jacobi_theta
    if form == "Zn":
        return jt(3, q) ** dim
    if form == "Dn":
        return 0.5 * (jt(3, q) ** dim + jt(4, q) ** dim)
    if form == "Dn_star":
        return jt(2, q**4) ** dim + jt(3, q**4) ** dim
    if form == "A2":
        return jt(2, q) * jt(2, q**3) + jt(3, q) * jt(3, q**3)
    if form == "E8":
        return 0.5 * (jt(2, q) ** 8 + jt(3, q) ** 8 + jt(4, q) ** 8)
    if form == "K12":
        inner = jt(2, q**4) * jt(2, q**12) + jt(3, q**4) * jt(3, q**12)
        return (
            Fraction(9, 32) * (jt(2, q) * jt(2, q**3)) ** 6
            + inner**6
            + Fraction(45, 16) * (jt(2, q) * jt(2, q**3)) ** 4 * inner**2
        )
    if form == "Leech":
        e8 = 0.5 * (jt(2, q) ** 8 + jt(3, q) ** 8 + jt(4, q) ** 8)
        return e8**3 - (45.0 / 16.0) * (jt(2, q) * jt(3, q) * jt(4, q)) ** 8
    raise UnknownForm(form)


def theta_closed_form(entry, q: float) -> float:
    """Evaluate a catalog entry's tabulated theta formula at nome q."""
    if not 0 <= q < 1:
        raise DomainError("q must be in [0, 1)")
    if entry.theta_form is None:
        raise UnknownForm(f"{entry.name} has no closed-form theta series")
    return float(_closed_form_value(entry.theta_form, entry.dim, q))


# --- exact series expansion ------------------------------------------------
# Series are dicts {exponent in quarter units of q: Fraction}, truncated
# at 4 * max_norm. theta_2(q^m) contributes exponents m*(2k+1)^2 quarters.

def _s_theta(kind: int, m: int, cap4: int) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    if kind == 2:
        k = 0
        while m * (2 * k + 1) ** 2 <= cap4:
            out[m * (2 * k + 1) ** 2] = Fraction(2)
            k += 1
        return out
    out[0] = Fraction(1)
    sign = 1 if kind == 3 else -1
    k = 1
    while 4 * m * k * k <= cap4:
        out[4 * m * k * k] = Fraction(2 * sign**k)
        k += 1
    return out


def _s_mul(a: dict, b: dict, cap4: int) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            if e <= cap4:
                out[e] = out.get(e, Fraction(0)) + ca * cb
    return out


def _s_pow(a: dict, p: int, cap4: int) -> dict[int, Fraction]:
    out = {0: Fraction(1)}
    for _ in range(p):
        out = _s_mul(out, a, cap4)
    return out


def _s_axpy(acc: dict, scale: Fraction, a: dict) -> dict:
    for e, c in a.items():
        acc[e] = acc.get(e, Fraction(0)) + scale * c
    return acc


def theta_form_coefficients(form: str, dim: int, max_norm: int) -> dict[int, int]:
    """Exact integer coefficients of a closed-form theta series.

    Returns {squared norm: count} for norms 1..max_norm (zero counts
    omitted). All catalog forms have integer norms.
    """
    cap4 = 4 * max_norm
    t2 = lambda m: _s_theta(2, m, cap4)  # noqa: E731
    t3 = lambda m: _s_theta(3, m, cap4)  # noqa: E731
    t4 = lambda m: _s_theta(4, m, cap4)  # noqa: E731
    if form == "Zn":
        series = _s_pow(t3(1), dim, cap4)
    elif form == "Dn":
        series = _s_axpy(
            _s_axpy({}, Fraction(1, 2), _s_pow(t3(1), dim, cap4)),
            Fraction(1, 2), _s_pow(t4(1), dim, cap4),
        )
    elif form == "Dn_star":
        series = _s_axpy(
            _s_axpy({}, Fraction(1), _s_pow(t2(4), dim, cap4)),
            Fraction(1), _s_pow(t3(4), dim, cap4),
        )
    elif form == "A2":
        series = _s_axpy(
            _s_axpy({}, Fraction(1), _s_mul(t2(1), t2(3), cap4)),
            Fraction(1), _s_mul(t3(1), t3(3), cap4),
        )
    elif form == "E8":
        series = {}
        for kind in (2, 3, 4):
            series = _s_axpy(series, Fraction(1, 2), _s_pow(_s_theta(kind, 1, cap4), 8, cap4))
    elif form == "K12":
        inner = _s_axpy(
            _s_axpy({}, Fraction(1), _s_mul(t2(4), t2(12), cap4)),
            Fraction(1), _s_mul(t3(4), t3(12), cap4),
        )
        t2t2 = _s_mul(t2(1), t2(3), cap4)
        series = _s_axpy({}, Fraction(9, 32), _s_pow(t2t2, 6, cap4))
        series = _s_axpy(series, Fraction(1), _s_pow(inner, 6, cap4))
        series = _s_axpy(
            series, Fraction(45, 16),
            _s_mul(_s_pow(t2t2, 4, cap4), _s_pow(inner, 2, cap4), cap4),
        )
    elif form == "Leech":
        e8 = {}
        for kind in (2, 3, 4):
            e8 = _s_axpy(e8, Fraction(1, 2), _s_pow(_s_theta(kind, 1, cap4), 8, cap4))
        prod = _s_mul(_s_mul(t2(1), t3(1), cap4), t4(1), cap4)
        series = _s_axpy({}, Fraction(1), _s_pow(e8, 3, cap4))
        series = _s_axpy(series, Fraction(-45, 16), _s_pow(prod, 8, cap4))
    else:
        raise UnknownForm(form)

    out: dict[int, int] = {}
    for e4, c in sorted(series.items()):
        if e4 == 0 or c == 0:
            continue
        if e4 % 4 != 0 or c.denominator != 1:
            raise ValueError(f"non-integral term q^{e4}/4 * {c} in form {form}")
        out[e4 // 4] = int(c)
    return out


# --- approximation ---------------------------------------------------------

def upper_incomplete_gamma(s: float, x: float) -> float:
    """Upper incomplete gamma Gamma(s, x) for s a positive multiple of 1/2.

    Built from the recurrence Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x}
    with bases Gamma(1, x) = e^{-x} and Gamma(1/2, x) = sqrt(pi) erfc(sqrt x).
    """
    if x < 0:
        raise DomainError("x must be nonnegative")
    twice = round(2 * s)
    if twice <= 0 or abs(2 * s - twice) > 1e-12:
        raise DomainError("s must be a positive multiple of 1/2")
    if twice % 2 == 0:
        base_s, val = 1.0, math.exp(-x)
    else:
        base_s, val = 0.5, math.sqrt(math.pi) * math.erfc(math.sqrt(x))
    t = base_s
    while t < s - 1e-12:
        val = t * val + x**t * math.exp(-x)
        t += 1.0
    return val


def theta_approx(
    q: float, n: int, lambda1: float, volume: float, sigma2: float | None = None
) -> ThetaApproxResult:
    """Rational theta-series approximation from sphere point counting.

    value = (1 - q^l1) - log(q) * l1^(n/2+1) * pi^(n/2)
            / (Gamma(n/2+1) * vol) * Integral_1^inf t^(n/2) q^(l1 t) dt,
    the integral evaluated in closed form as Gamma(n/2+1, b) / b^(n/2+1)
    with b = -l1 log q.
    """
    if not 0 < q < 1:
        raise DomainError("q must be in (0, 1)")
    if lambda1 <= 0 or volume <= 0:
        raise DomainError("lambda1 and volume must be positive")
    beta = -lambda1 * math.log(q)
    s = n / 2.0
    integral = upper_incomplete_gamma(s + 1.0, beta) / beta ** (s + 1.0)
    coeff = -math.log(q) * lambda1 ** (s + 1.0) * math.pi**s / (math.gamma(s + 1.0) * volume)
    value = (1.0 - q**lambda1) + coeff * integral
    return ThetaApproxResult(
        value=value, q=q, n=n, lambda1=lambda1, volume=volume, sigma2=sigma2
    )


def theta_approx_for(obj, q: float, sigma2: float | None = None) -> ThetaApproxResult:
    """theta_approx driven by a Lattice or a CatalogEntry."""
    if isinstance(obj, Lattice):
        lam1, _ = minimal_norm(obj)
        return theta_approx(q, obj.dim, lam1, obj.volume, sigma2=sigma2)
    return theta_approx(q, obj.dim, obj.lambda1, obj.volume, sigma2=sigma2)


# --- lattice Gaussian and flatness -----------------------------------------

def lattice_gaussian(
    lat: Lattice, y, sigma2: float, r_max: float, budget: int | None = None
) -> float:
    """Gaussian sum f(Lambda + y, sigma^2) truncated at ||x + y||^2 <= r_max."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    y = np.asarray(y, dtype=float)
    center = -y  # ||x + y||^2 = ||x - (-y)||^2
    _, _, sq = enumerate_coeffs(lat, r_max, center=center, budget=budget)
    norm = (2.0 * math.pi * sigma2) ** (-lat.dim / 2.0)
    return float(norm * np.exp(-sq / (2.0 * sigma2)).sum())


def _theta_exact_adaptive(lat: Lattice, sigma2: float, budget: int | None = None) -> float:
    """Theta value at q(sigma2) with the radius grown until the tail is
    below 1e-12 relative."""
    q = sigma2_to_q(sigma2)
    lam1, _ = minimal_norm(lat)
    r = max(lam1 + 1.0, 2.0 * sigma2 * (35.0 + lat.dim))
    prev = theta_exact(lat, r, budget=budget).evaluate(q)
    for _ in range(8):
        r *= 1.6
        cur = theta_exact(lat, r, budget=budget).evaluate(q)
        if abs(cur - prev) <= 1e-12 * cur:
            return cur
        prev = cur
    return prev


def flatness_from_theta(theta_value: float, n: int, volume: float, sigma2: float) -> tuple[float, float]:
    """(epsilon, vnr) from a precomputed theta value."""
    vnr = volume ** (2.0 / n) / (2.0 * math.pi * sigma2)
    return vnr ** (n / 2.0) * theta_value - 1.0, vnr


def flatness_factor(
    lat: Lattice, sigma2: float, mode: str = "exact", budget: int | None = None
) -> FlatnessPoint:
    """Flatness factor epsilon = vnr^(n/2) * Theta(e^{-1/(2 sigma^2)}) - 1."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    if mode == "exact":
        theta = _theta_exact_adaptive(lat, sigma2, budget=budget)
    elif mode == "approx":
        theta = theta_approx_for(lat, sigma2_to_q(sigma2), sigma2=sigma2).value
    else:
        raise ValueError("mode must be 'exact' or 'approx'")
    eps, vnr = flatness_from_theta(theta, lat.dim, lat.volume, sigma2)
    return FlatnessPoint(sigma2=sigma2, epsilon=eps, vnr=vnr, mode=mode)


def truncated_sum_baseline(lambda1: float, kissing: int, q: float) -> float:
    """First-shell truncation 1 + kappa * q^lambda1."""
    if not 0 <= q < 1:
        raise DomainError("q must be in [0, 1)")
    return 1.0 + kissing * q**lambda1


def baseline_for_entry(entry, q: float) -> float:
    """Baseline with lambda1/kappa taken from the entry.

    Uses enumeration when a generator exists, otherwise reads the
    kissing number off the closed form's leading coefficient.
    """
    if entry.generator is not None:
        lam1, kappa = minimal_norm(entry.lattice())
    else:
        coeffs = theta_form_coefficients(entry.theta_form, entry.dim, int(entry.lambda1))
        lam1 = min(coeffs)
        kappa = coeffs[lam1]
    return truncated_sum_baseline(lam1, kappa, q)
