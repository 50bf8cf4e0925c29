"""Built-in named lattices and their tabulated attributes.

Generators for D3, D3*, D4 and the computer-search lattices are the
published simulation matrices; Zn/Dn generalize to any dimension. The
Coxeter-Todd and Leech entries carry closed-form theta series only.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import GeneratorUnavailable, UnknownLattice
from .lattice import Lattice, minimal_norm

__all__ = ["CatalogEntry", "get", "names", "validate_catalog"]

_PHI = (1.0 + sqrt(5.0)) / 2.0

_D3_GEN = [[-1, 1, 0], [-1, -1, 1], [0, 0, -1]]
_D3_STAR_GEN = [[2, 0, 1], [0, 2, 1], [0, 0, 1]]
_LAMBDA4_3_GEN = [[2, 0, 0], [1, -2, 1], [0, -1, -2]]
_D4_GEN = [[-1, 1, 0, 0], [-1, -1, 1, 0], [0, 0, -1, 1], [0, 0, 0, -1]]
_LAMBDA3_4_GEN = [[1, 1, -1, 1], [1, -1, 1, 1], [-1, 0, 0, 1], [0, 1, 1, 0]]
_LAMBDA4_4_GEN = [[-2, 0, 0, 0], [0, 0, 0, -2], [1, 1, -2, 1], [0, 2, 1, 0]]
_A2_GEN = [[1.0, 0.5], [0.0, sqrt(3.0) / 2.0]]
_GOLDEN_GEN = [[1.0, _PHI], [1.0, 1.0 - _PHI]]  # columns (1,1), (phi, phi_bar)

# E8 in the even coordinate system: basis vectors as columns,
# determinant 1, minimal norm 2.
_E8_BASIS_ROWS = [
    [2, 0, 0, 0, 0, 0, 0, 0],
    [-1, 1, 0, 0, 0, 0, 0, 0],
    [0, -1, 1, 0, 0, 0, 0, 0],
    [0, 0, -1, 1, 0, 0, 0, 0],
    [0, 0, 0, -1, 1, 0, 0, 0],
    [0, 0, 0, 0, -1, 1, 0, 0],
    [0, 0, 0, 0, 0, -1, 1, 0],
    [0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
]
_E8_GEN = np.asarray(_E8_BASIS_ROWS, dtype=float).T


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    dim: int
    generator: np.ndarray | None
    lambda1: float
    volume: float
    theta_form: str | None = None
    power_P: float | None = None
    codebook_size: int | None = None

    def lattice(self) -> Lattice:
        if self.generator is None:
            raise GeneratorUnavailable(
                f"{self.name} has no generator matrix (theta closed form only)"
            )
        return Lattice(self.generator, name=self.name)


def _dn_generator(n: int) -> np.ndarray:
    """Checkerboard lattice basis for any n >= 3 (all coordinate sums even)."""
    cols = [np.zeros(n) for _ in range(n)]
    cols[0][0] = cols[0][1] = 1.0
    for i in range(1, n):
        cols[i][i - 1] = 1.0
        cols[i][i] = -1.0
    return np.column_stack(cols)


def _dn_star_generator(n: int) -> np.ndarray:
    """2 * Dn^*: the union of 2Z^n and its all-ones translate."""
    G = 2.0 * np.eye(n)
    G[:, -1] = 1.0
    return G


def names() -> list[str]:
    return [
        "Zn", "Dn", "Dn_star", "A2", "A3", "E8", "K12", "Leech",
        "Lambda4_3", "Lambda3_4", "Lambda4_4", "GoldenQ5",
    ]


def _power(n: int, value_by_dim: dict[int, float]) -> float | None:
    return value_by_dim.get(n)


def _codebook(n: int) -> int | None:
    return {3: 343, 4: 2401}.get(n)


def get(name: str, n: int | None = None) -> CatalogEntry:
    """Catalog lookup; Zn/Dn/Dn_star require the dimension argument."""
    if name in ("Zn", "Dn", "Dn_star") and n is None:
        raise UnknownLattice(f"{name} requires a dimension")
    if name == "Zn":
        return CatalogEntry(
            "Zn", n, np.eye(n), lambda1=1.0, volume=1.0, theta_form="Zn",
            power_P=_power(n, {3: 4.0, 4: 4.0}), codebook_size=_codebook(n),
        )
    if name == "Dn":
        if n < 3:
            raise UnknownLattice("Dn requires n >= 3")
        gen = {3: _D3_GEN, 4: _D4_GEN}.get(n)
        gen = np.asarray(gen, float) if gen is not None else _dn_generator(n)
        return CatalogEntry(
            "Dn", n, gen, lambda1=2.0, volume=2.0, theta_form="Dn",
            power_P=_power(n, {3: 8.0, 4: 8.0}), codebook_size=_codebook(n),
        )
    if name == "Dn_star":
        gen = np.asarray(_D3_STAR_GEN, float) if n == 3 else _dn_star_generator(n)
        return CatalogEntry(
            "Dn_star", n, gen, lambda1=float(min(n, 4)), volume=float(2 ** (n - 1)),
            theta_form="Dn_star",
            power_P=_power(n, {3: 16.6667}), codebook_size=_codebook(n),
        )
    if name == "A2":
        return CatalogEntry(
            "A2", 2, np.asarray(_A2_GEN), lambda1=1.0, volume=sqrt(3.0 / 4.0),
            theta_form="A2",
        )
    if name == "A3":
        # A3 is congruent to D3; reuse the published D3 generator.
        return CatalogEntry(
            "A3", 3, np.asarray(_D3_GEN, float), lambda1=2.0, volume=2.0,
            theta_form="Dn", power_P=8.0, codebook_size=343,
        )
    if name == "E8":
        return CatalogEntry(
            "E8", 8, _E8_GEN, lambda1=2.0, volume=1.0, theta_form="E8",
        )
    if name == "K12":
        return CatalogEntry(
            "K12", 12, None, lambda1=4.0, volume=27.0, theta_form="K12",
        )
    if name == "Leech":
        return CatalogEntry(
            "Leech", 24, None, lambda1=4.0, volume=1.0, theta_form="Leech",
        )
    if name == "Lambda4_3":
        return CatalogEntry(
            "Lambda4_3", 3, np.asarray(_LAMBDA4_3_GEN, float),
            lambda1=5.0, volume=10.0, power_P=20.0, codebook_size=343,
        )
    if name == "Lambda3_4":
        return CatalogEntry(
            "Lambda3_4", 4, np.asarray(_LAMBDA3_4_GEN, float),
            lambda1=3.0, volume=8.0, power_P=12.0, codebook_size=2401,
        )
    if name == "Lambda4_4":
        return CatalogEntry(
            "Lambda4_4", 4, np.asarray(_LAMBDA4_4_GEN, float),
            lambda1=5.0, volume=20.0, power_P=20.0, codebook_size=2401,
        )
    if name == "GoldenQ5":
        return CatalogEntry(
            "GoldenQ5", 2, np.asarray(_GOLDEN_GEN), lambda1=2.0, volume=sqrt(5.0),
        )
    raise UnknownLattice(name)


def _default_dims() -> list[tuple[str, int | None]]:
    return [
        ("Zn", 1), ("Zn", 2), ("Zn", 3), ("Zn", 4),
        ("Dn", 3), ("Dn", 4), ("Dn_star", 3),
        ("A2", None), ("A3", None), ("E8", None),
        ("Lambda4_3", None), ("Lambda3_4", None), ("Lambda4_4", None),
        ("GoldenQ5", None), ("K12", None), ("Leech", None),
    ]


def validate_catalog(coeff_norm: int = 10) -> list[dict]:
    """Cross-check each entry's generator against its tabulated data.

    For entries with both a generator and a closed-form theta series,
    the enumerated shell counts up to ``coeff_norm`` are compared with
    the series coefficients. Returns a per-entry report; failures are
    recorded rather than raised.
    """
    from .theta import theta_exact, theta_form_coefficients

    report = []
    for name, n in _default_dims():
        entry = get(name, n)
        checks: dict[str, bool] = {}
        if entry.generator is not None:
            lat = entry.lattice()
            checks["volume"] = abs(lat.volume - entry.volume) < 1e-9
            lam1, _ = minimal_norm(lat)
            checks["lambda1"] = abs(lam1 - entry.lambda1) < 1e-9
            if entry.theta_form is not None:
                want = theta_form_coefficients(entry.theta_form, entry.dim, coeff_norm)
                series = theta_exact(lat, coeff_norm)
                got = {int(round(r)): c for r, c in series.terms.items()}
                checks["theta_coefficients"] = all(
                    got.get(r, 0) == want.get(r, 0) for r in range(1, coeff_norm + 1)
                )
        report.append(
            {
                "name": entry.name,
                "dim": entry.dim,
                "has_generator": entry.generator is not None,
                "checks": checks,
                "passed": all(checks.values()),
            }
        )
    return report
