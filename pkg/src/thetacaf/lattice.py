"""Lattice representation and geometry.

Points are enumerated with a layered (sphere-decoder style) search on
the Cholesky factor of the Gram matrix, vectorized level by level, so
exact shell counts stay cheap up to dimension ~12 at desk scale.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np

from .errors import EnumerationBudgetExceeded, NotNested, Singular
from .matrixkit import column_hnf_square

__all__ = [
    "Lattice",
    "LatticePoint",
    "NestedCode",
    "enumerate_within",
    "enumerate_coeffs",
    "minimal_norm",
    "successive_minima",
    "closest_point",
    "mod_lattice",
    "build_nested_code",
    "scaled",
    "lattice_from_spec",
    "load_lattice_file",
    "default_budget",
]

NORM_TOL = 1e-9
DEFAULT_BUDGET = 10**7


def default_budget() -> int:
    """Enumeration budget; LATTICE_THETA_BUDGET overrides the default."""
    env = os.environ.get("LATTICE_THETA_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


class Lattice:
    """Full-rank lattice given by a generator matrix (columns = basis)."""

    def __init__(self, generator, name: str | None = None):
        G = np.asarray(generator, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise ValueError("generator must be a square matrix")
        if not np.all(np.isfinite(G)):
            raise ValueError("generator entries must be finite")
        det = float(np.linalg.det(G))
        if abs(det) < 1e-12:
            raise Singular("generator matrix is singular")
        G = G.copy()
        G.setflags(write=False)
        self.generator = G
        self.name = name
        self._det = det

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    @property
    def volume(self) -> float:
        return abs(self._det)

    @cached_property
    def gram(self) -> np.ndarray:
        return self.generator.T @ self.generator

    @cached_property
    def generator_inv(self) -> np.ndarray:
        return np.linalg.inv(self.generator)

    @cached_property
    def is_integer(self) -> bool:
        return bool(np.all(np.abs(self.generator - np.round(self.generator)) < 1e-12))

    def point(self, coeffs) -> "LatticePoint":
        z = np.asarray(coeffs, dtype=np.int64)
        return LatticePoint(coords=self.generator @ z.astype(float), coeffs=z)

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<Lattice{tag} dim={self.dim} vol={self.volume:.6g}>"


@dataclass(frozen=True)
class LatticePoint:
    coords: np.ndarray
    coeffs: np.ndarray

    @property
    def sqnorm(self) -> float:
        return float(self.coords @ self.coords)

    def key(self) -> tuple:
        """Deterministic sort/tie-break key (lexicographic on coeffs)."""
        return tuple(int(c) for c in self.coeffs)


@dataclass(frozen=True)
class NestedCode:
    """Coset representatives of fine modulo coarse, with the code rate."""

    coarse: Lattice
    fine: Lattice
    representatives: list[LatticePoint]
    rate: float

    def __len__(self):
        return len(self.representatives)


def enumerate_coeffs(
    lat: Lattice,
    r: float,
    center=None,
    budget: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All integer coefficient vectors z with ||G z - center||^2 <= r + tol.

    Returns (Z, coords, sqnorms) with rows sorted by (sqnorm, coeffs).
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if budget is None:
        budget = default_budget()
    G = lat.generator
    n = lat.dim
    R = np.linalg.cholesky(lat.gram).T  # upper triangular, Gram = R^T R
    w = np.zeros(n) if center is None else np.linalg.solve(G, np.asarray(center, float))
    rr = r + NORM_TOL

    Z = np.zeros((1, n), dtype=np.int64)
    rem = np.array([rr])
    for i in range(n - 1, -1, -1):
        if i == n - 1:
            c = np.zeros(len(rem))
        else:
            c = (Z[:, i + 1:] - w[i + 1:]) @ R[i, i + 1:]
        s = np.sqrt(np.maximum(rem, 0.0))
        lo = np.ceil((-s - c) / R[i, i] + w[i] - 1e-12).astype(np.int64)
        hi = np.floor((s - c) / R[i, i] + w[i] + 1e-12).astype(np.int64)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total > budget:
            raise EnumerationBudgetExceeded(
                f"predicted {total} points exceeds budget {budget}"
            )
        if total == 0:
            Z = np.zeros((0, n), dtype=np.int64)
            rem = np.zeros(0)
            break
        idx = np.repeat(np.arange(len(rem)), cnt)
        offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        zi = lo[idx] + offs
        Znew = Z[idx]
        Znew = Znew.copy()
        Znew[:, i] = zi
        step = R[i, i] * (zi - w[i]) + c[idx]
        rem_new = rem[idx] - step * step
        keep = rem_new >= -NORM_TOL
        Z, rem = Znew[keep], rem_new[keep]

    coords = Z.astype(float) @ G.T
    diffs = coords if center is None else coords - np.asarray(center, float)
    sq = np.einsum("ij,ij->i", diffs, diffs)
    keep = sq <= rr
    Z, coords, sq = Z[keep], coords[keep], sq[keep]
    order = np.lexsort(tuple(Z[:, j] for j in range(n - 1, -1, -1)) + (sq,))
    return Z[order], coords[order], sq[order]


def enumerate_within(lat: Lattice, r: float, budget: int | None = None) -> list[LatticePoint]:
    """All lattice points x with ||x||^2 <= r (+1e-9 slack)."""
    Z, coords, _ = enumerate_coeffs(lat, r, budget=budget)
    return [LatticePoint(coords=coords[i], coeffs=Z[i]) for i in range(len(Z))]


def minimal_norm(lat: Lattice, budget: int | None = None) -> tuple[float, int]:
    """(lambda1, kissing number): smallest nonzero squared norm and its count."""
    r = float(np.min(np.sum(lat.generator**2, axis=0)))  # shortest basis vector
    _, _, sq = enumerate_coeffs(lat, r, budget=budget)
    pos = sq[sq > NORM_TOL]
    lam1 = float(pos.min())
    kissing = int(np.sum(np.abs(sq - lam1) <= NORM_TOL))
    return lam1, kissing


def successive_minima(lat: Lattice, budget: int | None = None) -> tuple[list[float], bool]:
    """Successive minima via enumeration, plus the well-rounded flag."""
    n = lat.dim
    r = float(np.max(np.sum(lat.generator**2, axis=0)))  # lambda_n upper bound
    Z, _, sq = enumerate_coeffs(lat, r, budget=budget)
    mask = sq > NORM_TOL
    Z, sq = Z[mask], sq[mask]
    minima: list[float] = []
    chosen = np.zeros((0, n))
    for i in range(len(sq)):
        cand = np.vstack([chosen, Z[i].astype(float)])
        if np.linalg.matrix_rank(cand, tol=1e-9) > len(chosen):
            chosen = cand
            minima.append(float(sq[i]))
            if len(minima) == n:
                break
    well_rounded = abs(minima[-1] - minima[0]) < NORM_TOL
    return minima, well_rounded


def closest_point(lat: Lattice, y, budget: int | None = None) -> LatticePoint:
    """Nearest lattice point; ties resolved by lexicographically
    smallest coefficient vector."""
    y = np.asarray(y, dtype=float)
    w = np.linalg.solve(lat.generator, y)
    z0 = np.round(w).astype(np.int64)
    d0 = float(np.sum((lat.generator @ z0.astype(float) - y) ** 2))
    Z, coords, sq = enumerate_coeffs(lat, d0, center=y, budget=budget)
    best = sq.min()
    tied = np.abs(sq - best) <= NORM_TOL
    cand = sorted(
        (tuple(int(v) for v in Z[i]), i) for i in np.flatnonzero(tied)
    )
    i = cand[0][1]
    return LatticePoint(coords=coords[i], coeffs=Z[i])


def mod_lattice(y, lat: Lattice, budget: int | None = None) -> np.ndarray:
    """y mod Lambda: the residual y - Q(y) inside the basic Voronoi cell."""
    y = np.asarray(y, dtype=float)
    return y - closest_point(lat, y, budget=budget).coords


def scaled(lat: Lattice, k: float, name: str | None = None) -> Lattice:
    """Lattice with generator scaled by k (k*Lambda)."""
    return Lattice(k * lat.generator, name=name)


def build_nested_code(coarse: Lattice, fine: Lattice, budget: int | None = None) -> NestedCode:
    """Nested lattice code C(coarse, fine): one representative per coset.

    Representatives are the mod-coarse images of coset members, with the
    deterministic closest-point tie-break resolving boundary points.
    """
    if coarse.dim != fine.dim:
        raise NotNested("dimension mismatch")
    T = fine.generator_inv @ coarse.generator
    Tr = np.round(T)
    if np.max(np.abs(T - Tr)) > 1e-9:
        raise NotNested("coarse generator columns are not integer in the fine basis")
    index = int(round(coarse.volume / fine.volume))
    if index > 10**6:
        raise EnumerationBudgetExceeded(f"coset index {index} exceeds 1e6")
    H = column_hnf_square(Tr.astype(np.int64))
    diag = [int(H[i, i]) for i in range(fine.dim)]
    reps: list[LatticePoint] = []
    for z in product(*(range(d) for d in diag)):
        x = fine.generator @ np.asarray(z, dtype=float)
        rep = mod_lattice(x, coarse, budget=budget)
        coeffs = np.round(fine.generator_inv @ rep).astype(np.int64)
        reps.append(LatticePoint(coords=rep, coeffs=coeffs))
    if len(reps) != index:
        raise NotNested(
            f"coset count {len(reps)} disagrees with volume ratio {index}"
        )
    rate = math.log2(len(reps)) / fine.dim
    return NestedCode(coarse=coarse, fine=fine, representatives=reps, rate=rate)


def _parse_scale(scale) -> float:
    if scale is None:
        return 1.0
    if isinstance(scale, str):
        if "/" in scale:
            num, den = scale.split("/")
            return float(num) / float(den)
        return float(scale)
    return float(scale)


def lattice_from_spec(spec: dict) -> Lattice:
    """Build a Lattice from the spec-file schema.

    Schema: { "name": str, "dim": int, "generator": row-major flat or
    nested array, "scale": optional number or "p/q" string }.
    """
    dim = int(spec["dim"])
    gen = np.asarray(spec["generator"], dtype=float).reshape(dim, dim)
    gen = gen * _parse_scale(spec.get("scale"))
    return Lattice(gen, name=spec.get("name"))


def load_lattice_file(path: str) -> Lattice:
    """Load a lattice spec from a JSON or TOML file."""
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib

        with open(path, "rb") as fh:
            spec = tomllib.load(fh)
    else:
        with open(path) as fh:
            spec = json.load(fh)
    return lattice_from_spec(spec)
