"""Compute-and-forward over nested lattice codes.

Covers the relay chain end to end: channel sampling, MMSE scaling and
computation rate, integer coefficient search, the zero-block
decomposition of the stacked generator matrix, maximum-likelihood
decoding of an integer combination in both its definition form and its
decomposed form, the two-user scaled-equivalence identity, and the
sum-lattice probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    Degenerate,
    DimensionMismatch,
    EnumerationBudgetExceeded,
    InconsistentBundle,
    NonIntegerLattice,
)
from .lattice import Lattice, NestedCode, enumerate_coeffs
from .matrixkit import (
    as_int_matrix,
    hnf_zero_block,
    orthogonal_zero_block,
    unimodular_inverse,
)

__all__ = [
    "ChannelInstance",
    "EquationCoeffs",
    "DecompositionBundle",
    "DecodeResult",
    "ScaledEquivalenceResult",
    "sample_channel",
    "received_signal",
    "mmse_alpha",
    "computation_rate",
    "optimal_coeffs",
    "build_decomposition",
    "candidate_set",
    "ml_metric",
    "ml_metric_decomposed",
    "ml_decode",
    "scaled_equivalence_check",
    "sum_lattice_probe",
    "flatness_comparison",
]


@dataclass(frozen=True)
class ChannelInstance:
    """One channel draw: K real fading coefficients plus noise/power."""

    K: int
    h: np.ndarray
    sigma2: float
    P: float
    rho: float
    seed: int | None = None


@dataclass(frozen=True)
class EquationCoeffs:
    """Integer equation coefficients; gcd_flag marks gcd(a) == 1."""

    a: np.ndarray
    gcd_flag: bool


@dataclass(frozen=True)
class DecompositionBundle:
    """Zero-block decomposition of the stacked scaled generator matrix.

    M is the n x nK block row [a_1 M_1 | ... | a_K M_K]; U satisfies
    M U = [0 | B] with B invertible n x n. U_hat is the first n(K-1)
    rows of U^{-1}; U_blocks/V_blocks are the per-user n x n(K-1) and
    n x n slices of U's last columns split; M_L = sum_k h_k M_k U_k
    generates the effective sum lattice.
    """

    M: np.ndarray
    U: np.ndarray
    B: np.ndarray
    U_hat: np.ndarray
    U_blocks: list[np.ndarray]
    V_blocks: list[np.ndarray]
    M_L: np.ndarray
    mode: str


@dataclass(frozen=True)
class DecodeResult:
    lambda_hat: np.ndarray
    metric_value: float
    candidate_count: int
    metric_profile: list[tuple[tuple[int, ...], float]] | None = None


@dataclass(frozen=True)
class ScaledEquivalenceResult:
    """Two-user scaled-equivalence check result."""

    r: float
    r_signed: float
    equivalent: bool


def sample_channel(K: int, sigma2: float, P: float, seed: int | None = None) -> ChannelInstance:
    """Draw h ~ N(0, I_K); rho is the per-user SNR P / sigma2."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(K)
    return ChannelInstance(K=K, h=h, sigma2=sigma2, P=P, rho=P / sigma2, seed=seed)


def received_signal(h, xs, noise) -> np.ndarray:
    """y = sum_k h_k x_k + noise."""
    h = np.asarray(h, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if len(xs) != len(h):
        raise DimensionMismatch(f"{len(xs)} signals for {len(h)} coefficients")
    y = noise.astype(float).copy()
    for hk, x in zip(h, xs):
        x = np.asarray(x, dtype=float)
        if x.shape != noise.shape:
            raise DimensionMismatch("signal dimensions disagree")
        y += hk * x
    return y


def mmse_alpha(rho: float, h, a) -> float:
    """MMSE scaling alpha = rho h^T a / (1 + rho ||h||^2)."""
    h = np.asarray(h, dtype=float)
    a = np.asarray(a, dtype=float)
    return float(rho * (h @ a) / (1.0 + rho * (h @ h)))


def computation_rate(rho: float, h, a) -> float:
    """R(h, a) = 1/2 log2^+ ( (||a||^2 - rho (h^T a)^2 / (1 + rho ||h||^2))^{-1} )."""
    h = np.asarray(h, dtype=float)
    a = np.asarray(a, dtype=float)
    inner = float(a @ a - rho * (h @ a) ** 2 / (1.0 + rho * (h @ h)))
    inner = max(inner, 1e-300)
    return max(0.5 * math.log2(1.0 / inner), 0.0)


def _canonical_sign(a: np.ndarray) -> np.ndarray:
    for v in a:
        if v != 0:
            return a if v > 0 else -a
    return a


def optimal_coeffs(rho: float, h, box_bound: int = 8) -> EquationCoeffs:
    """Rate-optimal integer coefficients by exhaustive box search.

    Minimizes a^T G a with G = I - rho h h^T / (1 + rho ||h||^2) over
    nonzero a in [-box_bound, box_bound]^K, after canonicalizing signs
    (first nonzero entry positive). Ties within 1e-12 go to the
    lexicographically smallest vector.
    """
    h = np.asarray(h, dtype=float)
    K = len(h)
    G = np.eye(K) - rho * np.outer(h, h) / (1.0 + rho * (h @ h))
    best_val = math.inf
    best = None
    for tup in product(range(-box_bound, box_bound + 1), repeat=K):
        a = np.asarray(tup, dtype=np.int64)
        if not a.any():
            continue
        a = _canonical_sign(a)
        val = float(a @ G @ a)
        key = tuple(int(v) for v in a)
        if val < best_val - 1e-12 or (abs(val - best_val) <= 1e-12 and key < best):
            best_val = val
            best = key
    a = np.asarray(best, dtype=np.int64)
    g = 0
    for v in a:
        g = math.gcd(g, int(abs(v)))
    return EquationCoeffs(a=a, gcd_flag=(g == 1))


def _bundle_from_U(M: np.ndarray, U: np.ndarray, U_inv: np.ndarray,
                   lattices: list[Lattice], h, mode: str) -> DecompositionBundle:
    n = lattices[0].dim
    K = len(lattices)
    h = np.asarray(h, dtype=float)
    Uf = np.asarray(U, dtype=float)
    B = np.asarray(np.dot(np.asarray(M, dtype=float), Uf), dtype=float)[:, n * (K - 1):]
    U_hat = np.asarray(U_inv, dtype=float)[: n * (K - 1), :]
    U_blocks = []
    V_blocks = []
    tail = Uf[:, : n * (K - 1)]
    last = Uf[:, n * (K - 1):]
    for k in range(K):
        U_blocks.append(tail[k * n:(k + 1) * n, :])
        V_blocks.append(last[k * n:(k + 1) * n, :])
    M_L = np.zeros((n, n * (K - 1)))
    for k in range(K):
        M_L += h[k] * (lattices[k].generator @ U_blocks[k])
    return DecompositionBundle(
        M=np.asarray(M, dtype=float), U=Uf, B=B, U_hat=U_hat,
        U_blocks=U_blocks, V_blocks=V_blocks, M_L=M_L, mode=mode,
    )


def build_decomposition(a, lattices: list[Lattice], h, mode: str = "hnf") -> DecompositionBundle:
    """Zero-block decomposition of M = [a_1 M_1 | ... | a_K M_K].

    mode="hnf" requires integer generators and produces an exact
    unimodular U; mode="orthogonal" works for any real generators and
    produces an orthogonal U.
    """
    a = np.asarray(a)
    K = len(lattices)
    if len(a) != K:
        raise DimensionMismatch(f"{len(a)} coefficients for {K} lattices")
    n = lattices[0].dim
    if any(lat.dim != n for lat in lattices):
        raise DimensionMismatch("all lattices must share one dimension")
    blocks = [float(a[k]) * lattices[k].generator for k in range(K)]
    M = np.hstack(blocks)
    if mode == "hnf":
        for lat in lattices:
            if not lat.is_integer:
                raise NonIntegerLattice(
                    "hnf mode requires integer generator matrices"
                )
        Mi = as_int_matrix(np.round(M))
        U, _ = hnf_zero_block(Mi)
        U_inv = unimodular_inverse(U)
        return _bundle_from_U(Mi, U, U_inv, lattices, h, "hnf")
    if mode == "orthogonal":
        U, _ = orthogonal_zero_block(M)
        return _bundle_from_U(M, U, U.T, lattices, h, "orthogonal")
    raise ValueError("mode must be 'hnf' or 'orthogonal'")


def candidate_set(a, codes: list[NestedCode], budget: int | None = None) -> list[np.ndarray]:
    """All values of sum_k a_k x_k reachable inside the search sphere.

    The combination lambda = sum a_k x_k lies within
    sum |a_k| * max ||x|| of the origin whenever each x_k stays in its
    codebook ball, so candidates are the fine-lattice points of the
    first nonzero-coefficient user within that radius.
    """
    a = np.asarray(a)
    k_min = next(i for i, v in enumerate(a) if v != 0)
    max_norms = [
        max((math.sqrt(p.sqnorm) for p in c.representatives), default=0.0)
        for c in codes
    ]
    bound = sum(abs(float(a[k])) * max_norms[k] for k in range(len(a)))
    _, coords, _ = enumerate_coeffs(codes[k_min].fine, bound * bound, budget=budget)
    return [coords[i] for i in range(len(coords))]


def _tuple_table(codes: list[NestedCode], a, h):
    """Vectorized table over all codeword tuples (x_1, ..., x_K).

    Returns (lams, hx, Z) where row t of lams is sum_k a_k x_k, row t of
    hx is sum_k h_k x_k, and Z stacks the per-user fine-basis
    coefficient vectors of the tuple.
    """
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    K = len(codes)
    n = codes[0].fine.dim
    coords = [np.stack([p.coords for p in c.representatives]) for c in codes]
    zs = [np.stack([p.coeffs for p in c.representatives]) for c in codes]
    sizes = [len(c) for c in codes]
    total = int(np.prod(sizes))
    lams = np.zeros((total, n))
    hx = np.zeros((total, n))
    Z = np.zeros((total, n * K), dtype=np.int64)
    reps = total
    for k in range(K):
        reps //= sizes[k]
        idx = np.tile(np.repeat(np.arange(sizes[k]), reps), total // (sizes[k] * reps))
        lams += a[k] * coords[k][idx]
        hx += h[k] * coords[k][idx]
        Z[:, k * n:(k + 1) * n] = zs[k][idx]
    return lams, hx, Z


def _norm_key(v: np.ndarray) -> tuple:
    return tuple(round(float(x), 9) for x in v)


def ml_metric(y, h, a, codes: list[NestedCode], sigma2: float, lam) -> float:
    """Definition-form likelihood of the combination lambda:
    phi(lambda) = sum over tuples with sum a_k x_k = lambda of
    exp(-||y - sum h_k x_k||^2 / (2 sigma^2))."""
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    lams, hx, _ = _tuple_table(codes, a, h)
    match = np.all(np.abs(lams - lam) <= 1e-9, axis=1)
    if not match.any():
        return 0.0
    d = y - hx[match]
    sq = np.einsum("ij,ij->i", d, d)
    return float(np.exp(-sq / (2.0 * sigma2)).sum())


def ml_metric_decomposed(
    y, h, a, codes: list[NestedCode], sigma2: float, lam,
    bundle: DecompositionBundle,
) -> float:
    """Decomposition-form likelihood of lambda.

    Each tuple with combination lambda is reached as mu_k(lambda) plus a
    sum-lattice translate: with z the stacked coefficient vector,
    r = U_hat z indexes q = M_L r, and the residual is
    omega(lambda) - q where omega(lambda) = y - sum h_k mu_k(lambda),
    mu_k(lambda) = M_k V_k B^{-1} lambda.
    """
    y = np.asarray(y, dtype=float)
    lam = np.asarray(lam, dtype=float)
    K = len(codes)
    n = codes[0].fine.dim
    h = np.asarray(h, dtype=float)
    lam_b = np.linalg.solve(bundle.B, lam)
    omega = y.copy()
    for k in range(K):
        mu_k = codes[k].fine.generator @ (bundle.V_blocks[k] @ lam_b)
        omega -= h[k] * mu_k
    lams, _, Z = _tuple_table(codes, a, h)
    match = np.all(np.abs(lams - lam) <= 1e-9, axis=1)
    if not match.any():
        return 0.0
    R = Z[match].astype(float) @ bundle.U_hat.T
    Q = R @ bundle.M_L.T
    d = omega[None, :] - Q
    sq = np.einsum("ij,ij->i", d, d)
    return float(np.exp(-sq / (2.0 * sigma2)).sum())


def ml_decode(
    y, h, a, codes: list[NestedCode], sigma2: float,
    mode: str = "definition", bundle: DecompositionBundle | None = None,
    want_profile: bool = False,
) -> DecodeResult:
    """Maximum-likelihood estimate of lambda = sum_k a_k x_k.

    Candidates are every distinct combination reachable from the
    codebooks; ties in the metric break to the lexicographically
    smallest candidate coordinates.
    """
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    lams, hx, Z = _tuple_table(codes, a, h)
    d = y[None, :] - hx
    sq = np.einsum("ij,ij->i", d, d)
    weights = np.exp(-sq / (2.0 * sigma2))

    if mode == "decomposed":
        if bundle is None:
            raise InconsistentBundle("decomposed mode requires a bundle")
        scores: dict[tuple, float] = {}
        lam_of: dict[tuple, np.ndarray] = {}
        for key in {_norm_key(lams[i]) for i in range(len(lams))}:
            lam = np.asarray(key)
            scores[key] = ml_metric_decomposed(y, h, a, codes, sigma2, lam, bundle)
            lam_of[key] = lam
    else:
        if mode != "definition":
            raise ValueError("mode must be 'definition' or 'decomposed'")
        scores = {}
        lam_of = {}
        for i in range(len(lams)):
            key = _norm_key(lams[i])
            scores[key] = scores.get(key, 0.0) + float(weights[i])
            lam_of[key] = lams[i]

    best_key = None
    best_val = -math.inf
    for key in sorted(scores):
        val = scores[key]
        if val > best_val + 1e-15:
            best_key, best_val = key, val
    profile = (
        sorted(((k, v) for k, v in scores.items()), key=lambda kv: kv[0])
        if want_profile else None
    )
    return DecodeResult(
        lambda_hat=lam_of[best_key],
        metric_value=best_val,
        candidate_count=len(scores),
        metric_profile=profile,
    )


def scaled_equivalence_check(M_lattice, c: int, a, h) -> ScaledEquivalenceResult:
    """Two-user identity: the sum lattice of [a_1 c M | a_2 M] is the
    base lattice scaled by r = c (a_1 h_2 - a_2 h_1).

    Requires gcd(a_1, a_2) = 1. The check recovers the scale from the
    determinant ratio and verifies W = M_Lambda^{-1} M_L / r is integer
    unimodular; r_signed reports the closed-form scale.
    """
    M_lat = np.asarray(M_lattice, dtype=float)
    a = np.asarray(a)
    h = np.asarray(h, dtype=float)
    if len(a) != 2 or len(h) != 2:
        raise DimensionMismatch("two users required")
    if math.gcd(int(a[0]), int(a[1])) != 1:
        raise ValueError("gcd(a_1, a_2) must be 1")
    r_signed = float(c) * (float(a[0]) * h[1] - float(a[1]) * h[0])
    if abs(r_signed) < 1e-9:
        raise Degenerate("a_1 h_2 - a_2 h_1 vanishes: sum lattice collapses")
    lat1 = Lattice(float(c) * M_lat)
    lat2 = Lattice(M_lat)
    bundle = build_decomposition(a, [lat1, lat2], h, mode="hnf")
    n = M_lat.shape[0]
    det_ratio = np.linalg.det(bundle.M_L) / np.linalg.det(M_lat)
    r = abs(det_ratio) ** (1.0 / n)
    W = np.linalg.solve(M_lat, bundle.M_L) / r
    Wr = np.round(W)
    is_int = bool(np.max(np.abs(W - Wr)) < 1e-6)
    is_unimod = bool(abs(abs(np.linalg.det(Wr)) - 1.0) < 1e-6) if is_int else False
    return ScaledEquivalenceResult(r=float(r), r_signed=r_signed, equivalent=is_int and is_unimod)


def sum_lattice_probe(
    lattices: list[Lattice], h, a=None, p: int = 2, budget: int | None = None
) -> tuple[np.ndarray, float]:
    """Points of the effective sum lattice M_L z for z in [-p, p]^{n(K-1)}.

    Returns (points, min nonzero squared norm); z = 0 is excluded from
    the minimum.
    """
    K = len(lattices)
    n = lattices[0].dim
    if a is None:
        a = np.ones(K, dtype=np.int64)
    bundle = build_decomposition(a, lattices, h, mode="hnf")
    m = n * (K - 1)
    count = (2 * p + 1) ** m
    if budget is None:
        budget = 10**7
    if count > budget:
        raise EnumerationBudgetExceeded(f"{count} probe points exceeds budget {budget}")
    grid = np.stack(np.meshgrid(*([np.arange(-p, p + 1)] * m), indexing="ij"), axis=-1)
    Zs = grid.reshape(-1, m).astype(float)
    pts = Zs @ bundle.M_L.T
    sq = np.einsum("ij,ij->i", pts, pts)
    nz = sq[np.any(Zs != 0, axis=1)]
    return pts, float(nz.min())


def flatness_comparison(entries, rho_db: float, P: float | None = None) -> list[dict]:
    """Flatness factor of each catalog entry at sigma^2 = P / rho.

    P defaults to each entry's tabulated power constraint.
    """
    from .theta import flatness_factor

    rho = 10.0 ** (rho_db / 10.0)
    out = []
    for entry in entries:
        power = P if P is not None else entry.power_P
        sigma2 = power / rho
        pt = flatness_factor(entry.lattice(), sigma2)
        out.append(
            {
                "name": entry.name,
                "dim": entry.dim,
                "P": power,
                "sigma2": sigma2,
                "epsilon": pt.epsilon,
                "vnr": pt.vnr,
            }
        )
    return out
