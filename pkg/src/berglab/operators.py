"""Finite model of the Bergman space and the operator checks that run on it.

The Galerkin space is spanned by normalized monomials up to a degree cap;
Toeplitz compressions are assembled as Q^H diag(f) Q against a quadrature
whose Gram is the identity, so symbol bounds transfer to operator-norm
bounds exactly.  Hankel blocks live on an enlarged truncation that also
carries low conjugate degrees.  Everything downstream (Berezin transforms,
discrete kernel sums, localized sums, compactness diagnostics) is dense
linear algebra over these bases.
"""

from __future__ import annotations

import itertools
import json
import struct
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .domain import DomainSpec, normal_direction
from .kernel import EXACT_BALL, ball_quadrature, kernel_eval, monomial_norm_sq
from .metric import CHEAP_BUDGET, DistanceBudget, DistanceEstimator, straight_chord_upper


class OperatorError(ValueError):
    pass


def _multi_indices(n: int, max_total: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(max_total + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            alpha = [0] * n
            for c in combo:
                alpha[c] += 1
            out.append(tuple(alpha))
    return out


# -- Galerkin space ---------------------------------------------------------------


@dataclass(frozen=True)
class GalerkinSpace:
    """Orthonormal monomial model of the ball's Bergman space up to degree N."""

    n: int
    N: int
    alphas: list[tuple[int, ...]]
    norms: np.ndarray
    quad: object
    Qw: np.ndarray  # (nodes, dim): sqrt(w_q) e_alpha(x_q)

    @property
    def dim(self) -> int:
        return len(self.alphas)

    def basis_eval(self, pts: np.ndarray) -> np.ndarray:
        """Matrix of normalized monomial values, shape (m, dim)."""
        pts = np.asarray(pts, complex).reshape(-1, self.n)
        out = np.empty((len(pts), self.dim), complex)
        for j, a in enumerate(self.alphas):
            v = np.ones(len(pts), complex)
            for i, ai in enumerate(a):
                if ai:
                    v = v * pts[:, i] ** ai
            out[:, j] = v / self.norms[j]
        return out

    def gram_defect(self) -> float:
        g = self.Qw.conj().T @ self.Qw
        return float(np.max(np.abs(g - np.eye(self.dim))))

    def kernel_coeffs(self, z: np.ndarray) -> np.ndarray:
        """Coefficients of the truncated normalized kernel at z.

        <K_z, e_alpha> = conj(e_alpha(z)); dividing by ||K_z|| = sqrt(K(z,z))
        gives the truncation of the unit-norm kernel.
        """
        z = np.asarray(z, complex).reshape(-1)
        dom = _ball_domain(self.n)
        kzz = float(np.real(kernel_eval(dom, EXACT_BALL, z, z.reshape(1, -1))[0]))
        e = self.basis_eval(z.reshape(1, -1))[0]
        return np.conj(e) / np.sqrt(kzz)

    def truncation_mass(self, z: np.ndarray) -> float:
        """||k_z^{(N)}||^2, the kernel mass captured by the truncation."""
        return float(np.sum(np.abs(self.kernel_coeffs(z)) ** 2))


_BALL_CACHE: dict[int, DomainSpec] = {}


def _ball_domain(n: int) -> DomainSpec:
    if n not in _BALL_CACHE:
        from .domain import unit_ball

        _BALL_CACHE[n] = unit_ball(n)
    return _BALL_CACHE[n]


def build_galerkin(n: int, N: int, quad_degree: int | None = None) -> GalerkinSpace:
    if N < 0:
        raise OperatorError("degree cap must be nonnegative")
    if quad_degree is None:
        quad_degree = 2 * N + 2 * (n + 1)
    if quad_degree < 2 * N:
        raise OperatorError("quadrature exactness below 2N cannot orthonormalize the basis")
    quad = ball_quadrature(n, quad_degree)
    alphas = _multi_indices(n, N)
    norms = np.array([np.sqrt(monomial_norm_sq(n, a)) for a in alphas])
    space = GalerkinSpace(n, N, alphas, norms, quad, np.empty((0, 0)))
    vals = space.basis_eval(quad.nodes)
    Qw = vals * np.sqrt(quad.weights)[:, None]
    space = GalerkinSpace(n, N, alphas, norms, quad, Qw)
    if space.gram_defect() > 1e-8:
        raise OperatorError("quadrature Gram deviates from the identity")
    return space


@dataclass(frozen=True)
class OperatorMatrix:
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, complex))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.matrix @ other.matrix, f"({self.label})({other.label})")


def _symbol_values(space: GalerkinSpace, f) -> np.ndarray:
    vals = f(space.quad.nodes)
    return np.asarray(vals, complex).reshape(len(space.quad.nodes))


def toeplitz_matrix(space: GalerkinSpace, f, label: str = "T_f") -> OperatorMatrix:
    """Compression of multiplication by f: entries <f e_beta, e_alpha>.

    The Q^H diag(f) Q form with an exact-Gram quadrature keeps the norm at
    or below the sup of |f| on the nodes.
    """
    fv = _symbol_values(space, f)
    mat = space.Qw.conj().T @ (fv[:, None] * space.Qw)
    return OperatorMatrix(mat, label)


def identity_operator(space: GalerkinSpace) -> OperatorMatrix:
    return OperatorMatrix(np.eye(space.dim), "I")


# -- enlarged truncation and Hankel blocks ------------------------------------------


@dataclass(frozen=True)
class EnlargedSpace:
    """Orthonormalized mixed monomials z^a conj(z)^b on the ball.

    Holomorphic pairs (a, 0) come first, so the analytic projection is a
    coordinate truncation.
    """

    n: int
    N: int
    conj_degree: int
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]]
    n_holo: int
    chol: np.ndarray
    quad: object
    Uw: np.ndarray  # (nodes, dim) orthonormalized values with sqrt weights
    galerkin_cols: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.pairs)


def _mixed_gram_entry(n: int, a, b, c, d) -> float:
    left = tuple(ai + di for ai, di in zip(a, d))
    right = tuple(bi + ci for bi, ci in zip(b, c))
    if left != right:
        return 0.0
    return monomial_norm_sq(n, left)


def build_enlarged(space: GalerkinSpace, conj_degree: int = 2) -> EnlargedSpace:
    n, N = space.n, space.N
    holo = [(a, (0,) * n) for a in _multi_indices(n, N + conj_degree)]
    mixed = [
        (a, b)
        for a in _multi_indices(n, N + conj_degree)
        for b in _multi_indices(n, conj_degree)
        if sum(b) >= 1
    ]
    pairs = holo + mixed
    dim = len(pairs)
    pre = np.array([np.sqrt(monomial_norm_sq(n, tuple(ai + bi for ai, bi in zip(a, b)))) for a, b in pairs])
    G = np.empty((dim, dim))
    for i, (a, b) in enumerate(pairs):
        for j, (c, d) in enumerate(pairs):
            G[i, j] = _mixed_gram_entry(n, c, d, a, b) / (pre[i] * pre[j])
    # G[i,j] = <v_j, v_i> for prenormalized monomials
    jitter = 1e-13
    L = np.linalg.cholesky(G + jitter * np.eye(dim))

    angular = 2 * (N + 2 * conj_degree) + 3 if n == 1 else 2 * (N + 2 * conj_degree) + 3
    qdeg = 2 * (N + 2 * conj_degree) + 2
    quad = ball_quadrature(n, qdeg, angular_order=None if n == 1 else angular)
    pts = quad.nodes
    V = np.empty((len(pts), dim), complex)
    for j, (a, b) in enumerate(pairs):
        v = np.ones(len(pts), complex)
        for i, ai in enumerate(a):
            if ai:
                v = v * pts[:, i] ** ai
        for i, bi in enumerate(b):
            if bi:
                v = v * np.conj(pts[:, i]) ** bi
        V[:, j] = v / pre[j]
    U = solve_triangular(L, V.conj().T, lower=True).conj().T
    Uw = U * np.sqrt(quad.weights)[:, None]
    gal_cols = np.array([holo.index((a, (0,) * n)) for a in space.alphas])
    return EnlargedSpace(n, N, conj_degree, pairs, len(holo), L, quad, Uw, gal_cols)


_ENLARGED_CACHE: dict[tuple[int, int, int], EnlargedSpace] = {}


def enlarged_space(space: GalerkinSpace, conj_degree: int = 2) -> EnlargedSpace:
    key = (space.n, space.N, conj_degree)
    if key not in _ENLARGED_CACHE:
        _ENLARGED_CACHE[key] = build_enlarged(space, conj_degree)
    return _ENLARGED_CACHE[key]


def hankel_and_commutator(space: GalerkinSpace, f, conj_degree: int = 2) -> dict:
    """Norms of the Hankel blocks (1-P) M_f P and (1-P) M_conj(f) P.

    Realized on the enlarged truncation; the commutator norm of [M_f, P]
    equals the larger of the two Hankel norms.
    """
    enl = enlarged_space(space, conj_degree)
    if enl.dim > 4000:
        raise OperatorError("enlarged truncation too large")
    fv = np.asarray(f(enl.quad.nodes), complex).reshape(-1)
    M = enl.Uw.conj().T @ (fv[:, None] * enl.Uw)
    H = M[enl.n_holo :, enl.galerkin_cols]
    Hbar = M[enl.galerkin_cols, enl.n_holo :].conj().T
    h_norm = float(np.linalg.norm(H, 2)) if H.size else 0.0
    hbar_norm = float(np.linalg.norm(Hbar, 2)) if Hbar.size else 0.0
    return {"hankel_norm": h_norm, "hankel_conj_norm": hbar_norm, "commutator_norm": max(h_norm, hbar_norm)}


# -- Berezin transform --------------------------------------------------------------


def berezin(space: GalerkinSpace, A: OperatorMatrix, z: np.ndarray, mass_floor: float = 1e-8) -> complex:
    """<A k_z, k_z> on the truncated normalized kernel, renormalized."""
    v = space.kernel_coeffs(z)
    m2 = float(np.sum(np.abs(v) ** 2))
    if m2 < mass_floor:
        raise OperatorError("truncated kernel mass too small at this depth")
    return complex(np.vdot(v, A.matrix @ v) / m2)


def resolution_limit(space: GalerkinSpace, mass: float = 0.99) -> float:
    """Deepest boundary distance where the truncated kernel keeps the mass."""
    lo, hi = 1e-12, 1.0
    for _ in range(60):
        mid = np.sqrt(lo * hi)
        z = np.zeros(space.n, complex)
        z[0] = np.sqrt(1 - mid)
        if space.truncation_mass(z) >= mass:
            hi = mid
        else:
            lo = mid
    return float(hi)


# -- oscillation --------------------------------------------------------------------


@dataclass(frozen=True)
class OscillationProfile:
    shell_depths: np.ndarray
    shell_sup: np.ndarray
    diff: float
    vo_verdict: bool


def oscillation_profile(
    dom: DomainSpec,
    f,
    pair_samples: int = 40,
    seed: int = 0,
    shells: tuple[int, int] = (2, 12),
    budget: DistanceBudget = CHEAP_BUDGET,
    partners: int = 12,
    radius: float = 1.0,
) -> OscillationProfile:
    """Sampled sup of |f(z) - f(w)| over pairs within estimator distance 1.

    Pairs are generated inside scaled tangential/normal boxes and kept only
    when the estimator confirms the distance bound, so the recorded sup is a
    true lower bound for the continuum oscillation.
    """
    rng = np.random.default_rng(seed)
    est = DistanceEstimator(dom, budget)
    k_lo, k_hi = shells
    depths = []
    sups = []
    for k in range(k_lo, k_hi + 1):
        t = 2.0**-k
        sup_k = 0.0
        for _ in range(pair_samples):
            z = _shell_point(dom, t, rng)
            fz = complex(f(z.reshape(1, -1))[0])
            ws = _nearby_candidates(dom, z, rng, partners)
            for w in ws:
                if dom.r_val(w) >= 0:
                    continue
                if est(z, w) <= radius:
                    fw = complex(f(w.reshape(1, -1))[0])
                    sup_k = max(sup_k, abs(fz - fw))
        depths.append(t)
        sups.append(sup_k)
    sups_arr = np.asarray(sups)
    head = max(np.max(sups_arr[: max(len(sups_arr) // 3, 1)]), 1e-12)
    tail = np.max(sups_arr[-max(len(sups_arr) // 3, 1) :])
    verdict = bool(tail <= 0.5 * head or tail < 1e-6)
    return OscillationProfile(np.asarray(depths), sups_arr, float(np.max(sups_arr)), verdict)


def _shell_point(dom: DomainSpec, t: float, rng: np.random.Generator) -> np.ndarray:
    from .gauge import _ray_field

    rays = _ray_field(dom)
    pts, _ = rays.layer_sample(t * 0.9, t * 1.1, 1, rng)
    return pts[0]


def _nearby_candidates(dom: DomainSpec, z: np.ndarray, rng: np.random.Generator, count: int) -> np.ndarray:
    t = max(-float(dom.r_val(z)), 1e-12)
    u = normal_direction(dom, z)
    from .metric import Polydisc

    pd = Polydisc(z, u, 0.35 * np.sqrt(t), 0.35 * t)
    return pd.sample(count, rng)


def measured_diff(dom: DomainSpec, f, seed: int = 0, pair_samples: int = 30) -> float:
    return oscillation_profile(dom, f, pair_samples=pair_samples, seed=seed).diff


# -- cutoff families ----------------------------------------------------------------


def _inward_depth_points(dom: DomainSpec, pts: np.ndarray, target: float) -> np.ndarray:
    """For each point, the inward-normal point at boundary distance ``target``."""
    pts = np.asarray(pts, complex).reshape(-1, dom.n)
    out = pts.copy()
    need = -dom.r_val(pts) < target
    if not np.any(need):
        return out
    zs = pts[need]
    u = dom.dbar_r(zs)
    u = u / np.linalg.norm(u, axis=-1, keepdims=True)
    step = target / np.maximum(dom.grad_norm(zs), 1e-12)
    s_hi = step.copy()
    for _ in range(200):
        deep = -dom.r_val(zs - s_hi[:, None] * u) >= target
        if np.all(deep):
            break
        s_hi = np.where(deep, s_hi, s_hi * 1.5)
    s_lo = np.zeros_like(s_hi)
    for _ in range(60):
        mid = 0.5 * (s_lo + s_hi)
        deep = -dom.r_val(zs - mid[:, None] * u) >= target
        s_hi = np.where(deep, mid, s_hi)
        s_lo = np.where(deep, s_lo, mid)
    out[need] = zs - s_hi[:, None] * u
    return out


def distance_to_deep_set(dom: DomainSpec, pts: np.ndarray, t: float) -> np.ndarray:
    """Estimator distance from each point to the region {-r >= t}.

    Zero inside the region; otherwise the chord to the inward-normal point
    at depth t, an upper bound by construction.
    """
    pts = np.asarray(pts, complex).reshape(-1, dom.n)
    inside = -dom.r_val(pts) >= t
    out = np.zeros(len(pts))
    if np.any(~inside):
        zs = pts[~inside]
        anchors = _inward_depth_points(dom, zs, t)
        out[~inside] = straight_chord_upper(dom, zs, anchors)
    return out


def cutoff_family(dom: DomainSpec, kind: str, t: float, delta: float):
    """Lipschitz cutoffs keyed to the deep region {-r >= t}.

    kind "lambda": 1 on the deep region, sloping to 0 at estimator distance
    1/delta; kind "phi": 0 on the deep region, rising to 1 at distance
    1/delta, hence supported where -r < t.
    """
    if t <= 0 or delta <= 0:
        raise OperatorError("cutoff parameters must be positive")
    probe = _deepest_probe(dom)
    if -dom.r_val(probe) < t:
        raise OperatorError("deep region is empty at this threshold")

    if kind == "lambda":

        def g(pts):
            d = distance_to_deep_set(dom, pts, t)
            return np.clip(1.0 - delta * d, 0.0, 1.0)

    elif kind == "phi":

        def g(pts):
            d = distance_to_deep_set(dom, pts, t)
            return np.clip(delta * d, 0.0, 1.0)

    else:
        raise OperatorError(f"unknown cutoff kind {kind!r}")

    return g


def _deepest_probe(dom: DomainSpec) -> np.ndarray:
    rng = np.random.default_rng(99)
    box = dom.bounding_box
    raw = rng.uniform(box[:, 0], box[:, 1], size=(4096, 2 * dom.n))
    zz = raw[:, : dom.n] + 1j * raw[:, dom.n :]
    rv = dom.r_val(zz)
    return zz[int(np.argmin(rv))]


# -- discrete sums and localization ---------------------------------------------------


def discrete_sum_matrix(
    space: GalerkinSpace,
    points: np.ndarray,
    coeffs: np.ndarray,
    phi_map=None,
    psi_map=None,
    label: str = "discrete-sum",
) -> OperatorMatrix:
    """Sum of c_z k_phi(z) (x) k_psi(z) over the point family, truncated."""
    points = np.asarray(points, complex).reshape(-1, space.n)
    coeffs = np.asarray(coeffs, complex).reshape(-1)
    if len(points) != len(coeffs):
        raise OperatorError("coefficient count mismatch")
    phi_pts = points if phi_map is None else np.asarray([phi_map(p) for p in points], complex)
    psi_pts = points if psi_map is None else np.asarray([psi_map(p) for p in points], complex)
    mat = np.zeros((space.dim, space.dim), complex)
    for c, zp, zq in zip(coeffs, phi_pts, psi_pts):
        u = space.kernel_coeffs(zp)
        v = space.kernel_coeffs(zq)
        mat += c * np.outer(u, np.conj(v))
    return OperatorMatrix(mat, label)


def loc_assemble(space: GalerkinSpace, A: OperatorMatrix, cutoffs: list) -> OperatorMatrix:
    """Sum of T_f A T_f over the cutoff family."""
    total = np.zeros((space.dim, space.dim), complex)
    for f in cutoffs:
        tf = toeplitz_matrix(space, f).matrix
        total += tf @ A.matrix @ tf
    return OperatorMatrix(total, "LOC")


def offdiag_split_search(space: GalerkinSpace, A: OperatorMatrix, f_list: list) -> dict:
    """Witness (gamma, E) with ||sum_{j!=k} T_j A T_k|| <= 4(||T_F' A T_G|| + ||T_G' A T_F||).

    Exhaustive over subsets and fourth-root-of-unity phases; the first
    witness wins.  Symbols must have pairwise disjoint supports.
    """
    ell = len(f_list)
    if ell > 12:
        raise OperatorError("witness search capped at 12 symbols")
    T = [toeplitz_matrix(space, f).matrix for f in f_list]
    Am = A.matrix
    total = sum(T)
    S = total @ Am @ total - sum(t @ Am @ t for t in T)
    lhs = float(np.linalg.norm(S, 2)) if ell else 0.0
    phases = [1.0, -1.0, 1j, -1j]
    for E_mask in range(2**ell):
        E = [k for k in range(ell) if (E_mask >> k) & 1]
        comp = [k for k in range(ell) if k not in E]
        TF = sum((T[k] for k in E), np.zeros_like(Am))
        TG = sum((T[k] for k in comp), np.zeros_like(Am))
        for gamma in itertools.product(phases, repeat=ell):
            TFp = sum((gamma[k] * T[k] for k in E), np.zeros_like(Am))
            TGp = sum((gamma[k] * T[k] for k in comp), np.zeros_like(Am))
            rhs = 4.0 * (np.linalg.norm(TFp @ Am @ TG, 2) + np.linalg.norm(TGp @ Am @ TF, 2))
            if lhs <= rhs + 1e-12:
                return {
                    "gamma": list(gamma),
                    "E": E,
                    "lhs": lhs,
                    "rhs": float(rhs),
                    "found": True,
                }
    return {"gamma": None, "E": None, "lhs": lhs, "rhs": None, "found": False}


# -- compactness diagnostics -----------------------------------------------------------


def compactness_report(
    space: GalerkinSpace,
    A: OperatorMatrix,
    boundary_grid: np.ndarray | None = None,
    R: float = 2.0,
    partners: int = 6,
    head_drop: int = 2,
    seed: int = 0,
    mass: float = 0.99,
) -> dict:
    """Berezin, off-diagonal and singular-value tails of a truncated operator.

    The boundary grid walks toward the boundary but stops at the depth where
    the truncated kernels still hold the requested mass.
    """
    dom = _ball_domain(space.n)
    limit = resolution_limit(space, mass)
    if boundary_grid is None:
        ks = np.arange(1, 40)
        depths = 2.0 ** (-ks * 0.5)
        boundary_grid = depths[depths >= limit]
    else:
        boundary_grid = np.asarray(boundary_grid, float)
        if np.any(boundary_grid < limit):
            raise OperatorError("grid exceeds the truncation resolution limit")
    if len(boundary_grid) == 0:
        raise OperatorError("empty boundary grid after the resolution clamp")
    depths = np.sort(boundary_grid)[::-1]

    rng = np.random.default_rng(seed)
    berezin_by_depth = []
    offdiag_by_depth = []
    est = DistanceEstimator(dom, CHEAP_BUDGET)
    for t in depths:
        z = np.zeros(space.n, complex)
        z[0] = np.sqrt(1 - t)
        b = abs(berezin(space, A, z))
        v = space.kernel_coeffs(z)
        v = v / np.linalg.norm(v)
        off = 0.0
        for _ in range(partners):
            w = _nearby_candidates(dom, z, rng, 1)[0]
            if dom.r_val(w) >= 0 or est(z, w) >= R:
                continue
            u = space.kernel_coeffs(w)
            u = u / np.linalg.norm(u)
            off = max(off, abs(np.vdot(v, A.matrix @ u)))
        berezin_by_depth.append(b)
        offdiag_by_depth.append(off)

    sv = np.linalg.svd(A.matrix, compute_uv=False)
    head = len(_multi_indices(space.n, max(space.N - head_drop, 0)))
    total_mass = float(np.sum(sv))
    sv_tail = float(np.sum(sv[head:]) / total_mass) if total_mass > 0 else 0.0

    return {
        "depths": depths.tolist(),
        "berezin": berezin_by_depth,
        "offdiag": offdiag_by_depth,
        "berezin_tail": float(berezin_by_depth[-1]),
        "offdiag_tail": float(offdiag_by_depth[-1]),
        "sv_tail": sv_tail,
        "resolution_limit": float(limit),
    }


def partition_toeplitz_h(space: GalerkinSpace, h, n0: int, tol: float = 1e-6) -> dict:
    """Assemble T_h for h = indicator of the deep set plus the squared cutoffs.

    The callable ``h`` must keep 1 <= h <= 3*n0 + 1 pointwise; the Hermitian
    compression then has spectrum inside [1 - tol, 3*n0 + 1 + tol] and a
    bounded inverse.
    """
    T = toeplitz_matrix(space, h, "T_h")
    M = 0.5 * (T.matrix + T.matrix.conj().T)
    evals, evecs = np.linalg.eigh(M)
    lo, hi = float(evals[0]), float(evals[-1])
    ok = lo >= 1.0 - tol and hi <= 3 * n0 + 1 + tol
    inv_norm = 1.0 / lo if lo > 0 else float("inf")
    out = {"T_h": T, "eig_min": lo, "eig_max": hi, "inv_norm": inv_norm, "ok": bool(ok)}
    if not ok:
        out["witness_vector"] = evecs[:, 0].tolist()
    return out


# -- persistence ------------------------------------------------------------------------


def save_operator(path: str, op: OperatorMatrix, n: int, N: int) -> None:
    """Row-major little-endian float64 (re, im) pairs plus a JSON sidecar."""
    mat = np.ascontiguousarray(op.matrix, dtype=complex)
    dim = mat.shape[0]
    with open(path, "wb") as fh:
        for row in mat:
            for val in row:
                fh.write(struct.pack("<dd", float(val.real), float(val.imag)))
    with open(path + ".json", "w") as fh:
        json.dump({"n": n, "N": N, "label": op.label, "dim": dim}, fh, sort_keys=True)


def load_operator(path: str) -> tuple[OperatorMatrix, dict]:
    with open(path + ".json") as fh:
        meta = json.load(fh)
    dim = int(meta["dim"])
    raw = np.fromfile(path, dtype="<f8")
    mat = raw[0::2] + 1j * raw[1::2]
    return OperatorMatrix(mat.reshape(dim, dim), meta.get("label", "")), meta
