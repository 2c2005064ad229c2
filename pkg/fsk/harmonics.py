"""
fsk Harmonic Basis
==================
The spaces V_D^l of degree-l spherical harmonics, realized through the
complete sets T_l^I = P^l{}^I_J t^J.

A function in V_D^l is carried as its function tensor tau (an element of the
image of P^l, so that f(t) = tau . t^{(x)l}); a coefficient vector c with
respect to the complete set gives tau = P^l c.  Orthonormal frames are chosen
once per (l, D) by a pivoted Cholesky factorization of the Gram matrix.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, special
from scipy.stats import qmc

from .errors import ConfigError, InconsistencyError
from .tensors import (
    MultiIndex,
    build_projector,
    check_budget,
    nondecreasing_indices,
    projector_dimension,
    rank_index,
    unrank_index,
)

UNIT_TOL = 1e-12
PIVOT_TIE = 1e-9
PIVOT_STOP = 1e-10


# ---------------------------------------------------------------------------
# Sphere integrals
# ---------------------------------------------------------------------------

def sphere_area(D: int) -> float:
    """|S^{D-1}| = 2 pi^{D/2} / Gamma(D/2)."""
    return 2.0 * math.pi ** (D / 2.0) / special.gamma(D / 2.0)


def _odd_double_factorial(n: int) -> int:
    """(n-1)!! for even n >= 0."""
    return math.prod(range(n - 1, 0, -2))


def sphere_monomial_integral(index: Sequence[int], D: int) -> float:
    """Integral of t^{i_1}...t^{i_m} over the unit sphere in R^D."""
    m = len(index)
    if m % 2:
        return 0.0
    counts = [0] * D
    for a in index:
        counts[a - 1] += 1
    if any(c % 2 for c in counts):
        return 0.0
    num = math.prod(_odd_double_factorial(c) for c in counts)
    den = math.prod(D + 2 * j for j in range(m // 2))
    return sphere_area(D) * num / den


def gram_constant(l: int, D: int) -> float:
    """h_l with <T_l^I, T_l^J> = h_l P^l[I, J]."""
    return sphere_area(D) * math.factorial(l) / math.prod(D + 2 * j for j in range(l))


def _axis_counts(l: int, D: int) -> np.ndarray:
    n = D ** l
    counts = np.zeros((n, D), dtype=int)
    for r in range(n):
        for a in unrank_index(r, l, D):
            counts[r, a - 1] += 1
    return counts


def moment_matrix(l: int, D: int) -> np.ndarray:
    """M[I, J] = integral of t^I t^J over S^{D-1}, for all multi-indices of length l."""
    n = D ** l
    check_budget(n, f"moment matrix l={l}, D={D}")
    counts = _axis_counts(l, D)
    table = np.array([_odd_double_factorial(c) if c % 2 == 0 else 0 for c in range(2 * l + 1)], dtype=float)
    den = math.prod(D + 2 * j for j in range(l))
    scale = sphere_area(D) / den
    M = np.empty((n, n))
    for r in range(n):
        tot = counts[r] + counts
        M[r] = scale * np.prod(table[tot], axis=1)
    return M


def gram_T(l: int, D: int) -> Tuple[np.ndarray, float, float]:
    """
    Gram matrix <T_l^I, T_l^J> over all multi-indices of length l.

    Returns:
        (gram, h_l fitted by least squares against P^l, relative fit residual)
    """
    P = build_projector(l, D).entries
    gram = P @ moment_matrix(l, D) @ P
    gram = 0.5 * (gram + gram.T)
    h = float(np.sum(gram * P) / np.sum(P * P))
    norm = float(np.linalg.norm(gram))
    residual = float(np.linalg.norm(gram - h * P)) / norm if norm else 0.0
    return gram, h, residual


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def _pivoted_selection(G: np.ndarray) -> List[int]:
    """Pivoted Cholesky pivots: largest residual diagonal, ties to the lowest position."""
    n = G.shape[0]
    d = np.diag(G).astype(float).copy()
    scale = float(np.max(d)) if n else 0.0
    if scale <= 0:
        return []
    L = np.zeros((n, 0))
    chosen: List[int] = []
    while len(chosen) < n:
        avail = np.array([i for i in range(n) if i not in chosen])
        best = float(np.max(d[avail]))
        if best < PIVOT_STOP * scale:
            break
        ties = avail[d[avail] >= best * (1.0 - PIVOT_TIE)]
        j = int(ties[0])
        col = (G[:, j] - L @ L[j, :]) / math.sqrt(d[j])
        L = np.column_stack([L, col])
        d = d - col ** 2
        d[j] = 0.0
        chosen.append(j)
    return chosen


@dataclass(frozen=True)
class LevelFrame:
    """Selected indices, Gram matrix and orthonormal frame of V_D^l."""

    D: int
    l: int
    indices: Tuple[MultiIndex, ...]
    ranks: Tuple[int, ...]
    gram: np.ndarray
    frame: np.ndarray
    h: float
    h_fit_residual: float
    tensors: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.indices)

    def coords(self, tau: np.ndarray) -> np.ndarray:
        """Orthonormal coordinates of a function tensor of degree l."""
        return self.h * (self.tensors.T @ tau)

    def tensor(self, a: np.ndarray) -> np.ndarray:
        """Function tensor of the vector with orthonormal coordinates a."""
        return self.tensors @ a

    def to_json(self) -> Dict:
        return {
            "l": int(self.l),
            "indices": [list(I) for I in self.indices],
            "gram": [[float(x) for x in row] for row in self.gram],
            "h_l": float(self.h),
        }


def select_basis(l: int, D: int) -> LevelFrame:
    return level_frame(l, D)


@lru_cache(maxsize=None)
def level_frame(l: int, D: int) -> LevelFrame:
    """
    Choose independent T_l^I and orthonormalize them.

    The selection runs a pivoted Cholesky over the nondecreasing multi-indices;
    the selected indices are then sorted lexicographically and the frame is
    L^{-T} for the Cholesky factor of their Gram matrix.
    """
    full, h, fit = gram_T(l, D)
    candidates = nondecreasing_indices(l, D)
    cranks = [rank_index(I, D) for I in candidates]
    G = full[np.ix_(cranks, cranks)]
    picked = sorted(_pivoted_selection(G))
    expected = projector_dimension(l, D)
    if len(picked) != expected:
        raise InconsistencyError(
            f"basis selection for l={l}, D={D} found {len(picked)} independent functions, expected {expected}"
        )
    indices = tuple(candidates[i] for i in picked)
    ranks = tuple(cranks[i] for i in picked)
    gram = G[np.ix_(picked, picked)]
    chol = linalg.cholesky(gram, lower=True)
    frame = linalg.solve_triangular(chol, np.eye(len(picked)), lower=True).T
    P = build_projector(l, D).entries
    tensors = P[:, list(ranks)] @ frame
    for arr in (gram, frame, tensors):
        arr.flags.writeable = False
    return LevelFrame(D, l, indices, ranks, gram, frame, h, fit, tensors)


@dataclass(frozen=True)
class BasisCatalog:
    D: int
    lmax: int
    levels: Tuple[LevelFrame, ...]

    def __getitem__(self, l: int) -> LevelFrame:
        return self.levels[l]

    @property
    def dims(self) -> List[int]:
        return [lv.dim for lv in self.levels]

    @property
    def offsets(self) -> List[int]:
        out, acc = [], 0
        for lv in self.levels:
            out.append(acc)
            acc += lv.dim
        return out

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def block(self, l: int) -> slice:
        start = self.offsets[l]
        return slice(start, start + self.levels[l].dim)

    def to_json(self) -> List[Dict]:
        return [lv.to_json() for lv in self.levels]


def build_catalog(D: int, lmax: int) -> BasisCatalog:
    if lmax < 0:
        raise ConfigError(f"lmax must be >= 0, got {lmax}")
    return BasisCatalog(D, lmax, tuple(level_frame(l, D) for l in range(lmax + 1)))


# ---------------------------------------------------------------------------
# Harmonic vectors
# ---------------------------------------------------------------------------

@dataclass
class HarmonicVector:
    """Coefficients of a degree-l function with respect to the complete set T_l."""

    l: int
    coeffs: Dict[MultiIndex, complex]

    def __post_init__(self):
        for I in self.coeffs:
            if len(I) != self.l:
                raise ConfigError(f"multi-index {I} has length {len(I)}, expected {self.l}")

    def tensor(self, D: int) -> np.ndarray:
        P = build_projector(self.l, D).entries
        tau = np.zeros(D ** self.l, dtype=complex)
        for I, c in self.coeffs.items():
            tau += c * P[:, rank_index(I, D)]
        return tau

    def frame_coords(self, D: int) -> np.ndarray:
        return level_frame(self.l, D).coords(self.tensor(D))

    def inner(self, other: "HarmonicVector", D: int) -> complex:
        if other.l != self.l:
            return 0.0
        return gram_constant(self.l, D) * complex(np.vdot(self.tensor(D), other.tensor(D)))

    def equals(self, other: "HarmonicVector", D: int, tol: float = 1e-10) -> bool:
        """Equality of the induced functions, measured with the Gram metric."""
        if other.l != self.l:
            return False
        diff = self.tensor(D) - other.tensor(D)
        return gram_constant(self.l, D) * float(np.real(np.vdot(diff, diff))) <= tol ** 2


# ---------------------------------------------------------------------------
# Evaluation on the sphere
# ---------------------------------------------------------------------------

def tensor_powers(points: np.ndarray, l: int) -> np.ndarray:
    """Rows t^{(x)l} for each point, first slot most significant."""
    pts = np.atleast_2d(np.asarray(points))
    out = np.ones((pts.shape[0], 1), dtype=pts.dtype)
    for _ in range(l):
        out = (out[:, :, None] * pts[:, None, :]).reshape(pts.shape[0], -1)
    return out


def eval_T(l: int, index: Sequence[int], t: Sequence[float]) -> float:
    """Value of T_l^I at a unit vector t."""
    t = np.asarray(t, dtype=float)
    if abs(float(t @ t) - 1.0) > UNIT_TOL:
        raise ConfigError(f"point is not on the unit sphere: |t|^2 = {float(t @ t)!r}")
    D = t.shape[0]
    P = build_projector(l, D).entries
    return float(P[rank_index(index, D)] @ tensor_powers(t, l)[0])


def sphere_points(count: int, D: int, seed: int = 0) -> np.ndarray:
    """Quasi-random points on S^{D-1}: scrambled Sobol mapped through the normal quantile."""
    sampler = qmc.Sobol(d=D, scramble=True, seed=seed)
    m = max(1, math.ceil(math.log2(max(count, 2))))
    u = sampler.random_base2(m)[:count]
    u = np.clip(u, 1e-12, 1.0 - 1e-12)
    z = special.ndtri(u)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Actions of iL_hk and t^h
# ---------------------------------------------------------------------------

def _rotation_generator(h: int, k: int, D: int) -> np.ndarray:
    """g with iL_hk acting on a degree-1 function tensor as sigma -> g sigma."""
    g = np.zeros((D, D))
    g[h - 1, k - 1] = 1.0
    g[k - 1, h - 1] = -1.0
    return g


def _check_pair(h: int, k: int, D: int) -> None:
    if not (1 <= h <= D and 1 <= k <= D and h != k):
        raise ConfigError(f"invalid axis pair ({h}, {k}) for D={D}")


def L_on_T_coordinates(h: int, k: int, l: int, D: int, form: str = "contracted") -> np.ndarray:
    """
    iL_hk as a map of coefficient vectors over the complete set T_l.

    Args:
        form: "contracted" uses l P^l (delta T - delta T); "lifted" uses the
            P^{l+1} expression with prefactor (l+1)(D+2l-2)/(D+2l)

    Returns:
        D^l x D^l matrix C with c -> C c
    """
    _check_pair(h, k, D)
    if l == 0:
        return np.zeros((1, 1))
    if form == "contracted":
        g = _rotation_generator(h, k, D)
        return l * np.kron(g, np.eye(D ** (l - 1))) @ build_projector(l, D).entries
    if form == "lifted":
        P1 = build_projector(l + 1, D).entries
        Eh = np.kron(np.eye(D)[:, [h - 1]], np.eye(D ** l))
        Ek = np.kron(np.eye(D)[:, [k - 1]], np.eye(D ** l))
        pref = (l + 1) * (D + 2 * l - 2) / (D + 2 * l)
        return pref * (Ek.T @ P1 @ Eh - Eh.T @ P1 @ Ek)
    raise ConfigError(f"unknown form {form!r}")


def L_action_on_T(h: int, k: int, l: int, D: int, form: str = "contracted") -> np.ndarray:
    """Real antisymmetric matrix of iL_hk on V_D^l in the orthonormal frame."""
    lv = level_frame(l, D)
    if l == 0:
        return np.zeros((1, 1))
    embed = np.zeros((D ** l, lv.dim))
    embed[list(lv.ranks), :] = lv.frame
    C = L_on_T_coordinates(h, k, l, D, form)
    return lv.h * lv.tensors.T @ C @ embed


def casimir_on_level(l: int, D: int) -> np.ndarray:
    """L^2 = sum_{h<k} L_hk^2 = -sum_{h<k} (iL_hk)^2 on V_D^l."""
    lv = level_frame(l, D)
    acc = np.zeros((lv.dim, lv.dim))
    for h in range(1, D + 1):
        for k in range(h + 1, D + 1):
            A = L_action_on_T(h, k, l, D)
            acc -= A @ A
    return acc


def weight_vector(h: int, k: int, l: int, D: int, sign: int = 1) -> np.ndarray:
    """Orthonormal coordinates of (t^h + sign i t^k)^l."""
    v = np.zeros(D, dtype=complex)
    v[h - 1] = 1.0
    v[k - 1] = sign * 1j
    tau = np.ones(1, dtype=complex)
    for _ in range(l):
        tau = np.kron(tau, v)
    return level_frame(l, D).coords(tau)


def t_multiplication(h: int, l: int, D: int, up: bool = True) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
    """
    Orthonormal-frame blocks of t^h: V_D^l -> V_D^{l+1} and V_D^l -> V_D^{l-1}.

    Args:
        up: with False the raising block (and the level-(l+1) frame) is skipped

    Returns:
        (up, down); down is None for l = 0, up is None when not requested
    """
    if not 1 <= h <= D:
        raise ConfigError(f"axis {h} outside 1..{D}")
    src = level_frame(l, D)
    raised = None
    if up:
        Eh = np.kron(np.eye(D)[:, [h - 1]], np.eye(D ** l))
        hi = level_frame(l + 1, D)
        raised = hi.h * hi.tensors.T @ (Eh @ src.tensors)
    down = None
    if l >= 1:
        lo = level_frame(l - 1, D)
        Ehl = np.kron(np.eye(D)[:, [h - 1]], np.eye(D ** (l - 1)))
        down = lo.h * lo.tensors.T @ (down_coefficient(l, D) * (Ehl.T @ src.tensors))
    return raised, down


def down_coefficient(l: int, D: int) -> float:
    """d_l = l / (D + 2l - 2)."""
    return l / (D + 2 * l - 2)


def t_multiplication_residual(h: int, l: int, D: int, points: np.ndarray) -> float:
    """Max pointwise error of t^h f = up(f) + down(f) over frame vectors f."""
    up, down = t_multiplication(h, l, D)
    src = level_frame(l, D)
    lhs = points[:, [h - 1]] * (tensor_powers(points, l) @ src.tensors)
    rhs = tensor_powers(points, l + 1) @ level_frame(l + 1, D).tensors @ up
    if down is not None:
        rhs = rhs + tensor_powers(points, l - 1) @ level_frame(l - 1, D).tensors @ down
    return float(np.max(np.abs(lhs - rhs)))
