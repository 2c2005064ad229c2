"""
fsk Tensor Core
===============
Permutators, trace projectors and the completely symmetric trace-free
projectors P^l acting on the l-fold tensor power of R^D.

Every operator is stored densely as a D^l x D^l real matrix whose rows and
columns are indexed by the mixed-radix rank of a multi-index (most
significant slot first, axis labels 1..D).
"""

import itertools
import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import ConfigError, TensorBudgetError

MultiIndex = Tuple[int, ...]

KINDS = ("identity", "permutator", "trace", "sym", "antisym", "traceFreeSym", "factorM")
DEFAULT_MAX_TENSOR_BYTES = 8 * 4096 * 4096
RANK_THRESHOLD = 1e-8


def max_tensor_bytes() -> int:
    """Memory budget for a single dense tensor, from FSK_MAX_TENSOR_BYTES."""
    raw = os.environ.get("FSK_MAX_TENSOR_BYTES")
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_TENSOR_BYTES
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"FSK_MAX_TENSOR_BYTES must be an integer, got {raw!r}") from e
    if value <= 0:
        raise ConfigError("FSK_MAX_TENSOR_BYTES must be positive")
    return value


def check_budget(side: int, what: str) -> None:
    """Raise TensorBudgetError if a side x side float64 matrix does not fit."""
    required = 8 * side * side
    budget = max_tensor_bytes()
    if required > budget:
        raise TensorBudgetError(required, budget, what)


def _check_dim(D: int) -> None:
    if not isinstance(D, (int, np.integer)) or D < 2:
        raise ConfigError(f"dimension must be an integer >= 2, got {D!r}")


def _check_order(l: int) -> None:
    if not isinstance(l, (int, np.integer)) or l < 0:
        raise ConfigError(f"order must be a non-negative integer, got {l!r}")


# ---------------------------------------------------------------------------
# Multi-index ranking
# ---------------------------------------------------------------------------

def rank_index(index: Sequence[int], D: int) -> int:
    """Rank of a multi-index with entries in 1..D (mixed radix, first slot most significant)."""
    r = 0
    for a in index:
        if not 1 <= a <= D:
            raise ConfigError(f"axis label {a} outside 1..{D}")
        r = r * D + (a - 1)
    return r


def unrank_index(rank: int, l: int, D: int) -> MultiIndex:
    """Inverse of rank_index for multi-indices of length l."""
    if not 0 <= rank < D ** l:
        raise ConfigError(f"rank {rank} outside [0, {D ** l})")
    out = []
    for _ in range(l):
        rank, a = divmod(rank, D)
        out.append(a + 1)
    return tuple(reversed(out))


def nondecreasing_indices(l: int, D: int) -> List[MultiIndex]:
    """All nondecreasing multi-indices of length l, in lexicographic order."""
    return list(itertools.combinations_with_replacement(range(1, D + 1), l))


# ---------------------------------------------------------------------------
# Tensor container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectorTensor:
    """A D^l x D^l operator on the l-fold tensor power of R^D."""

    dim: int
    order: int
    kind: str
    entries: np.ndarray

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown tensor kind {self.kind!r}")
        side = self.dim ** self.order
        arr = np.array(self.entries, dtype=float)
        if arr.shape != (side, side):
            raise ConfigError(f"entries must have shape {(side, side)}, got {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @property
    def size(self) -> int:
        return self.dim ** self.order

    def entry(self, row: Sequence[int], col: Sequence[int]) -> float:
        return float(self.entries[rank_index(row, self.dim), rank_index(col, self.dim)])

    def to_json(self) -> Dict:
        return {
            "dim": int(self.dim),
            "order": int(self.order),
            "kind": self.kind,
            "entries": [float(x) for x in self.entries.ravel()],
        }


def identity(D: int, l: int) -> ProjectorTensor:
    _check_dim(D)
    _check_order(l)
    return ProjectorTensor(D, l, "identity", np.eye(D ** l))


# ---------------------------------------------------------------------------
# Order-2 building blocks
# ---------------------------------------------------------------------------

def permutator(D: int) -> ProjectorTensor:
    """Swap of the two tensor factors: P[(h,i),(j,k)] = delta_hk delta_ij."""
    _check_dim(D)
    P = np.zeros((D * D, D * D))
    for h in range(D):
        for i in range(D):
            P[h * D + i, i * D + h] = 1.0
    return ProjectorTensor(D, 2, "permutator", P)


def trace_projector(D: int) -> ProjectorTensor:
    """Pt[(i,j),(k,l)] = delta_ij delta_kl / D."""
    _check_dim(D)
    v = np.eye(D).reshape(-1)
    return ProjectorTensor(D, 2, "trace", np.outer(v, v) / D)


def sym_antisym_projectors(D: int) -> Tuple[ProjectorTensor, ProjectorTensor]:
    """(1 + P)/2 and (1 - P)/2."""
    P = permutator(D).entries
    one = np.eye(D * D)
    return (
        ProjectorTensor(D, 2, "sym", 0.5 * (one + P)),
        ProjectorTensor(D, 2, "antisym", 0.5 * (one - P)),
    )


def factor_M(l: int, D: int) -> ProjectorTensor:
    """Recursion factor M(l+1) = [1 + l P - (2Dl/(D+2l-2)) Pt] / (l+1)."""
    _check_dim(D)
    if l < 1:
        raise ConfigError(f"factor_M needs l >= 1, got {l}")
    P = permutator(D).entries
    Pt = trace_projector(D).entries
    M = (np.eye(D * D) + l * P - (2.0 * D * l / (D + 2 * l - 2)) * Pt) / (l + 1)
    return ProjectorTensor(D, 2, "factorM", M)


def embed_at(op: ProjectorTensor, h: int, l: int) -> ProjectorTensor:
    """Place an order-n operator on slots h..h+n-1 of an order-l tensor."""
    n = op.order
    if not 1 <= h <= l + 1 - n:
        raise ConfigError(f"slot {h} out of range for an order-{n} operator in order {l}")
    D = op.dim
    check_budget(D ** l, f"embedding at order {l}")
    left = np.eye(D ** (h - 1))
    right = np.eye(D ** (l - h - n + 1))
    return ProjectorTensor(D, l, op.kind, np.kron(np.kron(left, op.entries), right))


# ---------------------------------------------------------------------------
# Completely symmetric trace-free projectors
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def build_projector(l: int, D: int) -> ProjectorTensor:
    """
    Build P^l through P^{l+1} = P^l_{1..l} M_{l(l+1)} P^l_{1..l}.

    Args:
        l: tensor order
        D: dimension of the ambient space

    Returns:
        Read-only ProjectorTensor of kind traceFreeSym
    """
    _check_dim(D)
    _check_order(l)
    check_budget(D ** l, f"P^{l} with D={D}")
    if l == 0:
        return ProjectorTensor(D, 0, "traceFreeSym", np.ones((1, 1)))
    if l == 1:
        return ProjectorTensor(D, 1, "traceFreeSym", np.eye(D))
    prev = build_projector(l - 1, D).entries
    A = np.kron(prev, np.eye(D))
    M = np.kron(np.eye(D ** (l - 2)), factor_M(l - 1, D).entries)
    P = A @ M @ A
    return ProjectorTensor(D, l, "traceFreeSym", 0.5 * (P + P.T))


@lru_cache(maxsize=None)
def build_projector_alt(l: int, D: int) -> ProjectorTensor:
    """Same projector through P^{l+1} = P^l_{2..l+1} M_{12} P^l_{2..l+1}."""
    _check_dim(D)
    _check_order(l)
    check_budget(D ** l, f"P^{l} with D={D}")
    if l <= 1:
        return build_projector(l, D)
    prev = build_projector_alt(l - 1, D).entries
    B = np.kron(np.eye(D), prev)
    M = np.kron(factor_M(l - 1, D).entries, np.eye(D ** (l - 2)))
    P = B @ M @ B
    return ProjectorTensor(D, l, "traceFreeSym", 0.5 * (P + P.T))


def projector_dimension(l: int, D: int) -> int:
    """dim V_D^l: number of independent harmonic polynomials of degree l in D variables."""
    _check_dim(D)
    _check_order(l)
    if l == 0:
        return 1
    if D == 2:
        return 2
    lower = math.comb(l + D - 3, D - 1) if l >= 2 else 0
    return math.comb(l + D - 1, D - 1) - lower


def numerical_rank(op: ProjectorTensor, threshold: float = RANK_THRESHOLD) -> int:
    eig = np.linalg.eigvalsh(0.5 * (op.entries + op.entries.T))
    return int(np.sum(eig > threshold))


def partial_trace_last(op: ProjectorTensor) -> np.ndarray:
    """Sum over the last row and column slot: order l -> order l-1 matrix."""
    D, l = op.dim, op.order
    if l < 1:
        raise ConfigError("partial trace needs order >= 1")
    n = D ** (l - 1)
    return np.einsum("aibi->ab", op.entries.reshape(n, D, n, D))


def partial_trace_ratio(l: int, D: int) -> float:
    """Scalar c with tr_last P^{l+1} = c P^l."""
    return (D + l - 2) * (D + 2 * l) / ((l + 1) * (D + 2 * l - 2))


# ---------------------------------------------------------------------------
# Projector suite
# ---------------------------------------------------------------------------

def _maxabs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def braid_residual(A: ProjectorTensor, order: int) -> float:
    """max over n of |A_{n,n+1} P_{n+1,n+2} P_{n,n+1} - P_{n+1,n+2} P_{n,n+1} A_{n+1,n+2}|."""
    P = permutator(A.dim)
    worst = 0.0
    for n in range(1, order - 1):
        Pa = embed_at(P, n, order).entries
        Pb = embed_at(P, n + 1, order).entries
        lhs = embed_at(A, n, order).entries @ Pb @ Pa
        rhs = Pb @ Pa @ embed_at(A, n + 1, order).entries
        worst = max(worst, _maxabs(lhs - rhs))
    return worst


def projector_checks(l: int, D: int) -> Dict[str, float]:
    """
    Residuals of every structural identity of P^l.

    Returns:
        Mapping from check name to max-norm residual; "rank_mismatch" is the
        absolute difference between numerical rank and projector_dimension.
    """
    P = build_projector(l, D)
    E = P.entries
    out = {
        "idempotency": _maxabs(E @ E - E),
        "symmetry": _maxabs(E - E.T),
        "ansatz_agreement": _maxabs(E - build_projector_alt(l, D).entries),
        "trace_equals_dimension": abs(float(np.trace(E)) - projector_dimension(l, D)),
        "rank_mismatch": float(abs(numerical_rank(P) - projector_dimension(l, D))),
    }
    trace_free = 0.0
    antisym = 0.0
    swap_invariance = 0.0
    if l >= 2:
        _, Pm = sym_antisym_projectors(D)
        Pt = trace_projector(D)
        Pswap = permutator(D)
        for n in range(1, l):
            T = embed_at(Pt, n, l).entries
            A = embed_at(Pm, n, l).entries
            S = embed_at(Pswap, n, l).entries
            trace_free = max(trace_free, _maxabs(E @ T), _maxabs(T @ E))
            antisym = max(antisym, _maxabs(E @ A), _maxabs(A @ E))
            swap_invariance = max(swap_invariance, _maxabs(E @ S - E), _maxabs(S @ E - E))
    out["trace_free"] = trace_free
    out["antisym_annihilation"] = antisym
    out["swap_invariance"] = swap_invariance
    if l >= 2:
        ratio = partial_trace_ratio(l - 1, D)
        out["partial_trace"] = _maxabs(partial_trace_last(P) - ratio * build_projector(l - 1, D).entries)
    return out


def braid_checks(D: int) -> Dict[str, float]:
    """Braid identities at orders 3 and 4 for P+, P-, P^2 and Pt."""
    sym, anti = sym_antisym_projectors(D)
    ops = {"sym": sym, "antisym": anti, "traceFreeSym": build_projector(2, D), "trace": trace_projector(D)}
    out = {}
    for name, op in ops.items():
        out[f"braid3_{name}"] = braid_residual(op, 3)
        out[f"braid4_{name}"] = braid_residual(op, 4)
    return out
