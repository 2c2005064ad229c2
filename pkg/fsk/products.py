"""
fsk Harmonic Products
=====================
Decomposition of products T_l T_m into harmonic components, fuzzy spherical
harmonics That_l built from the xbar^i, the fuzzy function space C_Lambda
and the strong-limit diagnostics as Lambda grows.

Functions are carried as coefficient vectors over the complete sets T_l, one
vector of length D^l per degree; a function tensor is a valid coefficient
vector of itself.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .algebra import FuzzyAlgebra, default_k
from .errors import ConfigError, TensorBudgetError
from .harmonics import gram_constant, level_frame, tensor_powers, L_on_T_coordinates
from .tensors import build_projector, max_tensor_bytes, projector_dimension, rank_index

Coeffs = Dict[int, np.ndarray]


# ---------------------------------------------------------------------------
# Classical products
# ---------------------------------------------------------------------------

def product_degrees(l: int, m: int) -> List[int]:
    """{|l-m|, |l-m|+2, ..., l+m}."""
    return list(range(abs(l - m), l + m + 1, 2))


def product_coefficient(l: int, m: int, n: int, D: int) -> float:
    """N^{lm}_n = (D+2n-2)!! l! m! / [(D+2n+2s-2)!! (l-s)! (m-s)! s!], s = (l+m-n)/2."""
    if n not in product_degrees(l, m):
        return 0.0
    s = (l + m - n) // 2
    ratio = 1.0 / math.prod(D + 2 * n + 2 * j - 2 for j in range(1, s + 1))
    return ratio * math.factorial(l) * math.factorial(m) / (
        math.factorial(l - s) * math.factorial(m - s) * math.factorial(s))


@dataclass(frozen=True)
class ProductCoefficients:
    """T_l^I T_m^J = sum_n N_n V_n[I, J, :] . t^{(x)n}."""

    D: int
    l: int
    m: int
    coefficients: Dict[int, float]
    contractions: Dict[int, np.ndarray] = field(repr=False)

    def component(self, n: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Function tensor of the degree-n part of (a . T_l)(b . T_m)."""
        if n not in self.coefficients:
            return np.zeros(self.D ** n, dtype=np.result_type(a, b, float))
        V = self.contractions[n]
        return self.coefficients[n] * np.einsum("i,j,ijk->k", a, b, V)

    def to_json(self) -> Dict:
        return {"D": self.D, "l": self.l, "m": self.m,
                "coefficients": {str(n): c for n, c in sorted(self.coefficients.items())}}


@lru_cache(maxsize=None)
def product_decomposition(l: int, m: int, D: int) -> ProductCoefficients:
    coeffs, contractions = {}, {}
    Pl = build_projector(l, D).entries
    Pm = build_projector(m, D).entries
    for n in product_degrees(l, m):
        s = (l + m - n) // 2
        need = 8 * D ** (l + m + n)
        if need > max_tensor_bytes():
            raise TensorBudgetError(need, max_tensor_bytes(), f"product tensor l={l}, m={m}, n={n}")
        A = Pl.reshape(D ** l, D ** s, D ** (l - s))
        B = Pm.reshape(D ** m, D ** s, D ** (m - s))
        W = np.einsum("iac,jad->ijcd", A, B).reshape(D ** l, D ** m, D ** n)
        V = W @ build_projector(n, D).entries
        V.flags.writeable = False
        coeffs[n] = product_coefficient(l, m, n, D)
        contractions[n] = V
    return ProductCoefficients(D, l, m, coeffs, contractions)


def product_residual(l: int, m: int, D: int, points: np.ndarray) -> float:
    """Max pointwise error of the decomposition over all index pairs and points."""
    pc = product_decomposition(l, m, D)
    Tl = tensor_powers(points, l) @ build_projector(l, D).entries
    Tm = tensor_powers(points, m) @ build_projector(m, D).entries
    lhs = np.einsum("pi,pj->pij", Tl, Tm)
    rhs = np.zeros_like(lhs)
    for n, c in pc.coefficients.items():
        rhs += c * np.einsum("ijk,pk->pij", pc.contractions[n], tensor_powers(points, n))
    return float(np.max(np.abs(lhs - rhs)))


def multiply(f: Coeffs, g: Coeffs, D: int) -> Coeffs:
    """Exact product of two finite expansions, as function tensors per degree."""
    out: Coeffs = {}
    for l, a in f.items():
        for m, b in g.items():
            pc = product_decomposition(l, m, D)
            for n in pc.coefficients:
                part = pc.component(n, np.asarray(a), np.asarray(b))
                out[n] = out.get(n, 0) + part
    return out


def l2_norm(f: Coeffs, D: int) -> float:
    """L^2(S^{D-1}) norm of a finite expansion."""
    total = 0.0
    for l, c in f.items():
        tau = build_projector(l, D).entries @ np.asarray(c)
        total += gram_constant(l, D) * float(np.real(np.vdot(tau, tau)))
    return math.sqrt(total)


def coeffs_from_indices(terms: Mapping[int, Mapping[Tuple[int, ...], complex]], D: int) -> Coeffs:
    out: Coeffs = {}
    for l, entries in terms.items():
        v = np.zeros(D ** l, dtype=complex)
        for I, c in entries.items():
            v[rank_index(I, D)] += c
        out[l] = v
    return out


def sample_function(name: str, D: int) -> Coeffs:
    """Named low-degree functions on the sphere: one, t1, t1^2 and t1t2."""
    if name == "one":
        return coeffs_from_indices({0: {(): 1.0}}, D)
    if name == "t1":
        return coeffs_from_indices({1: {(1,): 1.0}}, D)
    if name == "t1^2":
        return coeffs_from_indices({2: {(1, 1): 1.0}, 0: {(): 1.0 / D}}, D)
    if name == "t1t2":
        return coeffs_from_indices({2: {(1, 2): 1.0}}, D)
    raise ConfigError(f"unknown sample function {name!r} (choose one, t1, t1^2, t1t2)")


SAMPLE_FUNCTIONS = ("t1", "t1^2", "t1t2")


# ---------------------------------------------------------------------------
# Fuzzy harmonics
# ---------------------------------------------------------------------------

def _monomials(alg: FuzzyAlgebra, l: int) -> np.ndarray:
    """W[J] = xbar^{j1} ... xbar^{jl} for all multi-indices J, shape (D^l, N, N)."""
    D, N = alg.D, alg.N
    need = 8 * D ** l * N * N
    if need > max_tensor_bytes():
        raise TensorBudgetError(need, max_tensor_bytes(), f"fuzzy monomials of degree {l}")
    X = np.stack([alg.x(i) for i in range(1, D + 1)])
    W = np.eye(N)[None, :, :]
    for _ in range(l):
        W = np.einsum("iab,jbc->ijac", X, W).reshape(-1, N, N)
    return W


def fuzzy_harmonics(alg: FuzzyAlgebra, l: int) -> np.ndarray:
    """That_l^I for every multi-index I, shape (D^l, N, N)."""
    W = _monomials(alg, l)
    P = build_projector(l, alg.D).entries
    return np.tensordot(P, W, axes=(1, 0))


def fuzzy_harmonic(alg: FuzzyAlgebra, l: int, index: Sequence[int]) -> np.ndarray:
    return fuzzy_harmonics(alg, l)[rank_index(index, alg.D)] if l else np.eye(alg.N)


def embed_level(alg: FuzzyAlgebra, l: int, coords: np.ndarray) -> np.ndarray:
    v = np.zeros(alg.N, dtype=np.result_type(coords, float))
    v[alg.catalog.block(l)] = coords
    return v


def state_vector(alg: FuzzyAlgebra, psi: Coeffs) -> np.ndarray:
    """Vector of H_Lambda for an expansion supported on l <= Lambda."""
    v = np.zeros(alg.N, dtype=complex)
    for l, c in psi.items():
        if l > alg.cutoff:
            raise ConfigError(f"state has a degree {l} component above the cutoff {alg.cutoff}")
        lv = level_frame(l, alg.D)
        v += embed_level(alg, l, lv.coords(build_projector(l, alg.D).entries @ np.asarray(c)))
    return v


def truncated_state(alg: FuzzyAlgebra, f: Coeffs) -> np.ndarray:
    """P^Lambda f as a vector of H_Lambda."""
    return state_vector(alg, {l: c for l, c in f.items() if l <= alg.cutoff})


def fuzzy_harmonic_factor(alg: FuzzyAlgebra, l: int) -> float:
    """Measured constant a_l with That_l^I psi_0 = a_l psi_l^I."""
    if l > alg.cutoff:
        return 0.0
    T = fuzzy_harmonics(alg, l)
    lv = level_frame(l, alg.D)
    num = den = 0.0
    for I in lv.indices:
        r = rank_index(I, alg.D)
        actual = T[r][:, 0]
        target = embed_level(alg, l, lv.coords(build_projector(l, alg.D).entries[:, r]))
        num += float(np.real(np.vdot(target, actual)))
        den += float(np.real(np.vdot(target, target)))
    return num / den


def equivariance_residual(alg: FuzzyAlgebra, l: int) -> float:
    """max |[iLbar_hk, That^I] - sum_J C[J, I] That^J|."""
    T = fuzzy_harmonics(alg, l)
    worst = 0.0
    for (h, k), A in alg.iLbar.items():
        C = L_on_T_coordinates(h, k, l, alg.D)
        lhs = np.einsum("ab,ibc->iac", A, T) - np.einsum("iab,bc->iac", T, A)
        rhs = np.tensordot(C.T, T, axes=(1, 0))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0)
    return worst


def fuzzy_function_space_rank(alg: FuzzyAlgebra) -> int:
    """Dimension of the span of all That_l^I with l <= 2 Lambda."""
    rows = []
    for l in range(2 * alg.cutoff + 1):
        rows.append(fuzzy_harmonics(alg, l).reshape(-1, alg.N * alg.N))
    return int(np.linalg.matrix_rank(np.vstack(rows), tol=1e-8))


def fuzzy_function_space_dimension(cutoff: int, D: int) -> int:
    return sum(projector_dimension(l, D) for l in range(2 * cutoff + 1))


def fuzzy_product_coeffs(alg: FuzzyAlgebra, l: int, m: int) -> Dict[int, Dict[str, float]]:
    """
    Fit That_l^I psi_m^J restricted to H^n against the classical contraction.

    Returns:
        n -> {"coefficient", "residual", "norm"}; residual is relative to the
        projected norm and norm is the size of the H^n projection
    """
    if m > alg.cutoff:
        raise ConfigError(f"m={m} exceeds the cutoff {alg.cutoff}")
    D = alg.D
    T = fuzzy_harmonics(alg, l) if l else np.eye(alg.N)[None]
    Pm = build_projector(m, D).entries
    lv_m = level_frame(m, D)
    src_l = level_frame(l, D)
    pc = product_decomposition(l, m, D)
    out = {}
    for n in range(alg.cutoff + 1):
        lv_n = level_frame(n, D)
        block = alg.catalog.block(n)
        actual, target = [], []
        for I in src_l.indices:
            rI = rank_index(I, D)
            for J in lv_m.indices:
                rJ = rank_index(J, D)
                psi = embed_level(alg, m, lv_m.coords(Pm[:, rJ]))
                actual.append((T[rI] @ psi)[block])
                if n in pc.contractions:
                    target.append(lv_n.coords(pc.contractions[n][rI, rJ]))
                else:
                    target.append(np.zeros(lv_n.dim))
        a = np.concatenate(actual)
        t = np.concatenate(target)
        norm = float(np.linalg.norm(a))
        tt = float(np.dot(t, t))
        coef = float(np.dot(t, a) / tt) if tt > 0 else 0.0
        resid = float(np.linalg.norm(a - coef * t)) / max(norm, 1e-300) if norm > 0 else 0.0
        out[n] = {"coefficient": coef, "residual": resid, "norm": norm}
    return out


# ---------------------------------------------------------------------------
# Fuzzy functions and convergence
# ---------------------------------------------------------------------------

@dataclass
class FuzzyFunction:
    """fhat_{2Lambda} = sum_{l <= 2Lambda} f^l_I That_l^I."""

    cutoff: int
    coeffs: Coeffs
    matrix: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def truncate_function(f: Coeffs, alg: FuzzyAlgebra) -> FuzzyFunction:
    kept = {l: np.asarray(c) for l, c in f.items() if l <= 2 * alg.cutoff}
    M = np.zeros((alg.N, alg.N), dtype=complex)
    for l, c in kept.items():
        if l == 0:
            M += complex(np.asarray(c).reshape(-1)[0]) * np.eye(alg.N)
        else:
            M += np.tensordot(c, fuzzy_harmonics(alg, l), axes=(0, 0))
    return FuzzyFunction(alg.cutoff, kept, M)


def operator_norm_witness(alg: FuzzyAlgebra, f: Optional[Coeffs] = None) -> Tuple[float, float]:
    """
    (|fhat psi|, |f psi|) for psi = T_{Lambda+1}^{(1,...,1)}.

    psi lies in the complement of H_Lambda, which every fuzzy function
    annihilates, while the multiplication operator does not.
    """
    D, lam = alg.D, alg.cutoff
    f = f if f is not None else sample_function("t1", D)
    psi = coeffs_from_indices({lam + 1: {tuple([1] * (lam + 1)): 1.0}}, D)
    fuzzy_norm = float(np.linalg.norm(truncate_function(f, alg).apply(truncated_state(alg, psi))))
    exact = multiply(f, psi, D)
    return fuzzy_norm, l2_norm(exact, D)


@dataclass
class ConvergenceRow:
    cutoff: int
    test_id: str
    norm_residual: float


def convergence_report(
    f_name: str,
    D: int,
    cutoffs: Iterable[int],
    psi: Optional[Coeffs] = None,
    g_name: Optional[str] = None,
) -> List[ConvergenceRow]:
    """
    Strong-limit residuals |fhat psi - P^Lambda (f psi)| for each cutoff.

    With g_name, also |fhat ghat psi - (fg)hat psi|.
    """
    psi = psi if psi is not None else sample_function("t1", D)
    f = sample_function(f_name, D)
    fpsi = multiply(f, psi, D)
    rows = []
    for lam in cutoffs:
        alg = FuzzyAlgebra.build(D, lam, default_k(max(lam, 1), D))
        v = state_vector(alg, psi)
        fh = truncate_function(f, alg)
        res = float(np.linalg.norm(fh.apply(v) - truncated_state(alg, fpsi)))
        rows.append(ConvergenceRow(lam, f_name, res))
        if g_name:
            g = sample_function(g_name, D)
            gh = truncate_function(g, alg)
            fgh = truncate_function(multiply(f, g, D), alg)
            res2 = float(np.linalg.norm(fh.apply(gh.apply(v)) - fgh.apply(v)))
            rows.append(ConvergenceRow(lam, f"{f_name}*{g_name}", res2))
    return rows


def rows_to_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["Lambda", "test_id", "norm_residual"])
    for r in rows:
        w.writerow([r.cutoff, r.test_id, repr(r.norm_residual)])
    return buf.getvalue()
