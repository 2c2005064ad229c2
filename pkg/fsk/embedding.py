"""
fsk Embedding Isomorphism
=========================
The so(D+1) irrep V^Lambda on harmonic polynomials of degree Lambda in
D+1 variables, its decomposition into so(D) blocks spanned by the
F^I = p_{Lambda,l}(t^{D+1}) X_l^I(t_par), and the maps kappa / varkappa
identifying it with (H_Lambda, A_Lambda).

F-blocks share the orthonormal frames of the T_l blocks, so every matrix
here lives on the same N-dimensional coordinate space as FuzzyAlgebra.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy import linalg, special

from .algebra import FuzzyAlgebra, c_coeff, casimir_eigenvalue
from .errors import ConfigError, InconsistencyError
from .harmonics import BasisCatalog, L_action_on_T, build_catalog, eval_T, level_frame, sphere_points, t_multiplication, tensor_powers
from .report import CheckReport, relative_residual
from .tensors import build_projector, projector_dimension, rank_index


def p_polynomial(cutoff: int, l: int, D: int) -> np.ndarray:
    """
    Coefficients of p_{Lambda,l} in powers of t^{D+1}, lowest power first.

    The leading coefficient (power Lambda - l) is 1; the power Lambda-l-2k
    carries b_{Lambda,l+2k}.
    """
    if not 0 <= l <= cutoff:
        raise ConfigError(f"need 0 <= l <= Lambda, got l={l}, Lambda={cutoff}")
    bold = D + 1
    h = cutoff - l
    coeffs = np.zeros(h + 1)
    coeffs[h] = 1.0
    for k in range(1, h // 2 + 1):
        # (2L-4-2k+bold)!!/(2L-4+bold)!! as a product of k factors
        ratio = 1.0 / math.prod(2 * cutoff - 4 + bold - 2 * j for j in range(k))
        b = (-1) ** k * math.factorial(h) * ratio / (
            math.factorial(h - 2 * k) * math.prod(range(2, 2 * k + 1, 2)))
        coeffs[h - 2 * k] = b
    return coeffs


def a_coefficients(cutoff: int, D: int) -> List[complex]:
    """a_{Lambda,l} with a_{Lambda,0} = 1."""
    out = []
    for l in range(cutoff + 1):
        num = math.prod(cutoff - j for j in range(l))
        den = math.prod(cutoff + D - 1 + j for j in range(l))
        out.append((1j ** l) * math.sqrt(num / den))
    return out


@dataclass(frozen=True)
class SpectralFactor:
    values: Tuple[float, ...]

    def __getitem__(self, l: int) -> float:
        return self.values[l]


def spectral_factor(cutoff: int, k: float, D: int) -> SpectralFactor:
    """m_Lambda(l), l = 0..Lambda, from the Gamma-ratio formula with d = D - 1."""
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    d = D - 1
    A = math.sqrt(k + (D - 1) * (D - 3) * 3 / 4)
    vals = []
    for s in range(cutoff + 1):
        log_m2 = (
            special.gammaln((cutoff + s + d) / 2)
            + special.gammaln((cutoff - s + 1) / 2)
            + 2 * special.loggamma(complex(s + 1 + d / 2, A) / 2).real
            - special.gammaln((cutoff + s + D) / 2)
            - special.gammaln((cutoff - s) / 2 + 1)
            - 2 * special.loggamma(complex(s + d / 2, A) / 2).real
            - 0.5 * math.log(k)
        )
        m = math.exp(0.5 * log_m2)
        if not math.isfinite(m) or m <= 0:
            raise InconsistencyError(f"spectral factor m_{cutoff}({s}) is not finite and positive: {m}")
        vals.append(m)
    return SpectralFactor(tuple(vals))


@dataclass
class EmbeddedIrrep:
    """
    Matrices of so(D+1) on the F-basis of V^Lambda.

    iL[(h, k)] for 1 <= h < k <= D+1; X[i] = L_{D+1, i}.
    """

    D: int
    cutoff: int
    catalog: BasisCatalog
    iL: Dict[Tuple[int, int], np.ndarray]

    @property
    def N(self) -> int:
        return self.catalog.total_dim

    @property
    def bold(self) -> int:
        return self.D + 1

    def generator(self, h: int, k: int) -> np.ndarray:
        if h == k:
            return np.zeros((self.N, self.N))
        return self.iL[(h, k)] if h < k else -self.iL[(k, h)]

    def L(self, h: int, k: int) -> np.ndarray:
        return -1j * self.generator(h, k)

    def X(self, i: int) -> np.ndarray:
        return self.L(self.bold, i)

    def lambda_op(self) -> np.ndarray:
        return np.diag(np.concatenate([np.full(self.catalog[l].dim, float(l)) for l in range(self.cutoff + 1)]))

    def so_D_casimir(self) -> np.ndarray:
        return -sum(self.generator(h, k) @ self.generator(h, k)
                    for h, k in itertools.combinations(range(1, self.D + 1), 2))

    def casimir(self) -> np.ndarray:
        return -sum(A @ A for A in self.iL.values())

    def level_scalar(self, values) -> np.ndarray:
        return np.diag(np.concatenate([np.full(self.catalog[l].dim, values[l]) for l in range(self.cutoff + 1)]))

    def branching(self) -> List[int]:
        """Multiplicity of each so(D) Casimir eigenvalue E_l, l = 0..Lambda."""
        eig = np.linalg.eigvals(self.so_D_casimir()).real
        return [int(np.sum(np.abs(eig - casimir_eigenvalue(l, self.D)) < 1e-6)) for l in range(self.cutoff + 1)]

    def axis_inversion(self, j: int) -> np.ndarray:
        """Blockwise sigma_j^{(x)l}: the action of t^j -> -t^j."""
        S = np.zeros((self.N, self.N))
        sigma = np.ones(self.D)
        sigma[j - 1] = -1.0
        for l in range(self.cutoff + 1):
            lv = self.catalog[l]
            diag = np.ones(1)
            for _ in range(l):
                diag = np.kron(diag, sigma)
            b = self.catalog.block(l)
            S[b, b] = lv.h * lv.tensors.T @ (diag[:, None] * lv.tensors)
        return S

    def rotation_representative(self, j: int) -> np.ndarray:
        """exp(pi iL_{j,D+1}): the rotation by pi in the (j, D+1) plane."""
        return linalg.expm(math.pi * self.generator(j, self.bold))


def build_embedded_irrep(cutoff: int, D: int) -> EmbeddedIrrep:
    if D < 2 or cutoff < 0:
        raise ConfigError(f"need D >= 2 and Lambda >= 0, got D={D}, Lambda={cutoff}")
    catalog = build_catalog(D, cutoff)
    N = catalog.total_dim
    gens = {}
    for h, k in itertools.combinations(range(1, D + 1), 2):
        M = np.zeros((N, N))
        for l in range(cutoff + 1):
            b = catalog.block(l)
            M[b, b] = L_action_on_T(h, k, l, D)
        gens[(h, k)] = M
    for h in range(1, D + 1):
        M = np.zeros((N, N))
        for l in range(cutoff + 1):
            up, down = t_multiplication(h, l, D, up=l < cutoff)
            if l < cutoff:
                M[catalog.block(l + 1), catalog.block(l)] = (cutoff - l) * up
            if l >= 1:
                M[catalog.block(l - 1), catalog.block(l)] = -(cutoff + l + D - 2) * down
        gens[(h, D + 1)] = M
    return EmbeddedIrrep(D, cutoff, catalog, gens)


# ---------------------------------------------------------------------------
# The isomorphism
# ---------------------------------------------------------------------------

def varkappa(irrep: EmbeddedIrrep) -> np.ndarray:
    """psi_l^I -> a_{Lambda,l} F^I as a diagonal matrix on the shared frames."""
    return irrep.level_scalar(a_coefficients(irrep.cutoff, irrep.D)).astype(complex)


def apply_varkappa(irrep: EmbeddedIrrep, psi: np.ndarray) -> np.ndarray:
    return varkappa(irrep) @ np.asarray(psi)


def varkappa_condition(irrep: EmbeddedIrrep) -> float:
    s = np.linalg.svd(varkappa(irrep), compute_uv=False)
    return float(s[0] / s[-1])


def kappa_generators(alg: FuzzyAlgebra, irrep: EmbeddedIrrep) -> Dict[str, np.ndarray]:
    """kappa on generators: Lbar_hk -> L_hk, xbar^i -> m(lambda) X^i m(lambda)."""
    m = irrep.level_scalar(spectral_factor(alg.cutoff, alg.k, alg.D).values)
    out = {}
    for h, k in itertools.combinations(range(1, alg.D + 1), 2):
        out[f"L{h}{k}"] = irrep.L(h, k)
    for i in range(1, alg.D + 1):
        out[f"x{i}"] = m @ irrep.X(i) @ m
    return out


def kappa(alg: FuzzyAlgebra, irrep: EmbeddedIrrep, op: np.ndarray) -> np.ndarray:
    """
    kappa on an arbitrary element of A_Lambda, transported by conjugation with varkappa.

    This agrees with varkappa by construction and is not a check. The
    independent comparison is compatibility_residual, which matches the
    transported generators against kappa_generators built on the irrep side.
    """
    V = varkappa(irrep)
    return V @ op @ np.linalg.inv(V)


def compatibility_residual(alg: FuzzyAlgebra, irrep: EmbeddedIrrep) -> Dict[str, float]:
    """|varkappa(a psi) - kappa(a) varkappa(psi)| over every frame vector psi, per generator a."""
    V = varkappa(irrep)
    kg = kappa_generators(alg, irrep)
    out = {}
    for h, k in itertools.combinations(range(1, alg.D + 1), 2):
        out[f"L{h}{k}"] = relative_residual(V @ alg.L(h, k), kg[f"L{h}{k}"] @ V)
    for i in range(1, alg.D + 1):
        out[f"x{i}"] = relative_residual(V @ alg.x(i), kg[f"x{i}"] @ V)
    return out


def telescoping_residual(cutoff: int, k: float, D: int) -> float:
    """max_l |m(l) m(l+1) - c_{l+1} / sqrt((Lambda-l)(Lambda+l+D-1))|."""
    m = spectral_factor(cutoff, k, D)
    worst = 0.0
    for l in range(cutoff):
        target = c_coeff(l + 1, k, D, cutoff) / math.sqrt((cutoff - l) * (cutoff + l + D - 1))
        worst = max(worst, abs(m[l] * m[l + 1] - target) / target)
    return worst


# ---------------------------------------------------------------------------
# Sampling F on S^D
# ---------------------------------------------------------------------------

def sample_F(cutoff: int, l: int, index, points: np.ndarray) -> np.ndarray:
    """F^I(t) = p_{Lambda,l}(t^{D+1}) X_l^I(t_par) at points of the unit sphere in R^{D+1}."""
    points = np.atleast_2d(points)
    D = points.shape[1] - 1
    par, top = points[:, :D], points[:, D]
    p = np.polynomial.polynomial.polyval(top, p_polynomial(cutoff, l, D))
    X = tensor_powers(par, l) @ build_projector(l, D).entries[rank_index(index, D)] if l else np.ones(points.shape[0])
    return p * X


def factorization_residual(cutoff: int, D: int, points: np.ndarray) -> float:
    """F^I against p_{Lambda,l}(t^{D+1}) |t_par|^l T_l^I(t_par / |t_par|)."""
    worst = 0.0
    for l in range(cutoff + 1):
        p = p_polynomial(cutoff, l, D)
        for I in level_frame(l, D).indices:
            direct = sample_F(cutoff, l, I, points)
            for t, value in zip(points, direct):
                par = t[:D]
                r = float(np.linalg.norm(par))
                if r < 1e-8:
                    continue
                T = eval_T(l, I, par / r) if l else 1.0
                expect = np.polynomial.polynomial.polyval(t[D], p) * r ** l * T
                worst = max(worst, abs(value - expect))
    return worst


def _pad_tensor(tau: np.ndarray, l: int, D: int) -> np.ndarray:
    """Embed an order-l tensor over R^D into R^{D+1} (last axis unused)."""
    full = np.zeros((D + 1,) * l)
    full[(slice(0, D),) * l] = tau.reshape((D,) * l) if l else tau
    return full.reshape(-1)


def F_tensor(cutoff: int, l: int, index, D: int) -> np.ndarray:
    """Order-Lambda tensor over R^{D+1} whose restriction to S^D is F^I."""
    bold = D + 1
    e_top = np.eye(bold)[D]
    delta = np.eye(bold).reshape(-1)
    X = _pad_tensor(build_projector(l, D).entries[rank_index(index, D)], l, D) if l else np.ones(1)
    coeffs = p_polynomial(cutoff, l, D)
    tau = np.zeros(bold ** cutoff)
    h = cutoff - l
    for k in range(h // 2 + 1):
        piece = X
        for _ in range(h - 2 * k):
            piece = np.kron(piece, e_top)
        for _ in range(k):
            piece = np.kron(piece, delta)
        tau += coeffs[h - 2 * k] * piece
    return tau


def harmonicity_residual(cutoff: int, D: int, points: np.ndarray) -> float:
    """
    F^I against its projection onto degree-Lambda harmonics of R^{D+1}.

    Zero iff every F^I is the restriction of a harmonic polynomial.
    """
    bold = D + 1
    P = build_projector(cutoff, bold).entries
    powers = tensor_powers(points, cutoff)
    worst = 0.0
    for l in range(cutoff + 1):
        for I in level_frame(l, D).indices:
            tau = F_tensor(cutoff, l, I, D)
            direct = sample_F(cutoff, l, I, points)
            projected = powers @ (P @ tau)
            worst = max(worst, float(np.max(np.abs(direct - projected))), float(np.max(np.abs(direct - powers @ tau))))
    return worst


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

def check_isomorphism(alg: FuzzyAlgebra, tol: float = 1e-8, seed: int = 0) -> CheckReport:
    D, lam = alg.D, alg.cutoff
    points = sphere_points(64, D + 1, seed)
    irrep = build_embedded_irrep(lam, D)
    rep = CheckReport("isomorphism", tol)
    compat = compatibility_residual(alg, irrep)
    rep.add("compatibility", max(compat.values()) if compat else 0.0)
    bold = D + 1
    for (i, j), (h, k) in itertools.product(itertools.combinations(range(1, bold + 1), 2), repeat=2):
        A, B = irrep.generator(i, j), irrep.generator(h, k)
        rhs = 1j * (irrep.L(i, k) * (j == h) - irrep.L(j, k) * (i == h)
                    - irrep.L(i, h) * (j == k) + irrep.L(j, h) * (i == k))
        rep.add("so_bold_closure", relative_residual(A @ B - B @ A, rhs))
    rep.add("casimir", relative_residual(irrep.casimir(), lam * (lam + D - 1) * np.eye(irrep.N)))
    lam_op = irrep.lambda_op()
    rep.add("lambda_casimir", relative_residual(lam_op @ (lam_op + (D - 2) * np.eye(irrep.N)), irrep.so_D_casimir()))
    expected = [projector_dimension(l, D) for l in range(lam + 1)]
    rep.add("branching", float(sum(abs(a - b) for a, b in zip(irrep.branching(), expected))))
    if lam:
        rep.add("telescoping", telescoping_residual(lam, alg.k, D))
    kg = kappa_generators(alg, irrep)
    for j in range(1, D + 1):
        S = irrep.axis_inversion(j)
        for i in range(1, D + 1):
            sign = -1.0 if i == j else 1.0
            rep.add("parity_xbar", relative_residual(S @ alg.x(i) @ S, sign * alg.x(i)))
            rep.add("parity_kappa", relative_residual(S @ kg[f"x{i}"] @ S, sign * kg[f"x{i}"]))
        parity = irrep.level_scalar([(-1.0) ** (lam - l) for l in range(lam + 1)])
        rep.add("rotation_parity", relative_residual(irrep.rotation_representative(j), parity @ S))
    rep.add("F_factorization", factorization_residual(lam, D, points))
    rep.add("F_harmonic", harmonicity_residual(lam, D, points))
    m = spectral_factor(lam, alg.k, D)
    rep.info.update({
        "D": D,
        "Lambda": lam,
        "k": alg.k,
        "compat_residual": max(compat.values()) if compat else 0.0,
        "branching": irrep.branching(),
        "m_values": list(m.values),
        "varkappa_condition": varkappa_condition(irrep),
    })
    return rep
