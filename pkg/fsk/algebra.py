"""
fsk Fuzzy Operators
===================
The algebra A_Lambda of observables on H_Lambda: matrices of xbar^i and
Lbar_hk in the orthonormal frames of the levels l = 0..Lambda, the
eigenprojectors P^l, and the checker for the commutation relations.
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .errors import ConfigError, InconsistencyError
from .harmonics import BasisCatalog, L_action_on_T, build_catalog, t_multiplication
from .report import CheckReport, max_abs, relative_residual
from .tensors import projector_dimension

Pair = Tuple[int, int]


def default_k(cutoff: int, D: int) -> float:
    """k(Lambda) = [Lambda(Lambda + D - 2)]^2."""
    if cutoff < 1:
        raise ConfigError(f"default_k needs cutoff >= 1, got {cutoff}")
    return float((cutoff * (cutoff + D - 2)) ** 2)


def casimir_eigenvalue(l: int, D: int) -> float:
    """E_l = l(l + D - 2)."""
    return float(l * (l + D - 2))


def b_constant(D: int) -> float:
    """B = (2D - 5)(D - 1)/2."""
    return (2 * D - 5) * (D - 1) / 2.0


def c_coeff(l: int, k: float, D: int, cutoff: int) -> float:
    """c_l = sqrt(1 + B/k + (l-1)(l+D-2)/k) for 1 <= l <= Lambda, else 0."""
    if not 1 <= l <= cutoff:
        return 0.0
    radicand = 1.0 + b_constant(D) / k + (l - 1) * (l + D - 2) / k
    if radicand <= 0:
        raise InconsistencyError(f"negative radicand {radicand} in c_{l} (k={k}, D={D})")
    return math.sqrt(radicand)


def dimension_N(cutoff: int, D: int) -> int:
    """N = (D+Lambda-2)...(Lambda+1)/(D-1)! * (D+2Lambda-1)."""
    num = math.prod(range(cutoff + 1, cutoff + D - 1)) * (D + 2 * cutoff - 1)
    return num // math.factorial(D - 1)


def r2_values(cutoff: int, k: float, D: int) -> List[float]:
    """Eigenvalues r^2_l of xbar^2 on each level."""
    out = [1.0 + (casimir_eigenvalue(l, D) + b_constant(D)) / k for l in range(cutoff)]
    c = c_coeff(cutoff, k, D, cutoff)
    out.append(c * c * cutoff / (D + 2 * cutoff - 2) if cutoff else 0.0)
    return out


def commutator_K(cutoff: int, k: float, D: int) -> float:
    """K in [xbar^i, xbar^j] = iLbar_ij (-1/k + K P_Lambda); needs cutoff >= 1."""
    if cutoff < 1:
        raise ConfigError(f"commutator_K needs cutoff >= 1, got {cutoff}")
    return 1.0 / k + (1.0 + b_constant(D) / k + (cutoff - 1) * (cutoff + D - 2) / k) / (D + 2 * cutoff - 2)


def _lagrange(A: np.ndarray, nodes: List[float], l: int) -> np.ndarray:
    """prod_{n != l} (A - nodes[n]) / (nodes[l] - nodes[n])."""
    out = np.eye(A.shape[0], dtype=A.dtype)
    for n, v in enumerate(nodes):
        if n == l:
            continue
        gap = nodes[l] - v
        if abs(gap) < 1e-12:
            raise InconsistencyError(f"degenerate Lagrange nodes {l} and {n}")
        out = out @ (A - v * np.eye(A.shape[0])) / gap
    return out


def _perm_sign(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class OperatorMatrix:
    """An observable on H_Lambda together with the metric of its basis."""

    entries: np.ndarray
    gram: np.ndarray

    def adjointness_residual(self) -> float:
        return max_abs(self.gram @ self.entries - self.entries.conj().T @ self.gram)

    def to_json(self) -> List:
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(self.entries, dtype=complex)]


@dataclass
class FuzzyAlgebra:
    """
    The (D, Lambda, k) fuzzy sphere.

    iLbar holds the real antisymmetric matrices of iLbar_hk (h < k); Lbar_hk is
    recovered as -i iLbar_hk. xbar holds the real symmetric matrices of xbar^i.
    """

    D: int
    cutoff: int
    k: float
    catalog: BasisCatalog
    iLbar: Dict[Pair, np.ndarray]
    xbar: Dict[int, np.ndarray]
    blocks: Dict[int, np.ndarray] = field(repr=False)

    @classmethod
    def build(cls, D: int, cutoff: int, k: Optional[float] = None) -> "FuzzyAlgebra":
        if D < 2:
            raise ConfigError(f"dimension must be >= 2, got {D}")
        if cutoff < 0:
            raise ConfigError(f"cutoff must be >= 0, got {cutoff}")
        if k is None:
            k = default_k(max(cutoff, 1), D)
        if k <= 0:
            raise ConfigError(f"k must be positive, got {k}")
        catalog = build_catalog(D, cutoff)
        N = catalog.total_dim
        if N != dimension_N(cutoff, D):
            raise InconsistencyError(f"dim H_Lambda = {N} but the closed form gives {dimension_N(cutoff, D)}")

        iLbar = {}
        for h, kk in itertools.combinations(range(1, D + 1), 2):
            M = np.zeros((N, N))
            for l in range(cutoff + 1):
                b = catalog.block(l)
                M[b, b] = L_action_on_T(h, kk, l, D)
            iLbar[(h, kk)] = M

        xbar = {}
        for i in range(1, D + 1):
            X = np.zeros((N, N))
            for l in range(cutoff):
                c = c_coeff(l + 1, k, D, cutoff)
                up, _ = t_multiplication(i, l, D)
                _, down = t_multiplication(i, l + 1, D, up=False)
                X[catalog.block(l + 1), catalog.block(l)] = c * up
                X[catalog.block(l), catalog.block(l + 1)] = c * down
            xbar[i] = X

        blocks = {}
        for l in range(cutoff + 1):
            P = np.zeros((N, N))
            b = catalog.block(l)
            P[b, b] = np.eye(catalog[l].dim)
            blocks[l] = P
        return cls(D, cutoff, float(k), catalog, iLbar, xbar, blocks)

    # -- accessors -----------------------------------------------------------

    @property
    def N(self) -> int:
        return self.catalog.total_dim

    def iL(self, h: int, k: int) -> np.ndarray:
        if h == k:
            return np.zeros((self.N, self.N))
        if h < k:
            return self.iLbar[(h, k)]
        return -self.iLbar[(k, h)]

    def L(self, h: int, k: int) -> np.ndarray:
        return -1j * self.iL(h, k)

    def x(self, i: int) -> np.ndarray:
        return self.xbar[i]

    def x2(self) -> np.ndarray:
        return sum(X @ X for X in self.xbar.values())

    def L2(self) -> np.ndarray:
        return -sum(A @ A for A in self.iLbar.values())

    def block_projector(self, l: int) -> np.ndarray:
        return self.blocks[l]

    def eigenprojector(self, l: int) -> np.ndarray:
        """P^l as the Lagrange polynomial in Lbar^2 over the Casimir eigenvalues."""
        if not 0 <= l <= self.cutoff:
            raise ConfigError(f"level {l} outside 0..{self.cutoff}")
        nodes = [casimir_eigenvalue(n, self.D) for n in range(self.cutoff + 1)]
        return _lagrange(self.L2(), nodes, l)

    def operator(self, A: np.ndarray) -> OperatorMatrix:
        return OperatorMatrix(A, np.eye(self.N))

    def r2_values(self) -> List[float]:
        return r2_values(self.cutoff, self.k, self.D)

    def chi(self) -> np.ndarray:
        """Right-hand side of xbar^2 as a function of Lbar^2."""
        D, lam, k, B = self.D, self.cutoff, self.k, b_constant(self.D)
        one = np.eye(self.N)
        out = one + self.L2() / k + B / k * one
        if lam == 0 and D == 2:
            return out - (1.0 + B / k) * self.blocks[0]
        coeff = (lam + D - 2) / (2 * lam + D - 2) * (1.0 + B / k + lam * (lam + D - 1) / k)
        return out - coeff * self.eigenprojector(lam)

    def alpha_inverse(self) -> np.ndarray:
        """1/alpha with [xbar^i, xbar^j] = alpha iLbar_ij, built from xbar^2 alone."""
        r2 = self.r2_values()
        PL = _lagrange(self.x2(), r2, self.cutoff) if self.cutoff else np.eye(self.N)
        top = commutator_K(self.cutoff, self.k, self.D) - 1.0 / self.k
        return -self.k * (np.eye(self.N) - PL) + PL / top

    # -- normalization ledger --------------------------------------------------

    def adjointness_scales(self) -> List[float]:
        """
        Per-level basis scales s_l making every xbar^i symmetric.

        The up block U_l and down block W_{l+1} transform into
        (s_{l+1}/s_l) U_l and (s_l/s_{l+1}) W_{l+1}; the ratio is fitted so that
        the rescaled up block equals the transposed down block.
        """
        scales = [1.0]
        for l in range(self.cutoff):
            lo, hi = self.catalog.block(l), self.catalog.block(l + 1)
            num = den = 0.0
            for X in self.xbar.values():
                U, W = X[hi, lo], X[lo, hi]
                num += float(np.sum(W.T * U))
                den += float(np.sum(U * U))
            ratio = math.sqrt(num / den) if den > 0 and num > 0 else 1.0
            scales.append(scales[-1] * ratio)
        return scales

    # -- spectra ----------------------------------------------------------------

    def spectrum_x2(self) -> List[Tuple[int, float, int]]:
        """(l, r^2_l, multiplicity) with r^2_l read off the numerical spectrum of xbar^2."""
        X2 = self.x2()
        out = []
        for l in range(self.cutoff + 1):
            b = self.catalog.block(l)
            eig = linalg.eigvalsh(X2[b, b])
            out.append((l, float(np.mean(eig)), int(eig.shape[0])))
        return out

    def spectrum_residual(self) -> float:
        """Distance between the eigenvalues of xbar^2 and the predicted r^2_l."""
        eig = np.sort(linalg.eigvalsh(self.x2()))
        predicted = []
        for l, r2 in enumerate(self.r2_values()):
            predicted.extend([r2] * self.catalog[l].dim)
        return max_abs(eig - np.sort(np.array(predicted)))

    # -- relations ----------------------------------------------------------------

    def check_relations(self, tol: float = 1e-10) -> CheckReport:
        """Residual of every relation between the xbar^i and Lbar_hk."""
        D, N = self.D, self.N
        rep = CheckReport("relations", tol)
        axes = range(1, D + 1)
        one = np.eye(N)

        for i, j in itertools.combinations(axes, 2):
            A = self.iL(i, j)
            for h in axes:
                lhs = A @ self.x(h) - self.x(h) @ A
                rhs = self.x(i) * (h == j) - self.x(j) * (h == i)
                rep.add("rotation_x", relative_residual(lhs, rhs))

        for (i, j), (h, k) in itertools.product(itertools.combinations(axes, 2), repeat=2):
            A, B_ = self.iL(i, j), self.iL(h, k)
            lhs = A @ B_ - B_ @ A
            rhs = 1j * (self.L(i, k) * (j == h) - self.L(j, k) * (i == h)
                        - self.L(i, h) * (j == k) + self.L(j, h) * (i == k))
            rep.add("so_D_closure", relative_residual(lhs, rhs))

        if D >= 3:
            for rest in itertools.combinations(axes, D - 3):
                triple = [a for a in axes if a not in rest]
                acc_xL = np.zeros((N, N), dtype=complex)
                acc_xxx = np.zeros((N, N))
                for p in itertools.permutations(triple):
                    s = _perm_sign(list(p) + list(rest))
                    acc_xL += s * self.x(p[0]) @ self.L(p[1], p[2])
                    acc_xxx += s * self.x(p[0]) @ self.x(p[1]) @ self.x(p[2])
                rep.add("epsilon_xL", relative_residual(acc_xL, 0 * acc_xL))
                rep.add("epsilon_xxx", relative_residual(acc_xxx, 0 * acc_xxx))
        else:
            rep.skipped.extend(["epsilon_xL", "epsilon_xxx"])

        power = 2 * self.cutoff + 1
        for h, k in itertools.permutations(axes, 2):
            for sgn in (1, -1):
                Z = np.linalg.matrix_power(self.x(h) + sgn * 1j * self.x(k), power)
                rep.add("x_nilpotent", relative_residual(Z, 0 * Z))
        if D >= 3:
            for h, j, k in itertools.permutations(axes, 3):
                Z = np.linalg.matrix_power(self.L(h, j) + 1j * self.L(k, j), power)
                rep.add("L_nilpotent", relative_residual(Z, 0 * Z))
        else:
            rep.skipped.append("L_nilpotent")

        if self.cutoff:
            K = commutator_K(self.cutoff, self.k, D)
            factor = -one / self.k + K * self.eigenprojector(self.cutoff)
            for i, j in itertools.combinations(axes, 2):
                lhs = self.x(i) @ self.x(j) - self.x(j) @ self.x(i)
                rep.add("x_commutator", relative_residual(lhs, 1j * self.L(i, j) @ factor))
        else:
            # xbar vanishes on the single level
            rep.skipped.append("x_commutator")

        X2 = self.x2()
        rep.add("x2_spectral", relative_residual(X2, self.chi()))

        r2 = self.r2_values()
        if self.cutoff:
            from_x2 = sum(casimir_eigenvalue(l, D) * _lagrange(X2, r2, l) for l in range(self.cutoff + 1))
            rep.add("L2_from_x2", relative_residual(self.L2(), from_x2))
            inv = self.alpha_inverse()
            for i, j in itertools.combinations(axes, 2):
                comm = self.x(j) @ self.x(i) - self.x(i) @ self.x(j)
                rep.add("generator_L_from_x", relative_residual(self.L(i, j), 1j * comm @ inv))
        else:
            rep.skipped.extend(["L2_from_x2", "generator_L_from_x"])

        rep.add("x_selfadjoint", max(self.operator(X).adjointness_residual() for X in self.xbar.values()))
        if self.iLbar:
            rep.add("L_selfadjoint", max(self.operator(self.L(h, k)).adjointness_residual() for h, k in self.iLbar))
        rep.add("projector_agreement", max(
            max_abs(self.eigenprojector(l) - self.blocks[l]) for l in range(self.cutoff + 1)))
        E = sum(casimir_eigenvalue(l, D) * self.blocks[l] for l in range(self.cutoff + 1))
        rep.add("casimir", relative_residual(self.L2(), E))
        rep.add("spectrum_x2", self.spectrum_residual())
        rep.info.update({
            "D": D,
            "Lambda": self.cutoff,
            "k": self.k,
            "N": N,
            "adjointness_scales": self.adjointness_scales(),
        })
        return rep

    # -- mutation for harness self-tests ----------------------------------------

    def with_injected_error(self, magnitude: float = 1e-3) -> "FuzzyAlgebra":
        """Copy with one xbar^1 entry perturbed."""
        xbar = {i: X.copy() for i, X in self.xbar.items()}
        xbar[1][0, self.N - 1] += magnitude
        return FuzzyAlgebra(self.D, self.cutoff, self.k, self.catalog, dict(self.iLbar), xbar, self.blocks)

    def to_json(self) -> Dict:
        return {
            "D": self.D,
            "Lambda": self.cutoff,
            "k": self.k,
            "N": self.N,
            "block_dims": [projector_dimension(l, self.D) for l in range(self.cutoff + 1)],
            "operators": {
                "xbar": [self.operator(self.x(i)).to_json() for i in range(1, self.D + 1)],
                "Lbar": [
                    {"h": h, "k": k, "matrix": self.operator(self.L(h, k)).to_json()}
                    for h, k in sorted(self.iLbar)
                ],
            },
            "spectrum_x2": [[l, r2] for l, r2, _ in self.spectrum_x2()],
        }
