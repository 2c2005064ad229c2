"""
fsk Core Module
===============
Main interface: validated run configuration, the check suites, and
atomic artifact writing with a run ledger entry per command.
"""

import csv
import hashlib
import io
import itertools
import json
import os
import sys
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import FuzzyAlgebra, default_k
from .embedding import check_isomorphism
from .errors import ConfigError
from .harmonics import (
    casimir_on_level,
    gram_constant,
    gram_T,
    level_frame,
    L_action_on_T,
    sphere_points,
    t_multiplication,
    t_multiplication_residual,
    weight_vector,
)
from .logger import RunLedger
from .products import (
    ConvergenceRow,
    convergence_report,
    equivariance_residual,
    fuzzy_function_space_dimension,
    fuzzy_function_space_rank,
    operator_norm_witness,
    product_coefficient,
    product_decomposition,
    product_residual,
    rows_to_csv,
)
from .radial import RADIAL_HEADER, RadialRow, check_radial, radial_table
from .report import CheckReport, max_abs, relative_residual
from .tensors import braid_checks, build_projector, projector_checks

SUITES = ("projectors", "relations", "isomorphism", "convergence", "radial", "all")
FORMATS = ("json", "csv")
DUMPS = ("frames", "products", "projectors")
PROJECTOR_LMAX = 4
ISOMORPHISM_TOL = 1e-8
CONVERGENCE_RANGE = (2, 6)
CONVERGENCE_TARGET = 0.1
DUMP_LMAX = 2


@dataclass
class RunConfig:
    """Everything that determines the bytes of an artifact."""

    dim: int = 3
    cutoff: int = 2
    k: Optional[float] = None
    tol: float = 1e-10
    suite: str = "relations"
    output: Optional[str] = None
    fmt: str = "json"
    seed: int = 0
    dump: Tuple[str, ...] = ()

    def validate(self) -> "RunConfig":
        if self.dim < 2:
            raise ConfigError(f"--dim must be >= 2, got {self.dim}")
        if self.cutoff < 0:
            raise ConfigError(f"--cutoff must be >= 0, got {self.cutoff}")
        if not self.tol > 0:
            raise ConfigError(f"--tol must be positive, got {self.tol}")
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r} (choose from {', '.join(SUITES)})")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown format {self.fmt!r} (choose json or csv)")
        if self.k is not None and not self.k > 0:
            raise ConfigError(f"--k must be positive, got {self.k}")
        for section in self.dump:
            if section not in DUMPS:
                raise ConfigError(f"unknown dump section {section!r} (choose from {', '.join(DUMPS)})")
        return self

    @property
    def resolved_k(self) -> float:
        return float(self.k) if self.k is not None else default_k(max(self.cutoff, 1), self.dim)

    def canonical_json(self) -> str:
        payload = asdict(self)
        payload.pop("output")
        return json.dumps(payload, sort_keys=True, default=_jsonable)


def run_hash(config: RunConfig, command: str) -> str:
    return hashlib.sha256((config.canonical_json() + command).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + "\n"


def write_atomic(path: Path, text: str) -> Path:
    """Write text to path through a temporary file in the same directory."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def table_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def projector_suite(D: int, tol: float, seed: int = 0, lmax: int = PROJECTOR_LMAX) -> CheckReport:
    """Projector identities, braid relations, Casimir, weights and t-multiplication."""
    rep = CheckReport("projectors", tol)
    points = sphere_points(128, D, seed)
    for l in range(lmax + 1):
        for name, value in projector_checks(l, D).items():
            rep.add(name, value)
        lv = level_frame(l, D)
        rep.add("gram_constant", abs(lv.h - gram_constant(l, D)) / gram_constant(l, D))
        rep.add("gram_fit", gram_T(l, D)[2])
        rep.add("casimir", relative_residual(casimir_on_level(l, D), l * (l + D - 2) * np.eye(lv.dim)))
        for sign in (1, -1):
            w = weight_vector(1, 2, l, D, sign)
            L = -1j * L_action_on_T(1, 2, l, D)
            rep.add("weight_vector", relative_residual(L @ w, sign * l * w))
        if l < lmax:
            rep.add("t_multiplication", max(t_multiplication_residual(h, l, D, points) for h in range(1, D + 1)))
            ups = [t_multiplication(h, l, D)[0] for h in range(1, D + 1)]
            downs = [t_multiplication(h, l + 1, D, up=False)[1] for h in range(1, D + 1)]
            rep.add("up_down_transpose", max(max_abs(u - d.T) for u, d in zip(ups, downs)))
            expected = 1.0 if l == 0 else 1.0 - l / (D + 2 * l - 2)
            acc = sum(d @ u for u, d in zip(ups, downs))
            rep.add("t_square_up", relative_residual(acc, expected * np.eye(lv.dim)))
    for name, value in braid_checks(D).items():
        rep.add(name, value)
    rep.info.update({"D": D, "lmax": lmax})
    return rep


def products_suite(alg: FuzzyAlgebra, tol: float, seed: int = 0) -> CheckReport:
    """Classical product decomposition and fuzzy harmonics on a built algebra."""
    D = alg.D
    rep = CheckReport("products", tol)
    points = sphere_points(128, D, seed)
    top = 3 if D <= 3 else 2
    for l, m in itertools.product(range(top + 1), repeat=2):
        rep.add("product_reconstruction", product_residual(l, m, D, points))
    rep.add("N11_0", abs(product_coefficient(1, 1, 0, D) - 1.0 / D))
    for l in range(min(alg.cutoff, 2) + 1):
        rep.add("equivariance", equivariance_residual(alg, l))
    rep.add("function_space_rank", float(abs(
        fuzzy_function_space_rank(alg) - fuzzy_function_space_dimension(alg.cutoff, D))))
    return rep


def convergence_cutoffs(D: int) -> List[int]:
    """Cutoffs 2..6 kept to those whose largest level fits the default tensor budget."""
    lo, hi = CONVERGENCE_RANGE
    return [lam for lam in range(lo, hi + 1) if D ** (lam + 1) <= 4096]


def convergence_suite(D: int, tol: float, seed: int = 0) -> CheckReport:
    """
    Strong-limit trend for f = t1 on psi = T_1^(1).

    Approximation checks are recorded as the amount by which they miss their
    target, so a passing entry is exactly zero.
    """
    rep = CheckReport("convergence", tol)
    cutoffs = convergence_cutoffs(D)
    rows = convergence_report("t1", D, cutoffs)
    values = [r.norm_residual for r in rows]
    rep.add("non_increasing", max([0.0] + [b - a for a, b in zip(values, values[1:])]))
    if cutoffs and cutoffs[-1] == CONVERGENCE_RANGE[1]:
        rep.add("final_residual", max(0.0, values[-1] - CONVERGENCE_TARGET))
    else:
        rep.skipped.append("final_residual")
    alg = FuzzyAlgebra.build(D, cutoffs[0] if cutoffs else 1)
    fuzzy, exact = operator_norm_witness(alg)
    rep.add("norm_witness_fuzzy", fuzzy)
    rep.add("norm_witness_exact", 0.0 if exact > 1e-6 else 1.0)
    rep.merge(products_suite(alg, tol, seed), prefix="products.")
    rep.info.update({
        "D": D,
        "cutoffs": cutoffs,
        "norm_residuals": values,
        "witness": [fuzzy, exact],
    })
    return rep


def dump_sections(alg: FuzzyAlgebra, sections: Sequence[str]) -> Dict[str, Any]:
    """Extra tables for the build artifact, keyed by section name."""
    out: Dict[str, Any] = {}
    top = min(alg.cutoff, DUMP_LMAX)
    if "frames" in sections:
        out["frames"] = alg.catalog.to_json()
    if "products" in sections:
        out["products"] = [
            product_decomposition(l, m, alg.D).to_json()
            for l, m in itertools.product(range(top + 1), repeat=2)
        ]
    if "projectors" in sections:
        out["projectors"] = [build_projector(l, alg.D).to_json() for l in range(top + 1)]
    return out


# ---------------------------------------------------------------------------
# Orchestrator
# ---------------------------------------------------------------------------

def _say(message: str) -> None:
    print(message, file=sys.stderr)


class FuzzySphereKit:
    """
    Orchestrates builds and checks for one project directory.

    Artifacts default to <project>/fsk_out; the run ledger lives in
    $FSK_HOME or <project>/.fsk.
    """

    def __init__(self, project_dir: Optional[str] = None):
        """
        Args:
            project_dir: Project directory (defaults to current directory)
        """
        self.project_dir = Path(project_dir or os.getcwd())
        self.fsk_dir = Path(os.environ.get("FSK_HOME") or self.project_dir / ".fsk")
        self.ledger = RunLedger(db_path=str(self.fsk_dir / "runs.db"))

    # -- artifacts -------------------------------------------------------------

    def _target(self, config: RunConfig, command: str, ext: str) -> Optional[Path]:
        if config.output == "-":
            return None
        if config.output:
            p = Path(config.output)
            return p if p.is_absolute() else self.project_dir / p
        return self.project_dir / "fsk_out" / f"{command}-{run_hash(config, command)}.{ext}"

    def _emit(self, config: RunConfig, command: str, text: str, passed: bool = True) -> Optional[str]:
        target = self._target(config, command, config.fmt)
        if target is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            self.ledger.log_run(run_hash(config, command), command, config.canonical_json(), None, passed)
            return None
        write_atomic(target, text)
        self.ledger.log_run(run_hash(config, command), command, config.canonical_json(), str(target), passed)
        _say(f"📁 Wrote {target}")
        return str(target)

    # -- commands --------------------------------------------------------------

    def build(self, config: RunConfig) -> Optional[str]:
        """Dump the operator matrices of A_Lambda as JSON."""
        config.validate()
        alg = FuzzyAlgebra.build(config.dim, config.cutoff, config.resolved_k)
        _say(f"🔨 Built A_Lambda for D={alg.D}, Lambda={alg.cutoff}, k={alg.k!r}: N = {alg.N}")
        payload = alg.to_json()
        payload.update(dump_sections(alg, config.dump))
        config.fmt = "json"
        return self._emit(config, "build", dumps(payload))

    def run_checks(self, config: RunConfig, inject_error: bool = False) -> List[CheckReport]:
        config.validate()
        names = [s for s in SUITES if s != "all"] if config.suite == "all" else [config.suite]
        reports = []
        for name in names:
            _say(f"🔬 Running {name} suite (D={config.dim}, Lambda={config.cutoff})")
            if name == "projectors":
                rep = projector_suite(config.dim, config.tol, config.seed)
            elif name == "relations":
                alg = FuzzyAlgebra.build(config.dim, config.cutoff, config.resolved_k)
                if inject_error:
                    alg = alg.with_injected_error()
                rep = alg.check_relations(config.tol)
            elif name == "isomorphism":
                alg = FuzzyAlgebra.build(config.dim, config.cutoff, config.resolved_k)
                rep = check_isomorphism(alg, max(config.tol, ISOMORPHISM_TOL), config.seed)
            elif name == "convergence":
                rep = convergence_suite(config.dim, config.tol, config.seed)
            else:
                rep = check_radial(config.dim, config.cutoff, config.resolved_k, config.tol)
            status = "✅" if rep.passed else "❌"
            _say(f"{status} {name}: {len(rep.residuals) - len(rep.failures())}/{len(rep.residuals)} checks within tolerance")
            for failure in rep.failures():
                _say(f"   ❌ {failure} = {rep.residuals[failure]!r}")
            reports.append(rep)
        return reports

    def check(self, config: RunConfig, inject_error: bool = False) -> bool:
        reports = self.run_checks(config, inject_error)
        passed = all(r.passed for r in reports)
        config.fmt = "json"
        payload = {"passed": passed, "suites": [r.to_json() for r in reports]}
        self._emit(config, "check", dumps(payload), passed)
        return passed

    def spectrum(self, config: RunConfig, observable: str = "x2") -> Optional[str]:
        config.validate()
        if observable != "x2":
            raise ConfigError(f"unknown observable {observable!r} (only x2)")
        alg = FuzzyAlgebra.build(config.dim, config.cutoff, config.resolved_k)
        rows = alg.spectrum_x2()
        if config.fmt == "csv":
            text = table_csv(("l", "r2", "multiplicity"), rows)
        else:
            text = dumps({"D": alg.D, "Lambda": alg.cutoff, "k": alg.k,
                          "spectrum_x2": [{"l": l, "r2": r2, "multiplicity": m} for l, r2, m in rows]})
        return self._emit(config, "spectrum", text)

    def convergence(self, config: RunConfig, f_name: str, cutoffs: Sequence[int],
                    g_name: Optional[str] = None) -> List[ConvergenceRow]:
        config.validate()
        rows = convergence_report(f_name, config.dim, cutoffs, g_name=g_name)
        if config.fmt == "csv":
            text = rows_to_csv(rows)
        else:
            text = dumps({"D": config.dim, "rows": [asdict(r) for r in rows]})
        self._emit(config, "convergence", text)
        return rows

    def radial(self, config: RunConfig, ls: Sequence[int], k: float, levels: int) -> List[RadialRow]:
        config.validate()
        rows = radial_table(config.dim, ls, k, levels)
        if config.fmt == "csv":
            text = table_csv(RADIAL_HEADER, [
                (r.D, r.l, r.n, r.k, r.E_closed, r.E_leading, r.E_numeric, r.rel_err) for r in rows])
        else:
            text = dumps({"rows": [dict(asdict(r), rel_err=r.rel_err) for r in rows]})
        self._emit(config, "radial", text)
        return rows

    # -- ledger ----------------------------------------------------------------

    def list_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        runs = self.ledger.list_runs(limit)
        _say(f"📊 Recent runs (last {len(runs)}):")
        for i, run in enumerate(runs, 1):
            mark = "✅" if run["passed"] else "❌"
            _say(f"  {i}. {mark} {run['run_hash']} {run['command']} -> {run['artifact_path'] or 'stdout'}")
        return runs

    def verify_run(self, run_hash_: str) -> bool:
        return self.ledger.verify_run(run_hash_)

    def export_runs(self, output_dir: str) -> Optional[str]:
        return self.ledger.export_runs(output_dir)
