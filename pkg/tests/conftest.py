import sys
from pathlib import Path

import pytest

# Ensure `import fsk` works without installing: add repo root to sys.path
_repo_root = Path(__file__).resolve().parents[1]
if str(_repo_root) not in sys.path:
    sys.path.insert(0, str(_repo_root))

from fsk.algebra import FuzzyAlgebra  # noqa: E402
from fsk.harmonics import level_frame  # noqa: E402
from fsk.products import product_decomposition  # noqa: E402
from fsk.tensors import build_projector, build_projector_alt  # noqa: E402


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch, tmp_path):
    # Keep the run ledger and tensor budget out of the user's environment
    monkeypatch.setenv("FSK_HOME", str(tmp_path / "fsk_home"))
    monkeypatch.delenv("FSK_MAX_TENSOR_BYTES", raising=False)
    return tmp_path


@pytest.fixture()
def temp_project(tmp_path):
    # Create a temporary project directory
    proj = tmp_path / "proj"
    proj.mkdir()
    return proj


@pytest.fixture()
def fresh_caches():
    # Budget checks only run on a cache miss
    for cached in (build_projector, build_projector_alt, level_frame, product_decomposition):
        cached.cache_clear()
    yield
    for cached in (build_projector, build_projector_alt, level_frame, product_decomposition):
        cached.cache_clear()


@pytest.fixture(scope="session")
def alg_3_2():
    return FuzzyAlgebra.build(3, 2, 36.0)


@pytest.fixture(scope="session")
def alg_4_2():
    return FuzzyAlgebra.build(4, 2)
