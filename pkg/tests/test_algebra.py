import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsk.algebra import (
    FuzzyAlgebra,
    b_constant,
    c_coeff,
    casimir_eigenvalue,
    commutator_K,
    default_k,
    dimension_N,
)
from fsk.errors import ConfigError


def test_dimension_of_the_truncated_space():
    assert dimension_N(2, 3) == 9
    assert dimension_N(3, 3) == 16
    assert dimension_N(4, 2) == 9
    assert dimension_N(1, 4) == 5
    assert dimension_N(2, 4) == 14


def test_default_k_and_constants():
    assert default_k(2, 3) == 36.0
    assert default_k(1, 4) == 9.0
    assert b_constant(3) == 1.0
    assert casimir_eigenvalue(2, 3) == 6.0
    assert c_coeff(0, 36.0, 3, 2) == 0.0
    assert c_coeff(3, 36.0, 3, 2) == 0.0
    with pytest.raises(ConfigError):
        default_k(0, 3)


def test_radius_squared_per_level(alg_3_2):
    assert_allclose(alg_3_2.r2_values(), [37 / 36, 13 / 12, 4 / 9])
    spectrum = alg_3_2.spectrum_x2()
    assert [(l, m) for l, _, m in spectrum] == [(0, 1), (1, 3), (2, 5)]
    assert_allclose([r2 for _, r2, _ in spectrum], [37 / 36, 13 / 12, 4 / 9], atol=1e-12)


def test_operators_have_expected_shapes(alg_3_2):
    assert alg_3_2.N == 9
    for i in range(1, 4):
        X = alg_3_2.x(i)
        assert X.shape == (9, 9)
        assert_allclose(X, X.T, atol=1e-12)
    assert_allclose(alg_3_2.L(2, 1), -alg_3_2.L(1, 2))
    assert not np.any(alg_3_2.iL(2, 2))


@pytest.mark.parametrize("D,cutoff", [(3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (4, 3)])
def test_relations_hold(D, cutoff):
    report = FuzzyAlgebra.build(D, cutoff).check_relations(tol=1e-10)
    assert report.passed, report.failures()
    assert report.info["N"] == dimension_N(cutoff, D)


def test_relations_in_the_plane():
    report = FuzzyAlgebra.build(2, 3).check_relations()
    assert report.passed, report.failures()
    assert "epsilon_xL" in report.skipped
    assert "L_nilpotent" in report.skipped


def test_nilpotent_raising_combination(alg_3_2):
    Z = alg_3_2.x(1) + 1j * alg_3_2.x(2)
    assert np.max(np.abs(np.linalg.matrix_power(Z, 5))) < 1e-10
    assert np.max(np.abs(np.linalg.matrix_power(Z, 2))) > 1e-3


def test_injected_error_is_detected(alg_3_2):
    broken = alg_3_2.with_injected_error()
    report = broken.check_relations()
    assert not report.passed
    assert "x_selfadjoint" in report.failures()
    # the original is untouched
    assert alg_3_2.check_relations().passed


def test_eigenprojectors_match_blocks(alg_4_2):
    for l in range(3):
        assert_allclose(alg_4_2.eigenprojector(l), alg_4_2.block_projector(l), atol=1e-10)
    with pytest.raises(ConfigError):
        alg_4_2.eigenprojector(3)


def test_trivial_cutoff():
    alg = FuzzyAlgebra.build(3, 0)
    assert alg.N == 1
    assert alg.check_relations().passed


def test_trivial_cutoff_in_the_plane():
    report = FuzzyAlgebra.build(2, 0).check_relations()
    assert report.passed, report.failures()
    assert "x_commutator" in report.skipped
    with pytest.raises(ConfigError):
        commutator_K(0, 1.0, 2)


@pytest.mark.parametrize("kwargs", [dict(D=1, cutoff=2), dict(D=3, cutoff=-1), dict(D=3, cutoff=2, k=-1.0)])
def test_invalid_parameters(kwargs):
    with pytest.raises(ConfigError):
        FuzzyAlgebra.build(**kwargs)


def test_json_payload(alg_3_2):
    payload = alg_3_2.to_json()
    assert payload["N"] == 9
    assert payload["block_dims"] == [1, 3, 5]
    assert len(payload["operators"]["xbar"]) == 3
    assert len(payload["operators"]["Lbar"]) == 3
    assert len(payload["operators"]["xbar"][0]) == 9
