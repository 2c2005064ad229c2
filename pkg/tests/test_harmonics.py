import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsk.errors import ConfigError
from fsk.harmonics import (
    HarmonicVector,
    L_action_on_T,
    build_catalog,
    casimir_on_level,
    eval_T,
    gram_T,
    gram_constant,
    level_frame,
    select_basis,
    sphere_area,
    sphere_monomial_integral,
    sphere_points,
    t_multiplication,
    t_multiplication_residual,
    weight_vector,
)
from fsk.tensors import projector_dimension


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_monomial_integrals_on_two_sphere():
    assert sphere_monomial_integral((1, 1), 3) == pytest.approx(4 * math.pi / 3)
    assert sphere_monomial_integral((1, 2), 3) == 0.0
    assert sphere_monomial_integral((1, 1, 1, 1), 3) == pytest.approx(4 * math.pi / 5)


@pytest.mark.parametrize("D", [2, 3, 4])
def test_gram_matrix_is_proportional_to_projector(D):
    for l in range(4):
        _, h, fit = gram_T(l, D)
        assert h == pytest.approx(gram_constant(l, D), rel=1e-12)
        assert fit < 1e-12


@pytest.mark.parametrize("D", [2, 3, 4])
def test_level_frames_are_orthonormal(D):
    for l in range(4):
        lv = level_frame(l, D)
        assert lv.dim == projector_dimension(l, D)
        assert_allclose(lv.frame.T @ lv.gram @ lv.frame, np.eye(lv.dim), atol=1e-10)
        assert list(lv.indices) == sorted(lv.indices)


def test_catalog_blocks():
    cat = build_catalog(3, 2)
    assert cat.dims == [1, 3, 5]
    assert cat.offsets == [0, 1, 4]
    assert cat.total_dim == 9
    assert cat.block(2) == slice(4, 9)
    with pytest.raises(ConfigError):
        build_catalog(3, -1)


def test_rotation_sign_convention():
    # iL_12 sends t^2 to +t^1 and t^1 to -t^2
    A = L_action_on_T(1, 2, 1, 3)
    assert A[0, 1] == pytest.approx(1.0)
    assert A[1, 0] == pytest.approx(-1.0)
    assert A[2, 2] == pytest.approx(0.0)


@pytest.mark.parametrize("D", [3, 4])
def test_rotation_matrices_are_antisymmetric(D):
    for l in range(1, 4):
        A = L_action_on_T(1, 2, l, D)
        assert_allclose(A, -A.T, atol=1e-12)


def test_lifted_form_agrees_on_vectors():
    for h, k in [(1, 2), (1, 3), (2, 3)]:
        assert_allclose(L_action_on_T(h, k, 1, 3, form="lifted"), L_action_on_T(h, k, 1, 3), atol=1e-12)


@pytest.mark.parametrize("D, l", [(3, 2), (3, 3), (2, 3)])
def test_lifted_form_agrees_at_higher_degree(D, l):
    for h in range(1, D):
        for k in range(h + 1, D + 1):
            lifted = L_action_on_T(h, k, l, D, form="lifted")
            assert_allclose(lifted, L_action_on_T(h, k, l, D), atol=1e-10)


@pytest.mark.parametrize("D", [2, 3, 4, 5])
def test_casimir_eigenvalue_on_each_level(D):
    for l in range(4):
        C = casimir_on_level(l, D)
        assert_allclose(C, l * (l + D - 2) * np.eye(C.shape[0]), atol=1e-10)


def test_weight_vector_is_an_eigenvector():
    for l in range(1, 4):
        w = weight_vector(1, 2, l, 3)
        A = L_action_on_T(1, 2, l, 3)
        assert_allclose(A @ w, 1j * l * w, atol=1e-10)


@pytest.mark.parametrize("D", [2, 3, 4])
def test_multiplication_by_coordinate(D):
    points = sphere_points(32, D, seed=1)
    for l in range(3):
        for h in range(1, D + 1):
            assert t_multiplication_residual(h, l, D, points) < 1e-12


def test_raising_is_transpose_of_lowering():
    for l in range(3):
        up, _ = t_multiplication(2, l, 3)
        _, down = t_multiplication(2, l + 1, 3, up=False)
        assert_allclose(up, down.T, atol=1e-12)


def test_lowering_skipped_at_level_zero():
    up, down = t_multiplication(1, 0, 3)
    assert down is None
    assert up.shape == (3, 1)
    with pytest.raises(ConfigError):
        t_multiplication(4, 0, 3)


def test_eval_T_requires_unit_vector():
    assert eval_T(2, (1, 1), [1.0, 0.0, 0.0]) == pytest.approx(2 / 3)
    with pytest.raises(ConfigError):
        eval_T(1, (1,), [1.0, 1.0, 0.0])


def test_sphere_points_are_unit_and_seeded():
    a = sphere_points(16, 4, seed=3)
    b = sphere_points(16, 4, seed=3)
    assert a.shape == (16, 4)
    assert_allclose(np.linalg.norm(a, axis=1), 1.0)
    assert_allclose(a, b)


def test_harmonic_vector_equality_uses_the_functions():
    # T^(1,1) + T^(2,2) + T^(3,3) vanishes on the sphere
    zero = HarmonicVector(2, {(1, 1): 1.0, (2, 2): 1.0, (3, 3): 1.0})
    assert zero.equals(HarmonicVector(2, {}), 3)
    a = HarmonicVector(2, {(1, 2): 1.0})
    assert not a.equals(HarmonicVector(2, {(1, 3): 1.0}), 3)
    assert a.inner(a, 3).real > 0
    with pytest.raises(ConfigError):
        HarmonicVector(2, {(1,): 1.0})


def test_select_basis_picks_independent_indices():
    lv = select_basis(2, 3)
    assert lv.dim == 5
    assert (3, 3) not in lv.indices
    v = HarmonicVector(2, {(1, 2): 1.0})
    assert_allclose(v.frame_coords(3), lv.coords(v.tensor(3)))
