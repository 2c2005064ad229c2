import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsk.errors import ConfigError, TensorBudgetError
from fsk.tensors import (
    braid_checks,
    build_projector,
    check_budget,
    embed_at,
    factor_M,
    max_tensor_bytes,
    nondecreasing_indices,
    numerical_rank,
    partial_trace_last,
    partial_trace_ratio,
    permutator,
    projector_checks,
    projector_dimension,
    rank_index,
    sym_antisym_projectors,
    trace_projector,
    unrank_index,
)


def test_projector_dimension_values():
    assert projector_dimension(0, 3) == 1
    assert projector_dimension(1, 3) == 3
    assert projector_dimension(2, 3) == 5
    assert projector_dimension(3, 4) == 16
    assert projector_dimension(5, 2) == 2
    for l in range(6):
        assert projector_dimension(l, 3) == 2 * l + 1


def test_rank_and_unrank_are_inverse():
    assert rank_index((1, 1), 3) == 0
    assert rank_index((2, 3), 3) == 5
    assert unrank_index(5, 2, 3) == (2, 3)
    with pytest.raises(ConfigError):
        rank_index((4,), 3)


def test_nondecreasing_indices_count_matches_symmetric_dimension():
    assert len(nondecreasing_indices(2, 3)) == 6
    assert nondecreasing_indices(2, 2) == [(1, 1), (1, 2), (2, 2)]


def test_low_order_projectors():
    assert_allclose(build_projector(0, 3).entries, [[1.0]])
    assert_allclose(build_projector(1, 4).entries, np.eye(4))


def test_order_two_projector_entries():
    P = build_projector(2, 3)
    assert P.entry((1, 1), (1, 1)) == pytest.approx(2 / 3)
    assert P.entry((1, 2), (2, 1)) == pytest.approx(0.5)
    assert P.entry((1, 1), (2, 2)) == pytest.approx(-1 / 3)
    assert not P.entries.flags.writeable


@pytest.mark.parametrize("D", [2, 3, 4, 5])
def test_projector_suite_identities(D):
    for l in range(5):
        checks = projector_checks(l, D)
        for name, value in checks.items():
            assert value <= 1e-12, f"{name} = {value} for l={l}, D={D}"
        assert numerical_rank(build_projector(l, D)) == projector_dimension(l, D)


@pytest.mark.parametrize("D", [2, 3, 4])
def test_braid_identities(D):
    for name, value in braid_checks(D).items():
        assert value <= 1e-12, name


def test_partial_trace_gives_lower_projector():
    D, l = 3, 2
    reduced = partial_trace_last(build_projector(l + 1, D))
    assert_allclose(reduced, partial_trace_ratio(l, D) * build_projector(l, D).entries, atol=1e-12)


def test_order_two_building_blocks():
    P = permutator(3).entries
    assert_allclose(P @ P, np.eye(9))
    Pt = trace_projector(3).entries
    assert_allclose(Pt @ Pt, Pt, atol=1e-15)


def test_factor_M_requires_positive_order():
    with pytest.raises(ConfigError):
        factor_M(0, 3)


def test_invalid_dimension_rejected():
    with pytest.raises(ConfigError):
        build_projector(2, 1)


def test_tensor_budget_from_environment(monkeypatch, fresh_caches):
    monkeypatch.setenv("FSK_MAX_TENSOR_BYTES", "1000")
    assert max_tensor_bytes() == 1000
    with pytest.raises(TensorBudgetError) as exc:
        build_projector(2, 7)
    assert exc.value.required_bytes == 8 * 49 * 49
    assert exc.value.exit_code == 3
    assert "FSK_MAX_TENSOR_BYTES" in str(exc.value)


def test_malformed_budget_is_a_config_error(monkeypatch):
    monkeypatch.setenv("FSK_MAX_TENSOR_BYTES", "lots")
    with pytest.raises(ConfigError):
        check_budget(10, "anything")


def test_symmetric_and_antisymmetric_split():
    S, A = sym_antisym_projectors(3)
    assert_allclose(S.entries + A.entries, np.eye(9))
    assert_allclose(S.entries @ A.entries, np.zeros((9, 9)), atol=1e-15)
    assert round(np.trace(S.entries)) == 6
    assert round(np.trace(A.entries)) == 3


def test_embed_at_places_operator_on_slots():
    P = permutator(2)
    first = embed_at(P, 1, 3)
    second = embed_at(P, 2, 3)
    assert first.entries.shape == (8, 8)
    # swapping slots 1,2 sends e1 e2 e1 to e2 e1 e1
    src = rank_index((1, 2, 1), 2)
    assert first.entries[rank_index((2, 1, 1), 2), src] == 1.0
    assert second.entries[rank_index((1, 1, 2), 2), src] == 1.0
    with pytest.raises(ConfigError):
        embed_at(P, 3, 3)
