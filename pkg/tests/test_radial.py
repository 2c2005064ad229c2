import math

import numpy as np
import pytest

from fsk.errors import ConfigError
from fsk.radial import (
    RADIAL_HEADER,
    b_coefficient,
    check_radial,
    closed_form_energy,
    cutoff_check,
    eigenfunction,
    numeric_shell_centre,
    ode_oracle,
    overlap,
    radial_table,
    shell_centre,
    shell_centre_tolerance,
    spectrum_gap,
    v0_exact,
    v0_expansion,
)


def _sign_changes(values: np.ndarray) -> int:
    s = np.sign(values[np.abs(values) > 1e-12 * np.max(np.abs(values))])
    return int(np.sum(s[1:] != s[:-1]))


def test_centrifugal_coefficient():
    assert b_coefficient(0, 3) == 0.0
    assert b_coefficient(1, 3) == 2.0
    assert b_coefficient(0, 2) == -0.25
    assert b_coefficient(0, 4) == 0.75
    with pytest.raises(ConfigError):
        b_coefficient(-1, 3)


def test_ground_energy_is_zero():
    for D in (2, 3, 4):
        for k in (36.0, 1e4):
            assert closed_form_energy(0, 0, k, D)[0] == pytest.approx(0.0, abs=1e-9)


def test_leading_order_energies():
    assert closed_form_energy(1, 0, 1e4, 3)[1] == pytest.approx(2 * math.sqrt(2e4))
    assert closed_form_energy(0, 2, 1e4, 3)[1] == 6.0
    # the frozen levels approach l(l + D - 2)
    assert closed_form_energy(0, 2, 1e8, 3)[0] == pytest.approx(6.0, abs=1e-3)
    with pytest.raises(ConfigError):
        closed_form_energy(-1, 0, 1e4, 3)
    with pytest.raises(ConfigError):
        closed_form_energy(0, 0, 0.0, 3)


def test_cutoff_condition():
    ok, margin = cutoff_check(2, 36.0, 3)
    assert ok
    assert margin == pytest.approx(2 * math.sqrt(72) - 6)
    ok, margin = cutoff_check(5, 1.0, 3)
    assert not ok
    assert margin < 0


def test_spectrum_gap_at_default_stiffness():
    ok, frozen, excited, threshold = spectrum_gap(2, 36.0, 3)
    assert ok
    assert frozen < threshold < excited
    _, margin = cutoff_check(2, 36.0, 3)
    assert threshold == pytest.approx(2 * 3 + margin / 2)


def test_v0_expansion_is_close():
    for D in (2, 3, 4):
        b0 = b_coefficient(0, D)
        for k in (1e3, 1e4):
            assert abs(v0_exact(k, D) - v0_expansion(k, D)) <= (1 + b0 ** 2) / k


def test_shell_centre_expansion():
    for l in range(4):
        b = b_coefficient(l, 3)
        k = 1e4
        assert abs(shell_centre(l, k, 3) - (1 + b / (2 * k))) <= b ** 2 / k ** 2 + 1e-15


@pytest.mark.parametrize("n", [0, 1, 2])
def test_profile_nodes(n):
    level = eigenfunction(n, 1, 1e4, 3)
    assert _sign_changes(level.profile) == n
    assert level.E_closed == closed_form_energy(n, 1, 1e4, 3)[0]


def test_profiles_are_orthonormal():
    f0 = eigenfunction(0, 2, 1e4, 4)
    f1 = eigenfunction(1, 2, 1e4, 4)
    assert overlap(f0, f0) == pytest.approx(1.0, abs=1e-8)
    assert abs(overlap(f0, f1)) < 1e-8
    with pytest.raises(ConfigError):
        overlap(f0, eigenfunction(0, 1, 1e4, 4))


def test_profile_grid_minimum():
    with pytest.raises(ConfigError):
        eigenfunction(0, 0, 1e4, 3, points=100)


def test_oracle_level_spacing():
    E = ode_oracle(0, 1e4, 3, 2)
    assert E[0] == pytest.approx(0.0, abs=1e-2)
    assert E[1] - E[0] == pytest.approx(2 * math.sqrt(2e4), rel=1e-3)


@pytest.mark.parametrize("kwargs", [dict(k=100.0), dict(points=5000), dict(count=0)])
def test_oracle_rejects_bad_parameters(kwargs):
    args = dict(l=0, k=1e4, D=3, count=1)
    args.update(kwargs)
    with pytest.raises(ConfigError):
        ode_oracle(**args)


def test_oracle_agrees_with_closed_form():
    rows = radial_table(4, [0, 1, 2, 3], 1e4, 3)
    assert len(rows) == 12
    assert max(r.rel_err for r in rows) <= 0.05
    assert RADIAL_HEADER[-1] == "rel_err"


def test_frozen_excitations_approach_casimir():
    errors = []
    for k in (1e3, 1e4, 1e5):
        E0 = ode_oracle(0, k, 3, 1)[0]
        E1 = ode_oracle(1, k, 3, 1)[0]
        errors.append(abs((E1 - E0) - 2.0))
    assert errors[0] > errors[1] > errors[2]


def test_numeric_shell_centre():
    k = 1e4
    for l in (0, 2):
        target = 1 + b_coefficient(l, 3) / (2 * k)
        assert abs(numeric_shell_centre(l, k, 3) - target) <= shell_centre_tolerance(l, k, 3)


def test_shell_centre_tolerance_scales_with_b():
    k = 1e4
    for l in (0, 2):
        expected = 10 * (1 + abs(b_coefficient(l, 3))) * k ** -1.5
        assert shell_centre_tolerance(l, k, 3) == pytest.approx(expected)
    # looser than b^2/k^2, which the closed form alone meets
    assert shell_centre_tolerance(0, k, 3) > b_coefficient(0, 3) ** 2 / k ** 2


def test_radial_suite_passes():
    report = check_radial(3, 2, 36.0)
    assert report.passed, report.failures()
    assert report.info["max_rel_err"] <= 0.05
