"""Tridiagonal solver against hand-worked and dense-elimination oracles."""
from __future__ import annotations

import numpy as np
import pytest

from poromoist.errors import DimensionMismatch, SingularMatrix, ZeroPivot
from poromoist.linalg import TridiagonalSystem, dense_solve, solve_thomas


def random_dominant_system(rng: np.random.Generator, n: int) -> TridiagonalSystem:
    lower = rng.uniform(-1.0, 1.0, n - 1)
    upper = rng.uniform(-1.0, 1.0, n - 1)
    diag = np.zeros(n)
    diag[:-1] += np.abs(upper)
    diag[1:] += np.abs(lower)
    diag += rng.uniform(0.5, 2.0, n)
    diag *= rng.choice([-1.0, 1.0], n)
    return TridiagonalSystem(lower, diag, upper, rng.uniform(-5.0, 5.0, n))


def test_hand_worked_three_by_three():
    # rows: 4x0 + x1 = 6; x0 + 5x1 + x2 = 14; 2x1 + 6x2 = 22
    system = TridiagonalSystem(
        lower=np.array([1.0, 2.0]),
        diag=np.array([4.0, 5.0, 6.0]),
        upper=np.array([1.0, 1.0]),
        rhs=np.array([6.0, 14.0, 22.0]),
    )
    np.testing.assert_allclose(solve_thomas(system), [1.0, 2.0, 3.0],
                               rtol=0, atol=1e-14)


def test_single_row():
    system = TridiagonalSystem(np.array([]), np.array([-2.0]), np.array([]),
                               np.array([5.0]))
    np.testing.assert_allclose(solve_thomas(system), [-2.5])


@pytest.mark.parametrize("n", [2, 3, 7, 16, 33, 64])
def test_matches_dense_elimination(n):
    rng = np.random.default_rng(1000 + n)
    for _ in range(20):
        system = random_dominant_system(rng, n)
        x = solve_thomas(system)
        y = dense_solve(system.dense(), system.rhs)
        assert np.max(np.abs(x - y)) < 1e-12


@pytest.mark.parametrize("n", [4, 31])
def test_residual_small(n):
    rng = np.random.default_rng(n)
    system = random_dominant_system(rng, n)
    x = solve_thomas(system)
    assert np.max(np.abs(system.residual(x))) < 1e-12


def test_dense_matches_structure():
    system = TridiagonalSystem(np.array([7.0]), np.array([1.0, 2.0]),
                               np.array([3.0]), np.array([0.0, 0.0]))
    np.testing.assert_array_equal(system.dense(),
                                  [[1.0, 3.0], [7.0, 2.0]])


def test_zero_pivot_first_row():
    system = TridiagonalSystem(np.array([1.0]), np.array([1e-18, 1.0]),
                               np.array([1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ZeroPivot) as exc:
        solve_thomas(system)
    assert exc.value.index == 0


def test_zero_pivot_after_elimination():
    # second pivot 1 - 1*1/1 = 0
    system = TridiagonalSystem(np.array([1.0]), np.array([1.0, 1.0]),
                               np.array([1.0]), np.array([1.0, 1.0]))
    with pytest.raises(ZeroPivot) as exc:
        solve_thomas(system)
    assert exc.value.index == 1


def test_singular_dense():
    with pytest.raises(SingularMatrix):
        dense_solve(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 2.0]))


def test_band_length_mismatch():
    with pytest.raises(DimensionMismatch):
        TridiagonalSystem(np.array([1.0, 2.0]), np.array([1.0, 1.0]),
                          np.array([1.0]), np.array([1.0, 1.0]))


def test_nonfinite_entries_rejected():
    with pytest.raises(DimensionMismatch):
        TridiagonalSystem(np.array([1.0]), np.array([np.nan, 1.0]),
                          np.array([1.0]), np.array([1.0, 1.0]))


def test_dense_solve_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        dense_solve(np.eye(3), np.array([1.0, 2.0]))
