import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest

from seplab.inner_rhp import (
    ExtractionFailed,
    LadderBlocked,
    extract_coeffs,
    inner_solution,
    lax_residual,
    normalized_minus_identity,
    ray_jump_check,
    ray_jump_matrix,
    schlesinger_step,
    sector_index,
    z0_eval,
    zm_eval,
)
from seplab.pii import b_entries, hamiltonian, hierarchy


def test_sector_index_boundaries():
    assert sector_index(1 + 1e-3j) == 0
    assert sector_index(1) == 0                 # ray resolved counterclockwise
    assert sector_index(cmath.exp(1j * math.pi / 3)) == 1
    assert sector_index(-1 - 1e-3j) == -3
    assert sector_index(-1j) == -2


def test_z0_normalization():
    zeta = 5 * cmath.exp(1j * math.pi / 6)
    Z = z0_eval(zeta, 0.0)
    N = Z @ np.diag([(-zeta) ** 0.5, (-zeta) ** -0.5])
    assert np.max(np.abs(N - np.eye(2))) <= 0.5


def test_z0_det_and_symmetry():
    Z = z0_eval(2 + 1j, 1.5)
    assert abs(np.linalg.det(Z) - 1) < 1e-10
    for zeta in (2 + 1j, -1.3 + 0.4j, 0.2 + 3j):
        assert np.max(np.abs(z0_eval(zeta.conjugate(), 0.7) - z0_eval(zeta, 0.7).conj())) < 1e-10


def test_schlesinger_examples():
    S1, S0 = schlesinger_step(hierarchy(0), 1.7, "up")
    assert np.allclose(S0, [[0, 1], [-1, 0]]) and np.allclose(S1, [[-1, 0], [0, 0]])
    with pytest.raises(LadderBlocked):
        schlesinger_step(hierarchy(1), 0.0, "up")
    e = hierarchy(1)
    S1, S0 = schlesinger_step(e, 2.0, "down")
    piv = float(e.Z(F(2)) / (3 * e.V(F(2))))
    assert np.allclose(S0, [[0, -1], [1, piv]])


def test_zm_examples():
    sol = inner_solution(0, 0.4)
    assert np.array_equal(zm_eval(sol, 1 + 2j), z0_eval(1 + 2j, 0.4))
    sol = inner_solution(1, 3.0)
    d4 = np.max(np.abs(normalized_minus_identity(sol, 4 * cmath.exp(1j * math.pi / 6))))
    d8 = np.max(np.abs(normalized_minus_identity(sol, 8 * cmath.exp(1j * math.pi / 6))))
    assert d4 < 0.5 and d8 < 0.75 * d4
    Z = zm_eval(inner_solution(2, 1.0), 3j)
    assert abs(np.linalg.det(Z) - 1) < 2e-9


def test_ladder_blocked_at_pole():
    with pytest.raises(LadderBlocked):
        inner_solution(2, 0.0)


def test_extract_m0():
    ex = extract_coeffs(inner_solution(0, 2.0))
    assert abs(ex.A[0, 1] - 1) < 1e-6
    assert abs(ex.A[0, 0] + 1 / 3) < 1e-6
    assert ex.fitResidual < 1e-8


def test_extract_m2():
    ex = extract_coeffs(inner_solution(2, 1.0))
    assert abs(ex.A[0, 1] - 7 / 36) < 1e-5
    assert abs(ex.A[1, 0] + 6) < 1e-5
    H = float(hamiltonian(2)(F(1)))
    assert abs(ex.A[0, 0] + 2 * H) < 1e-5 and abs(ex.A[1, 1] - 2 * H) < 1e-5
    B12, B21 = b_entries(2)
    assert abs(ex.B[0, 1] - float(B12(F(1)))) < 1e-4
    assert abs(ex.B[1, 0] - float(B21(F(1)))) < 1e-4


def test_extract_requires_sector_balanced_samples():
    with pytest.raises(ValueError):
        extract_coeffs(inner_solution(0, 1.0), samples=50)


def test_extract_fails_loudly_on_bad_fit():
    with pytest.raises(ExtractionFailed):
        extract_coeffs(inner_solution(3, -2.0), radius=8.0, samples=24, terms=3)


@pytest.mark.parametrize("m,y,ray", [(0, 0.0, 0), (1, 2.0, 3), (-1, 0.5, 1), (2, 1.0, 5)])
def test_ray_jump_constant(m, y, ray):
    sol = inner_solution(m, y)
    assert ray_jump_check(sol, ray) <= 1e-8
    J = ray_jump_matrix(sol, ray, 1.5)
    assert abs(np.linalg.det(J) - 1) <= 1e-8


def test_lax_examples():
    r3 = lax_residual(0.0, 2 + 1j, 1e-3)
    r4 = lax_residual(0.0, 2 + 1j, 1e-4)
    assert r4.ry <= 1e-6 and r4.rzeta <= 1e-6
    assert 80 < r3.ry / r4.ry < 120
    assert 80 < r3.rzeta / r4.rzeta < 120
    with pytest.raises(ValueError):
        lax_residual(0.0, 2 + 1j, 1e-2)
