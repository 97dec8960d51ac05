import math

import numpy as np
import pytest
from scipy.linalg import expm

from percolab.heat import (
    binary_entropy,
    bump,
    check_generator,
    generator_from_rates,
    heat_entropy,
    heat_entropy_mp,
    heat_kernel,
    matrix_entropy,
    monotonicity_probe,
    random_generator,
    two_state_entropy,
)


def gen(n, seed):
    return random_generator(n, np.random.default_rng(seed))


@pytest.mark.parametrize("n", [2, 4, 7])
def test_kernel_matches_expm(n):
    A = gen(n, n)
    for t in (0.0, 0.1, 1.0, 5.0):
        B = heat_kernel(A, t)
        assert np.allclose(B, expm(t * A), atol=1e-12)
        assert np.allclose(B.sum(axis=1), 1) and np.allclose(B, B.T)


def test_two_state_closed_form():
    for a in (0.1, 1.0, 3.0):
        A = np.array([[-a, a], [a, -a]])
        for t in (0.05, 0.5, 2.0):
            assert heat_entropy(A, t) == pytest.approx(two_state_entropy(a, t), abs=1e-12)
    assert two_state_entropy(1.0, 50.0) == pytest.approx(2 * math.log(2))


def test_entropy_limits():
    A = gen(5, 0)
    assert heat_entropy(A, 0) == 0
    # long times approach the uniform matrix, entropy n log n
    assert heat_entropy(A, 200) == pytest.approx(5 * math.log(5), abs=1e-9)
    assert binary_entropy(0.0) == 0 and binary_entropy(0.5) == pytest.approx(math.log(2))


def test_extended_precision_agrees():
    A = gen(4, 3)
    assert float(heat_entropy_mp(A, 0.7, dps=30)) == pytest.approx(heat_entropy(A, 0.7),
                                                                    abs=1e-12)


def test_generator_validation():
    with pytest.raises(ValueError):
        check_generator(np.array([[-1.0, 1.0], [0.5, -0.5]]))
    with pytest.raises(ValueError):
        check_generator(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    with pytest.raises(ValueError):
        check_generator(np.array([[-1.0, 0.5], [0.5, -1.0]]))
    with pytest.raises(ValueError):
        heat_kernel(gen(3, 0), -1)
    with pytest.raises(ValueError):
        matrix_entropy(np.array([[-0.1, 1.1]]))


def test_bump_stays_in_the_cone():
    A = gen(5, 1)
    B = bump(A, 1, 3, 0.4)
    check_generator(B)
    assert B[1, 3] == pytest.approx(A[1, 3] + 0.4)


def test_generator_from_rates():
    A = generator_from_rates([[0, 2], [0, 0]])
    assert np.array_equal(A, [[-1, 1], [1, -1]])


def test_sparse_generators():
    A = random_generator(6, np.random.default_rng(2), density=0.3)
    check_generator(A)


def test_probe_two_states_finds_nothing():
    rep = monotonicity_probe(2, 200, (0.1, 1.0, 4.0), 0.05, 0)
    assert rep.candidates == 0 and not rep.violations
    assert rep.min_dH > -1e-12 and len(rep.rows) == 600
    assert rep.h_monotone_in_t_failures == 0


def test_probe_is_deterministic():
    a = monotonicity_probe(4, 30, (0.5,), 0.1, 7)
    b = monotonicity_probe(4, 30, (0.5,), 0.1, 7)
    assert a.rows == b.rows


def test_probe_rejects_bad_arguments():
    with pytest.raises(ValueError):
        monotonicity_probe(9, 1, (1.0,), 0.1, 0)
    with pytest.raises(ValueError):
        monotonicity_probe(3, 1, (1.0,), -0.1, 0)


def test_tolerance_sends_candidates_to_extended_precision():
    # a negative tolerance makes every probe a candidate; none survive re-verification
    rep = monotonicity_probe(3, 5, (0.5,), 0.1, 1, tol=-1.0, dps=25)
    assert rep.candidates == 5 and not rep.violations


def test_entropy_spot_values():
    assert matrix_entropy(np.eye(4)) == 0
    assert matrix_entropy(np.full((5, 5), 0.2)) == pytest.approx(5 * math.log(5))
    a, t = 0.7, 0.3
    B = heat_kernel(np.array([[-a, a], [a, -a]]), t)
    off = (1 - math.exp(-2 * a * t)) / 2
    assert np.allclose(B, [[1 - off, off], [off, 1 - off]], atol=1e-14)


def test_zero_step_gives_zero_difference():
    rep = monotonicity_probe(5, 10, (0.1, 1.0), 0.0, 3)
    assert all(row[4] == 0 for row in rep.rows)
