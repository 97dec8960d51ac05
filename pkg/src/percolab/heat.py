"""Heat kernels ``exp(tA)`` of reversible generators and their matrix entropy.

``A`` ranges over symmetric matrices with nonnegative off-diagonal entries
and zero row sums.  The probe raises one off-diagonal pair, lowers the
diagonal to keep the row sums, and checks whether ``H(exp(tA))`` drops.
Candidate drops are recomputed in extended precision before being reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from percolab._rng import generator

STREAM_PROBE = 0x4EA7
GEN_TOL = 1e-12
STOCHASTIC_TOL = 1e-10
CLAMP_TOL = 1e-12


def check_generator(A, tol=GEN_TOL):
    """Raise ``ValueError`` unless ``A`` is symmetric with nonnegative
    off-diagonal entries and zero row sums."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("generator must be square")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if not np.allclose(A, A.T, atol=tol * scale, rtol=0):
        raise ValueError("generator must be symmetric")
    off = A - np.diag(np.diag(A))
    if off.min(initial=0.0) < -tol * scale:
        raise ValueError("off-diagonal entries must be nonnegative")
    if np.abs(A.sum(axis=1)).max(initial=0.0) > tol * scale * A.shape[0]:
        raise ValueError("rows must sum to zero")
    return A


def generator_from_rates(C):
    """Generator with off-diagonal rates ``C`` (symmetrised) and compensating diagonal."""
    C = np.asarray(C, dtype=float)
    C = (C + C.T) / 2
    np.fill_diagonal(C, 0.0)
    return C - np.diag(C.sum(axis=1))


def heat_kernel(A, t):
    """``exp(tA)`` by symmetric eigendecomposition; tiny negative entries are clamped."""
    A = check_generator(A)
    t = float(t)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return np.eye(len(A))
    w, V = np.linalg.eigh(A)
    B = (V * np.exp(t * w)) @ V.T
    B = (B + B.T) / 2
    if B.min() < -1e-9:
        raise ArithmeticError(f"heat kernel entry {B.min():.3g} is too negative to clamp")
    B[B < 0] = 0.0
    return B


def matrix_entropy(B):
    """``sum -b log b`` over all entries, with ``0 log 0 = 0``."""
    B = np.asarray(B, dtype=float)
    if B.min(initial=0.0) < -CLAMP_TOL:
        raise ValueError("matrix has a negative entry")
    b = B[B > 0]
    return float(-np.sum(b * np.log(b)))


def heat_entropy(A, t):
    return matrix_entropy(heat_kernel(A, t))


def heat_entropy_mp(A, t, dps=50):
    """``H(exp(tA))`` in ``dps``-digit arithmetic (mpmath eigensolver)."""
    with mpmath.workdps(dps):
        M = mpmath.matrix(np.asarray(A, dtype=float).tolist()) * mpmath.mpf(t)
        E, Q = mpmath.eigsy(M)
        n = M.rows
        total = mpmath.mpf(0)
        for i in range(n):
            for j in range(n):
                b = mpmath.fsum(Q[i, k] * mpmath.exp(E[k]) * Q[j, k] for k in range(n))
                if b > 0:
                    total -= b * mpmath.log(b)
        return total


def binary_entropy(x):
    return 0.0 if x in (0.0, 1.0) else -x * math.log(x) - (1 - x) * math.log(1 - x)


def two_state_entropy(a, t):
    """Closed form of ``H(exp(tA))`` for ``A = [[-a, a], [a, -a]]``."""
    return 2 * binary_entropy((1 - math.exp(-2 * a * t)) / 2)


def bump(A, i, j, step):
    """``A`` with ``step`` added at ``(i, j)`` and ``(j, i)`` and removed from the diagonal."""
    A2 = np.array(A, dtype=float)
    A2[i, j] += step
    A2[j, i] += step
    A2[i, i] -= step
    A2[j, j] -= step
    return A2


def random_generator(n, rng, density=1.0, scale=1.0):
    """Random element of the cone: exponential rates, each pair present with ``density``."""
    C = rng.exponential(scale, size=(n, n))
    C = np.triu(C, 1)
    if density < 1:
        C *= np.triu(rng.random((n, n)) < density, 1)
    return generator_from_rates(C + C.T)


@dataclass(frozen=True)
class Violation:
    """A re-verified decrease: both entropies in extended precision."""

    trial: int
    t: float
    pair: tuple
    A: np.ndarray
    h_before: str
    h_after: str

    def certificate(self):
        rows = "\n".join(" ".join(f"{x:.17g}" for x in row) for row in self.A)
        return (f"trial {self.trial} t {self.t!r} pair {self.pair[0]} {self.pair[1]}\n"
                f"H_before {self.h_before}\nH_after {self.h_after}\nA\n{rows}\n")


@dataclass(frozen=True)
class EntropyReport:
    """Probe outcome.

    ``rows`` holds ``(trial, t, i, j, dH)`` for every probe; ``candidates``
    counts double-precision drops beyond the tolerance and ``violations``
    those confirmed in extended precision.
    """

    n: int
    t_grid: tuple
    step: float
    trials: int
    rows: list = field(repr=False)
    candidates: int
    violations: tuple
    min_dH: float
    h_monotone_in_t_failures: int


def monotonicity_probe(n, trials, t_grid, step, seed, tol=1e-8, dps=40, density=1.0):
    """Search random generators for a drop of ``H(exp(tA))`` when one
    off-diagonal pair is increased.

    Trial ``k`` draws ``A`` and the pair ``(i, j)`` from stream ``(seed, k)``.
    Drops larger than ``tol`` in double precision are recomputed with ``dps``
    digits and reported only if the drop persists there.  The report also
    counts trials where ``H`` failed to grow along ``t_grid`` (informational).
    """
    n = int(n)
    if n < 2 or n > 8:
        raise ValueError("n must lie in 2..8")
    step = float(step)
    if step < 0:
        raise ValueError("step must be nonnegative")
    t_grid = tuple(float(t) for t in t_grid)
    rows = []
    candidates = 0
    violations = []
    min_dH = math.inf
    t_fail = 0
    for k in range(int(trials)):
        rng = generator(seed, STREAM_PROBE, k)
        A = random_generator(n, rng, density)
        i, j = sorted(rng.choice(n, size=2, replace=False).tolist())
        A2 = bump(A, i, j, step)
        prev = -math.inf
        for t in t_grid:
            h0 = heat_entropy(A, t)
            h1 = heat_entropy(A2, t)
            dH = h1 - h0
            rows.append((k, t, i, j, dH))
            min_dH = min(min_dH, dH)
            if h0 < prev - tol:
                t_fail += 1
            prev = h0
            if dH < -tol:
                candidates += 1
                m0 = heat_entropy_mp(A, t, dps)
                m1 = heat_entropy_mp(A2, t, dps)
                if m1 < m0:
                    violations.append(Violation(k, t, (i, j), A, mpmath.nstr(m0, dps),
                                                mpmath.nstr(m1, dps)))
    return EntropyReport(n, t_grid, step, int(trials), rows, candidates, tuple(violations),
                         min_dH, t_fail)
