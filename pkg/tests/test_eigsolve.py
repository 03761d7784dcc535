import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from robinbilap.eigsolve import (PencilKind, PencilProblem, bisection_eigenvalues, inertia_count,
                                 solve, solve_gevp)
from robinbilap.errors import IndefiniteOnKernel, NotSPD


def pencil(seed, n):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, n))
    Y = r.standard_normal((n, n))
    return 0.5 * (X + X.T), Y @ Y.T + n * np.eye(n)


@given(st.integers(0, 2**31), st.integers(1, 50))
def test_matches_scipy_and_orthonormal(seed, n):
    A, B = pencil(seed, n)
    sp = solve_gevp(PencilProblem(A, B))
    ref = scipy.linalg.eigh(A, B, eigvals_only=True)
    scale = max(1.0, np.abs(ref).max())
    assert np.max(np.abs(sp.eigenvalues - ref)) <= 1e-10 * scale
    V = sp.eigenvectors
    assert np.max(np.abs(V.T @ B @ V - np.eye(n))) <= 1e-9
    assert np.all(np.diff(sp.eigenvalues) >= 0)


@given(st.integers(0, 2**31), st.integers(2, 12))
def test_bisection_oracle(seed, n):
    A, B = pencil(seed, n)
    ev = solve_gevp(PencilProblem(A, B, want_vectors=False)).eigenvalues
    assert np.allclose(bisection_eigenvalues(A, B), ev, rtol=0, atol=1e-10 * max(1, np.abs(ev).max()))
    mid = 0.5 * (ev[0] + ev[-1])
    assert inertia_count(A, B, mid) == int(np.sum(ev < mid))


def test_k_wanted_and_residuals():
    A, B = pencil(7, 30)
    sp = solve_gevp(PencilProblem(A, B, k_wanted=5))
    assert len(sp.eigenvalues) == 5
    sp.check_invariants(A, B)


def test_not_spd():
    A, B = pencil(3, 4)
    with pytest.raises(NotSPD):
        solve_gevp(PencilProblem(A, -B))


def test_semidefinite_rhs():
    # rank-one B: the single finite eigenvalue is the Schur-complement quotient
    A = np.diag([2.0, 3.0, 5.0])
    b = np.array([1.0, 1.0, 0.0])
    sp = solve(PencilProblem(A, np.outer(b, b), kind=PencilKind.SEMIDEFINITE_RHS))
    assert len(sp.eigenvalues) == 1
    assert sp.eigenvalues[0] == pytest.approx(1.0 / (1 / 2 + 1 / 3), rel=1e-12)


def test_indefinite_on_kernel():
    A = np.diag([1.0, -1.0])
    B = np.diag([1.0, 0.0])
    with pytest.raises(IndefiniteOnKernel):
        solve(PencilProblem(A, B, kind=PencilKind.SEMIDEFINITE_RHS))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        PencilProblem(np.eye(2), np.eye(3))
