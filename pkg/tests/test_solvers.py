import numpy as np
import pytest

from qbdsolve.core import q_apply, validate_problem
from qbdsolve.errors import (
    CertificateFailure,
    MaxIterations,
    NotZMatrix,
    OracleCapExceeded,
    ParameterOutOfRange,
)
from qbdsolve.problems import (
    make_delta_example,
    make_scalar_problem,
    random_problem,
    scalar_minimal_root,
)
from qbdsolve.solvers import (
    SolverOptions,
    fixed_point_solve,
    mmatrix_certificate,
    newton_shamanskii_solve,
    newton_solve,
    solve,
    structured_certificate,
    zmatrix_certificate,
)
from qbdsolve.sylvester import build_step_context

SLACK = 1e-12
SOLVERS = [fixed_point_solve, newton_solve, newton_shamanskii_solve]


def assert_monotone_chain(p, iterates, S):
    for prev, cur in zip(iterates, iterates[1:]):
        assert (cur >= prev - SLACK).all()
    for X in iterates:
        assert (X <= S + SLACK).all()
        assert (q_apply(p, X) >= -SLACK).all()


# -- options ----------------------------------------------------------------

def test_options_validation():
    with pytest.raises(ParameterOutOfRange):
        SolverOptions(tol=0.0)
    with pytest.raises(ParameterOutOfRange):
        SolverOptions(m=0)


# -- scalar cases -----------------------------------------------------------

@pytest.mark.parametrize("solver", SOLVERS)
def test_scalar_positive_recurrent(solver):
    p = make_scalar_problem(0.2, 0.5)
    X, rep = solver(p, SolverOptions(keep_iterates=True))
    assert abs(X[0, 0] - 1.0) <= 1e-12
    assert rep.converged and rep.monotone_ok
    assert_monotone_chain(p, rep.iterates, X)


@pytest.mark.parametrize("solver", SOLVERS)
def test_scalar_transient_converges_to_minimal_root(solver):
    p = make_scalar_problem(0.5, 0.2)
    X, _ = solver(p)
    assert abs(X[0, 0] - 0.4) <= 1e-12


def test_scalar_linear_case_one_newton_step():
    p = make_scalar_problem(0.0, 1.0)
    X, rep = newton_solve(p)
    assert X[0, 0] == 1.0
    assert rep.outer_steps == 1 and rep.inner_steps == 1
    assert q_apply(p, X)[0, 0] == 0.0


@pytest.mark.parametrize("solver", SOLVERS)
def test_zero_C_solution_found_immediately(solver):
    p = validate_problem([[0.5]], [[-0.5]], [[0.0]])
    X, rep = solver(p)
    assert X[0, 0] == 0.0 and rep.inner_steps == 0 and rep.converged


def test_scalar_closed_form_sweep(rng):
    # near a == c the root is nearly double and the fixed-point rate nears 1,
    # so its error is about NRes / |a - c|: stop tighter than the default
    opts = SolverOptions(tol=1e-15, max_outer=2000)
    for _ in range(20):
        a, c = rng.dirichlet([1, 1, 1])[:2]
        p = make_scalar_problem(a, c)
        expected = scalar_minimal_root(a, c)
        for solver in SOLVERS:
            X, _ = solver(p, opts)
            assert abs(X[0, 0] - expected) <= 1e-12


# -- delta example ----------------------------------------------------------

def test_newton_delta_20():
    p = make_delta_example(20, 0.5)
    S, rep = newton_solve(p)
    assert rep.outer_steps == 5 and rep.inner_steps == 5
    assert rep.nres <= 1e-13
    assert rep.mmatrix_ok and rep.monotone_ok


def test_shamanskii_delta_20():
    p = make_delta_example(20, 0.5)
    _, rep = newton_shamanskii_solve(p, SolverOptions(m=2))
    assert rep.outer_steps == 3
    assert rep.nres <= 1e-13


def test_fixed_point_agrees_with_newton():
    p = make_delta_example(20, 0.5)
    S_fp, _ = fixed_point_solve(p)
    S_nt, _ = newton_solve(p)
    assert np.abs(S_fp - S_nt).max() <= 1e-10


@pytest.mark.parametrize("delta", [0.5, 0.1, 1e-3])
def test_m1_identical_to_newton(delta):
    p = make_delta_example(12, delta)
    X1, r1 = newton_solve(p)
    X2, r2 = newton_shamanskii_solve(p, SolverOptions(m=1))
    assert np.array_equal(X1, X2)
    assert r1 == r2


def test_residual_history_recorded_every_update():
    p = make_delta_example(10, 0.1)
    _, rep = newton_shamanskii_solve(p, SolverOptions(m=3))
    assert [k for k, _ in rep.residual_history] == list(range(rep.inner_steps + 1))
    assert rep.inner_steps <= 3 * rep.outer_steps


def test_dispatch_by_name():
    p = make_delta_example(5, 0.5)
    X, _ = solve(p, "newton")
    Y, _ = newton_solve(p)
    assert np.array_equal(X, Y)
    with pytest.raises(ParameterOutOfRange):
        solve(p, "bisection")


# -- invariants on random problems -----------------------------------------

@pytest.mark.parametrize("seed", range(8))
def test_monotone_and_agreement_random(seed):
    n = 1 + seed * 2
    p = random_problem(n, seed, rho_target=0.3 + 0.08 * seed)
    opts = SolverOptions(keep_iterates=True, m=3)
    S, _ = newton_solve(p, opts)
    S_ns, rep_ns = newton_shamanskii_solve(p, opts)
    S_fp, rep_fp = fixed_point_solve(p, opts)
    assert_monotone_chain(p, rep_ns.iterates, S)
    assert_monotone_chain(p, rep_fp.iterates, S)
    assert np.abs(S - S_ns).max() <= 1e-9
    # minimality: the fixed-point iteration from 0 tends to the minimal root
    assert np.abs(S - S_fp).max() <= 1e-9
    assert np.abs(S.sum(axis=1) - 1).max() <= 1e-9


def test_max_iterations_carries_report():
    p = make_delta_example(10, 1e-3)
    with pytest.raises(MaxIterations) as exc:
        newton_solve(p, SolverOptions(max_outer=3))
    assert exc.value.report.outer_steps == 3
    with pytest.raises(MaxIterations):
        fixed_point_solve(p, SolverOptions(max_outer=1))


def test_bad_initial_guess_is_rejected():
    p = make_delta_example(4, 0.5)
    with pytest.raises(CertificateFailure):
        newton_solve(p, SolverOptions(X0=-np.ones((4, 4))))
    S, _ = newton_solve(p)
    # beyond the minimal solution Q(X0) < 0
    with pytest.raises(CertificateFailure):
        newton_solve(p, SolverOptions(X0=S + 0.5))


def test_checks_can_be_disabled():
    p = make_delta_example(4, 0.5)
    S, _ = newton_solve(p)
    X, rep = newton_solve(p, SolverOptions(X0=S.copy(), check_mmatrix=False))
    assert rep.outer_steps == 0 and np.array_equal(X, S)


# -- certificates ------------------------------------------------------------

def test_certificate_scalar_at_zero():
    p = validate_problem([[0.0]], [[-1.0]], [[1.0]])
    cert = mmatrix_certificate(p, np.zeros((1, 1)))
    assert cert and np.array_equal(cert.v, [1.0])


def test_certificate_synthetic_failure():
    cert = zmatrix_certificate([[1.0, -2.0], [-2.0, 1.0]])
    assert not cert
    np.testing.assert_allclose(cert.v, [-1.0, -1.0], rtol=0, atol=1e-15)


def test_certificate_not_z_matrix():
    with pytest.raises(NotZMatrix):
        zmatrix_certificate([[1.0, 0.5], [-1.0, 1.0]])


def test_certificate_at_solution():
    p = make_delta_example(5, 0.5)
    S, _ = newton_solve(p)
    assert mmatrix_certificate(p, S)
    assert mmatrix_certificate(p, np.zeros((5, 5)))


def test_structured_certificate_agrees_with_kronecker():
    p = random_problem(6, 4, rho_target=0.8)
    S, _ = newton_solve(p)
    for X in (np.zeros((6, 6)), 0.5 * S, S):
        k = mmatrix_certificate(p, X)
        s = structured_certificate(build_step_context(p, X))
        assert bool(k) == bool(s)
        np.testing.assert_allclose(s.v, k.v, rtol=1e-10)


def test_certificate_cap():
    p = make_delta_example(41, 0.5)
    with pytest.raises(OracleCapExceeded):
        mmatrix_certificate(p, np.zeros((41, 41)))
