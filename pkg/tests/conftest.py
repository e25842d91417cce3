import numpy as np
import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker
        ok = report.outcome == "passed"
        prev = _criteria.get(number)
        _criteria[number] = (title, ok if prev is None else prev[1] and ok)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        rep.criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def inf_norm(M):
    M = np.atleast_2d(M)
    return np.abs(M).sum(axis=1).max()


def power_iteration_stationary(P, iters=20000):
    """Independent oracle: iterate p <- p P from the uniform vector, with
    lazy mixing to avoid periodicity."""
    n = P.shape[0]
    lazy = 0.5 * (P + np.eye(n))
    p = np.full(n, 1.0 / n)
    for _ in range(iters):
        nxt = p @ lazy
        if np.abs(nxt - p).max() < 1e-17:
            break
        p = nxt
    return p / p.sum()


def charpoly_roots(A, iters=500):
    """Independent eigenvalue oracle for small n: characteristic polynomial by
    Faddeev-LeVerrier, roots by Durand-Kerner, polished by Newton steps."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]          # monic, highest degree first
    Mk = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + coeffs[-1] * I
        coeffs.append(-np.trace(A @ Mk) / k)
    c = np.array(coeffs, dtype=complex)

    def poly(z):
        v = 0j
        for ci in c:
            v = v * z + ci
        return v

    def dpoly(z):
        v = 0j
        for i, ci in enumerate(c[:-1]):
            v = v * z + ci * (n - i)
        return v

    radius = 1 + max(abs(x) for x in c[1:])
    z = np.array([radius * (0.4 + 0.9j) ** k for k in range(n)])
    for _ in range(iters):
        new = z.copy()
        for i in range(n):
            den = np.prod([new[i] - new[j] for j in range(n) if j != i])
            new[i] = new[i] - poly(new[i]) / den
        if np.max(np.abs(new - z)) < 1e-15 * radius:
            z = new
            break
        z = new
    for _ in range(5):
        for i in range(n):
            d = dpoly(z[i])
            if d != 0:
                z[i] = z[i] - poly(z[i]) / d
    return z


def match_multisets(a, b):
    """Largest distance in an optimal pairing of two complex multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()
