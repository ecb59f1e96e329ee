import numpy as np
import pytest

from placeeval.panel import DEADataset, OutcomePanel, bundled_table1

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table1():
    return bundled_table1()


def random_dea(n, m, r, seed, years=(2000,), low=1.0, high=10.0):
    rng = np.random.default_rng(seed)
    units = tuple(f"U{i}" for i in range(n))
    return DEADataset(
        units,
        tuple(years),
        tuple(f"x{i}" for i in range(m)),
        tuple(f"y{k}" for k in range(r)),
        tuple(rng.uniform(low, high, (n, m)) for _ in years),
        tuple(rng.uniform(low, high, (n, r)) for _ in years),
    )


def dea_csv_text(n_units, n_years, m, r, seed, start=1995):
    rng = np.random.default_rng(seed)
    head = ["year", "unit"] + [f"in:x{i}" for i in range(m)] + [f"out:y{k}" for k in range(r)]
    lines = [",".join(head)]
    for t in range(n_years):
        for u in range(n_units):
            vals = np.concatenate([rng.uniform(1, 100, m), rng.uniform(1, 100, r)])
            lines.append(",".join([str(start + t), f"City{u:02d}", *(f"{v:.4f}" for v in vals)]))
    return "\n".join(lines) + "\n"


def factor_panel(n_units, n_years, seed, start=1990, noise=0.05, k=2):
    """Units driven by a few common factors; unit 'T' is the treated one."""
    rng = np.random.default_rng(seed)
    f = np.cumsum(rng.normal(size=(n_years, k)), axis=0)
    loadings = rng.normal(size=(k, n_units))
    vals = f @ loadings + rng.normal(scale=noise, size=(n_years, n_units)) + rng.normal(size=n_units)
    names = ("T",) + tuple(f"c{i}" for i in range(1, n_units))
    return OutcomePanel(names, tuple(range(start, start + n_years)), vals)
