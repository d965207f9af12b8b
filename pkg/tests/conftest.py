import numpy as np
import pytest

from kropina.fields import CATALOG, load_catalog
from kropina.sampling import sample_directions, sample_point, sample_rng


@pytest.fixture(scope="session")
def catalog():
    return {name: load_catalog(name) for name in CATALOG}


def cases(spec, count, dirs=1, seed=0):
    """(x, [y, ...]) pairs from the same sampler the tool uses."""
    from kropina.riemannian import rs_data

    out = []
    for k in range(count):
        rng = sample_rng(seed, k)
        x = sample_point(spec, rng)
        d = rs_data(spec, x)
        out.append((x, d, sample_directions(d.a, d.b, dirs, rng)))
    return out


def rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b))))


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str):
    """Decorator for acceptance checks: stores pass/fail for the summary block."""

    def wrap(fn):
        import functools

        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException as exc:
                ACCEPTANCE[number] = (title, False, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
                raise
            ACCEPTANCE[number] = (title, True, detail)

        return run

    return wrap


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}  {detail}")
