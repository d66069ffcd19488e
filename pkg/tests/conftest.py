import pytest

from hovw import _kernels_py, kernels

try:
    from hovw import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = ["python"] + (["cython"] if _compiled is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel implementation."""
    impl = _kernels_py if request.param == "python" else _compiled
    monkeypatch.setattr(kernels, "tree_distance", impl.tree_distance)
    monkeypatch.setattr(kernels, "trace_outer_border", impl.trace_outer_border)
    monkeypatch.setattr("hovw.decompose.trace_outer_border", impl.trace_outer_border)
    return request.param


@pytest.fixture(scope="session")
def small_corpus():
    from hovw.pipeline import analyze_dataset
    from hovw.synth import generate_synthetic_corpus
    ds = generate_synthetic_corpus(3, 6, seed=1)
    analyses, failures = analyze_dataset(ds)
    assert not failures
    return ds, analyses


@pytest.fixture(scope="session")
def small_model(small_corpus):
    from hovw.pipeline import train_model
    ds, analyses = small_corpus
    return train_model(ds, 6, 0.7, seed=0, analyses=analyses)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_RESULTS
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_RESULTS):
        status, detail = ACCEPTANCE_RESULTS[crit]
        terminalreporter.write_line(f"criterion {crit}: {status} ({detail})")
