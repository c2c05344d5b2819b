import importlib

import pytest

from tourprod import _kernels_py

_ACCEPTANCE = []


def _backends():
    mods = [pytest.param(_kernels_py, id="python")]
    try:
        compiled = importlib.import_module("tourprod._kernels")
    except ImportError:
        mods.append(pytest.param(None, id="cython", marks=pytest.mark.skip("extension not built")))
    else:
        mods.append(pytest.param(compiled, id="cython"))
    return mods


@pytest.fixture(params=_backends())
def backend(request):
    return request.param


@pytest.fixture
def acceptance_record():
    def record(number, name, passed, detail=""):
        line = f"[{number:>2}] {'PASS' if passed else 'FAIL'}  {name}  {detail}"
        _ACCEPTANCE.append((number, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
