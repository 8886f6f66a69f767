import os
import subprocess
import sys

import pytest

from partition_lab import _kernel_py
from partition_lab._backend import BACKEND, kernel
from partition_lab.counting import _limb_widths

try:
    from partition_lab import _kernel as compiled
except ImportError:  # pragma: no cover - pure-Python install
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernel not built")


@pytest.mark.parametrize("n_max,m", [(0, 0), (0, 3), (10, 1), (60, 7), (400, 25), (3000, 12)])
def test_python_kernel_row_against_definition(n_max, m):
    row = _kernel_py.at_most_rows(n_max, m)[0]
    # generating function coefficients by direct polynomial multiplication
    poly = [1] + [0] * n_max
    for k in range(1, m + 1):
        for i in range(k, n_max + 1):
            poly[i] += poly[i - k]
    assert row == poly


@needs_compiled
@pytest.mark.parametrize("n_max,m", [(0, 0), (5, 0), (50, 3), (500, 40), (2000, 300), (4000, 4000)])
def test_kernels_agree(n_max, m):
    w = _limb_widths(n_max, m)
    assert compiled.at_most_rows(n_max, m, False, w) == _kernel_py.at_most_rows(n_max, m, False, w)


@needs_compiled
def test_kernels_agree_keep_all():
    w = _limb_widths(300, 9)
    assert compiled.at_most_rows(300, 9, True, w) == _kernel_py.at_most_rows(300, 9, True, w)


@needs_compiled
def test_limb_carry_across_words():
    # p(N) crosses 2**64 near N = 405 and 2**128 near N = 1400
    w = _limb_widths(1600, 1600)
    a = compiled.at_most_rows(1600, 1600, False, w)[0]
    b = _kernel_py.at_most_rows(1600, 1600, False, w)[0]
    assert a == b
    assert a[1600].bit_length() > 128


@needs_compiled
def test_compiled_needs_widths():
    with pytest.raises(ValueError):
        compiled.at_most_rows(10, 2, False, None)


def test_backend_selection():
    assert BACKEND == kernel.NAME
    assert BACKEND in ("cython", "python")


def test_pure_python_switch():
    env = dict(os.environ, PARTITION_LAB_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import partition_lab as p; print(p.BUILD_ID, p.count_at_most(100, 100))"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.split()
    assert "(python)" in out and out[-1] == "190569292"
