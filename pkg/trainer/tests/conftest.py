import subprocess
import sys

import pytest


def run_engine(*args):
    """Invoke the enhancement engine's CLI — the only way tests touch it."""
    return subprocess.run(
        [sys.executable, "-m", "hdfnet.cli", *args], capture_output=True, text=True
    )


@pytest.fixture
def engine():
    return run_engine
