import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parent.parent / "scripts"


@pytest.mark.parametrize("name, args", [
    ("squares_growth.py", ["--n", "2", "4", "6"]),
    ("census_table.py", ["--n", "8"]),
    ("bounds_table.py", ["--exponents", "6", "60"]),
    ("sandwich_table.py", ["--max-n", "6", "--exact-upto", "3"]),
])
def test_script_runs(name, args):
    out = subprocess.run([sys.executable, str(SCRIPTS / name), *args],
                         capture_output=True, text=True, check=True).stdout
    lines = out.strip().splitlines()
    assert len(lines) >= 3 and "," in lines[0]
