#!/usr/bin/env python3
"""Run the acceptance suite with the per-criterion PASS/FAIL lines visible."""

import subprocess
import sys
from pathlib import Path

if __name__ == "__main__":
    root = Path(__file__).resolve().parents[1]
    raise SystemExit(
        subprocess.call(
            [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-v", "-s"]
        )
    )
