"""
Optional sanity test.
Run:
    python tests/sanity_check.py
from repo root (after installing requirements).
"""

import json
import os
import subprocess
import sys


def main() -> None:
    cmd = [sys.executable, "run_toolkit.py", "verify", "all", "--format", "json", "--quiet"]
    print("Running:", " ".join(cmd))
    env = dict(os.environ, PYTHONIOENCODING="utf-8")
    result = subprocess.run(cmd, capture_output=True, encoding="utf-8", env=env)
    if result.returncode not in (0, 1):
        print("STDOUT:\n", result.stdout)
        print("STDERR:\n", result.stderr)
        raise SystemExit("Sanity check failed.")

    summary = json.loads(result.stdout)["summary"]
    print(f"{summary['passed']}/{summary['total']} assertions passed")
    if summary["status"] != "ok":
        for issue in summary["issues"]:
            print("  -", issue)
        for hint in summary["suggestions"]:
            print("  hint:", hint)
        raise SystemExit("Sanity check failed.")

    print("Sanity check passed.")


if __name__ == "__main__":
    main()
