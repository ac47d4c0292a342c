#!/usr/bin/env python3
"""Run the default verification plan and print the per-check results."""

import json
import sys
from pathlib import Path

from berglab.cli import run_plan

HERE = Path(__file__).parent


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("reports/default")
    plan = json.loads((HERE / "plans" / "default.json").read_text())
    summary = run_plan(plan, out)
    for suite, res in sorted(summary["suites"].items()):
        for check in res["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print(f"{suite:10s} {check['name']:34s} {status}  {check['value']}")
    print(f"\nsummary: {'PASS' if summary['passed'] else 'FAIL'} -> {out}/summary.json")
    return 0 if summary["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
