"""Run the verifier on every bundled scenario and print a verdict table."""
from __future__ import annotations

import argparse
import json

from stablemp.scenarios import SCENARIOS, run_report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--json", help="write full reports to this file")
    args = p.parse_args(argv)

    reports = {}
    for name in sorted(SCENARIOS):
        rep = run_report(SCENARIOS[name].load())
        reports[name] = rep.to_dict()
        cells = " ".join(f"{k}={v}" for k, v in rep.verdicts.items())
        print(f"{name:28s} {rep.mode:10s} consistent={rep.consistent}  {cells}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
