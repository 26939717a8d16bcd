"""Regenerate the CLI golden files under tests/golden from the bundled models."""

import sys
from pathlib import Path

from fjmids.cli import main
from fjmids.fixtures import bundled_path

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

CASES = {
    "analyze_independent.json": ["analyze", "independent.json"],
    "analyze_degroot_negative.json": ["analyze", "degroot_negative.json"],
    "limit_independent.json": ["limit", "independent.json"],
    "limit_positive.json": ["limit", "positive.json"],
    "limit_negative.json": ["limit", "negative.json"],
    "limit_degroot_independent.json": ["limit", "degroot_independent.json"],
    "limit_degroot_positive.json": ["limit", "degroot_positive.json"],
    "limit_degroot_negative.json": ["limit", "degroot_negative.json"],
    "simulate_positive.csv": ["simulate", "positive.json", "--max-steps", "40"],
    "identify_infinite.json": ["identify", "identify_infinite.json"],
    "identify_finite.json": ["identify", "identify_finite.json"],
    "gossip_positive.csv": ["gossip", "positive.json", "--seed", "7", "--steps", "10000",
                            "--replications", "2"],
}


def run_case(args, out):
    cmd, name, *rest = args
    return main([cmd, str(bundled_path(name)), "--out", str(out), *rest])


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for fname, args in CASES.items():
        code = run_case(args, GOLDEN / fname)
        print(f"{fname}: exit {code}")
        if code:
            sys.exit(code)
