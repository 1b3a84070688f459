#!/usr/bin/env python3
"""Toy external evaluator: two quadratic objectives over the unit box.

Reads one JSON line {"x": [..]} from stdin and writes one JSON line
{"objectives": [..], "feasible": true} to stdout. Points in the upper-right
corner simulate a hidden-constraint failure.
"""
import json
import sys


def main() -> int:
    line = sys.stdin.readline()
    x = json.loads(line)["x"]
    if all(v > 0.9 for v in x):
        print(json.dumps({"feasible": False}))
        return 0
    f1 = sum(v * v for v in x)
    f2 = sum((v - 1.0) ** 2 for v in x)
    print(json.dumps({"objectives": [f1, f2], "feasible": True}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
