#!/usr/bin/env python3
# Exact rational evaluation of the cDAI kinked schedule; emits a C++ include.
import json
import sys
from fractions import Fraction
from pathlib import Path

SCALE = 10**18

def rate(m, u):
    a, b, g, k = (Fraction(int(m[x]), SCALE) for x in ("alpha", "beta", "gamma", "u_star"))
    r = a + b * u if u <= k else a + b * k + g * (u - k)
    return r * SCALE

def main():
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).parents[2] / "data/cdai_schedule.json"
    models = json.loads(path.read_text())["models"]
    print("// generated by tests/oracle/cdai_schedule.py")
    print("// {row, utilization mantissa, exact rate numerator, denominator}")
    for i, m in enumerate(models):
        k = Fraction(int(m["u_star"]), SCALE)
        for u in (Fraction(0), k / 2, k, Fraction(95, 100), Fraction(1)):
            r = rate(m, u)
            print(f'{{{i}, "{int(u * SCALE)}", "{r.numerator}", "{r.denominator}"}},')

main()
