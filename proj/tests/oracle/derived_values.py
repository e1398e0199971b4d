#!/usr/bin/env python3
# Exact rational reference values frozen into the unit tests (floor rounding
# to 18 decimals wherever the library floors).
from fractions import Fraction as F
from math import floor

S = 10**18

def m(x):
    return floor(F(x) * S)

out = {
    "mul(0.9, 264248265e-18)": m(F(9, 10) * F(264248265, S)),
    "1/3": m(F(1, 3)),
    "0.5^32": m(F(1, 2) ** 32),
    "kinked 6 Apr U=0.9": m(F(2900146648, S) * F(9, 10)),
    "linear 0.01 + 0.2*0.5": m(F(1, 100) + F(2, 10) * F(1, 2)),
    "saving nonlinear U=1 lambda=0.1": m((1 - F(1, 10)) * (F(1, 10) + F(3, 10) + F(1, 10))),
    "market rate {0.10,0.02} weights {1,9}": m((F(10, 100) * 1 + F(2, 100) * 9) / 10),
    "stable rate": m(F(3, 100) + F(2, 100) + F(5, 10) * (F(95, 100) - F(9, 10)) / (1 - F(9, 10))),
    "index 1 * (1 + 1e-9 * 10)": m(1 + F(1, 10**9) * 10),
    "reserves after L=1000 r=1e-9 t=1e6 lambda=0.1": m(1000 * F(1, 10**9) * 10**6 * F(1, 10)),
    "gross deposits growth same": m(1000 * F(1, 10**9) * 10**6),
    "shares for 100 at rate 1.25": m(F(100) / F(125, 100)),
    "payout for 80 shares at 1.25": m(80 * F(125, 100)),
    "utilization (50+30)/100": m(F(80, 100)),
    "seize 50 at discount 0.1": m(F(50) / (1 - F(1, 10))),
    "exchange rate (1010-1)/1000": m(F(1010 - 1, 1000)),
    "utilization 105/100": m(F(105, 100)),
}
for k, v in out.items():
    print(f"{k}: {v}")
