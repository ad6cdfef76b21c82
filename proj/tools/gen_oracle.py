#!/usr/bin/env python3
"""Build the arbitrary-precision oracle tables used by the test suites.

Writes tests/fixtures/hardy_z_oracle.csv (t,z_oracle) and
tests/fixtures/theta_oracle.csv (t,theta_oracle). Points are drawn from a
fixed-seed generator so the tables are reproducible.
"""
import os
import random
from mpmath import mp, mpf, siegelz, siegeltheta, nstr

mp.dps = 40
HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures")


def points():
    rng = random.Random(20240611)
    pts = [0.0, 14.1347251417, 100.0, 1000.0, 5000.0, 10000.0]
    pts += [round(rng.uniform(0.0, 200.0), 6) for _ in range(60)]
    pts += [round(rng.uniform(50.0, 2000.0), 6) for _ in range(60)]
    pts += [round(rng.uniform(2000.0, 30000.0), 6) for _ in range(200)]
    return sorted(set(pts))


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    with open(os.path.join(FIXTURES, "hardy_z_oracle.csv"), "w") as fh:
        fh.write("t,z_oracle\n")
        for t in points():
            fh.write(f"{t!r},{nstr(siegelz(mpf(repr(t))), 20)}\n")
    with open(os.path.join(FIXTURES, "theta_oracle.csv"), "w") as fh:
        fh.write("t,theta_oracle\n")
        for t in [0.5, 1.0, 5.0, 10.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 1e4, 3e4]:
            fh.write(f"{t!r},{nstr(siegeltheta(mpf(repr(t))), 20)}\n")


if __name__ == "__main__":
    main()
