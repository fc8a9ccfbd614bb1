#!/usr/bin/env python3
"""Secrecy and energy efficiency vs user count, one run per band.

BS power 5 dB, 4-antenna jammer at -10 dB; 16 BS antennas for sub-6 and
64 for mmWave come from the band defaults.
"""

import sys

from secbeam.cli import main

if __name__ == "__main__":
    extra = sys.argv[1:]
    for band in ("sub6", "mmwave"):
        code = main([
            "sweep-users",
            "--band", band,
            "--users", "1:10",
            "--filter", "all",
            "--trials", "1000",
            "--seed", "1",
            "--workers", "2",
            "--out", f"results/user-sweep-{band}",
        ] + extra)
        if code != 0:
            sys.exit(code)
