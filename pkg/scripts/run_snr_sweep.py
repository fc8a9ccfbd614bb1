#!/usr/bin/env python3
"""Secrecy and energy efficiency vs BS power for the mmWave scenario.

Five served users, a 16-antenna jammer at -20 dB, all three baseband
filters plus the single-user benchmark. Writes CSV curves, a gnuplot
script, and a reproducing manifest to --out.
"""

import sys

from secbeam.cli import main

if __name__ == "__main__":
    args = [
        "sweep-snr",
        "--band", "mmwave",
        "--snr", "0:12:1",
        "--filter", "all",
        "--trials", "1000",
        "--seed", "1",
        "--workers", "2",
        "--out", "results/snr-sweep-mmwave",
    ]
    sys.exit(main(args + sys.argv[1:]))
