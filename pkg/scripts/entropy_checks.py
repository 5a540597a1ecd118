#!/usr/bin/env python3
"""Run every entropy check: evolution identity, residual estimates,
stability bound, and the entropy-production audit."""

import sys

from jinxin.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify", "--check", "all"]))
