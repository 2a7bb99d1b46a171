#!/usr/bin/env python3
"""Reproduce every worked-example computation and print a PASS/FAIL table.

Usage: python scripts/reproduce_examples.py
Exit status 0 iff every check passes.
"""

import sys

from repot.cli import run_worked_examples

if __name__ == "__main__":
    sys.exit(run_worked_examples())
