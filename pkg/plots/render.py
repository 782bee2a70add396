#!/usr/bin/env python3
"""Runnable wrapper: python plots/render.py <kind> <csv...> -o <image>."""

import os
import sys

try:
    from viscowave_plots.cli import main
except ImportError:  # run from a checkout without installing
    sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))
    from viscowave_plots.cli import main

if __name__ == "__main__":
    sys.exit(main())
