#!/usr/bin/env python3
"""Materialize the five built-in synthetic lenses as PSFG1 files."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from flowbench import psf  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out_dir", nargs="?", default="psf_grids")
    args = parser.parse_args()
    for path in psf.materialize_builtin_grids(args.out_dir):
        grid = psf.load_psf_grid(path)
        print(
            f"{path}  grid={grid.grid_shape[1]}x{grid.grid_shape[0]} "
            f"K={grid.kernel_size} rms={grid.rms_radius_mm:.4f}mm"
        )


if __name__ == "__main__":
    main()
