#!/usr/bin/env python3
"""Run every scenario with its defaults and collect the outputs.

Writes one subdirectory per run under the chosen output root (default
./out).  This is the input set the figure pipeline consumes.  A full run
takes roughly 10 minutes on two cores.
"""

import argparse
import sys

from wehrlsim.cli import main as wehrlsim_main

RUNS = [
    ("eigen_compare", ["eigs"]),
    ("exp_params", ["expparams"]),
    ("spin_study", ["simulate", "--set", "scenario=SpinStudy"]),
    ("lambda_sweep", ["sweep", "--set", "scenario=LambdaSweep"]),
    ("doublewell_isolated",
     ["simulate", "--set", "scenario=DoubleWellIsolated"]),
    ("doublewell_combined",
     ["simulate", "--set", "scenario=DoubleWellCombined"]),
    ("coupling_sweep", ["sweep", "--set", "scenario=CouplingSweep"]),
    ("low_coupling_weak",
     ["simulate", "--set", "scenario=LowCoupling", "--set", "gamma=1e-3"]),
    ("low_coupling_strong",
     ["simulate", "--set", "scenario=LowCoupling", "--set", "gamma=1e-2"]),
    ("low_coupling_squeezed",
     ["simulate", "--set", "scenario=LowCoupling", "--set", "gamma=1e-3",
      "--set", "zeta=-0.2"]),
    ("squeeze_sweep", ["sweep", "--set", "scenario=SqueezeSweep"]),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output root directory")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--quick", action="store_true",
                        help="cut run lengths for a fast smoke pass")
    args = parser.parse_args()

    for name, argv in RUNS:
        argv = list(argv)
        if args.workers is not None:
            argv += ["--workers", str(args.workers)]
        if args.quick and argv[0] == "simulate":
            argv += ["--set", "t_end=2.0"]
        if args.quick and name == "lambda_sweep":
            # small tau shrinks the steady-state extension cap
            argv += ["--set", "sweep_points=4", "--set", "t_end=4.0",
                     "--set", "tau=1.0"]
        if args.quick and name == "coupling_sweep":
            argv += ["--set", "sweep_points=4", "--set", "t_end=4.0"]
        if args.quick and name == "squeeze_sweep":
            argv += ["--set", "zeta_step=0.1", "--set", "t_end=2.0"]
        argv += ["--out", f"{args.out}/{name}"]
        print(f"== {name}: wehrlsim {' '.join(argv)}")
        code = wehrlsim_main(argv)
        if code != 0:
            print(f"run {name} failed with exit code {code}",
                  file=sys.stderr)
            return code
    print(f"all runs complete under {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
