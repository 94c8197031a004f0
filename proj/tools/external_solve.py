#!/usr/bin/env python3
"""Solve a fixed-format MPS file with HiGHS and print `name value` lines.

The output is what `iamod solve --import-solution` expects.
"""
import argparse
import sys

import highspy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("mps")
    ap.add_argument("-o", "--output", help="write here instead of stdout")
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(args.mps) != highspy.HighsStatus.kOk:
        sys.exit(f"cannot read {args.mps}")
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        sys.exit(f"HiGHS status: {h.modelStatusToString(status)}")

    lp = h.getLp()
    values = h.getSolution().col_value
    lines = [f"{name} {value!r}" for name, value in zip(lp.col_names_, values)]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    print(f"objective {h.getInfo().objective_function_value!r}", file=sys.stderr)


if __name__ == "__main__":
    main()
