#!/usr/bin/env python3
"""Turn a hist_<param>.csv from the experiment subcommand into a gnuplot
script (and optionally run gnuplot) so the estimator's spread across
history lengths can be eyeballed.

Usage:
    python3 tools/hist_to_gnuplot.py out/hist_mu.csv > mu.gp
    gnuplot -persist mu.gp

    # or render straight to a PNG next to the CSV:
    python3 tools/hist_to_gnuplot.py out/hist_mu.csv --png
"""

import argparse
import csv
import pathlib
import shutil
import subprocess
import sys


def load(path: pathlib.Path):
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:2] != ["bin_lo", "bin_hi"]:
        sys.exit(f"{path}: expected a histogram CSV with bin_lo,bin_hi,...")
    header = rows[0]
    series = [name.removeprefix("count_m") for name in header[2:]]
    data = [[float(v) for v in row] for row in rows[1:]]
    return series, data


def script(path: pathlib.Path, series, data, png: bool) -> str:
    param = path.stem.removeprefix("hist_")
    lines = []
    if png:
        out = path.with_suffix(".png")
        lines += [
            "set terminal pngcairo size 900,540",
            f"set output '{out}'",
        ]
    lines += [
        f"set title 'estimates of {param} by history length (cycles)'",
        f"set xlabel '{param}'",
        "set ylabel 'fits'",
        "set style fill transparent solid 0.45 border",
        "set boxwidth 0.9 relative",
        "set key title 'cycles'",
        "$hist << EOD",
    ]
    for row in data:
        mid = 0.5 * (row[0] + row[1])
        lines.append(" ".join(str(v) for v in [mid] + row[2:]))
    lines.append("EOD")
    plots = ", ".join(
        f"$hist using 1:{i + 2} with boxes title '{name}'"
        for i, name in enumerate(series)
    )
    lines.append(f"plot {plots}")
    return "\n".join(lines) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", type=pathlib.Path)
    ap.add_argument(
        "--png",
        action="store_true",
        help="run gnuplot and write <csv stem>.png instead of printing",
    )
    args = ap.parse_args()

    series, data = load(args.csv)
    text = script(args.csv, series, data, args.png)
    if not args.png:
        sys.stdout.write(text)
        return
    if shutil.which("gnuplot") is None:
        sys.exit("gnuplot is not installed; rerun without --png")
    subprocess.run(["gnuplot"], input=text.encode(), check=True)
    print(args.csv.with_suffix(".png"))


if __name__ == "__main__":
    main()
