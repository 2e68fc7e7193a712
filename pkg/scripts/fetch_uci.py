#!/usr/bin/env python3
"""Download the public benchmark datasets used by the acceptance tests.

Fetches into data/ (next to the repository root by default):

  sonar.all-data          208 rows, 60 features + M/R label
  ionosphere.data         351 rows, 34 features + g/b label
  winequality-white.csv   4898 rows + header, ';'-separated, quality target

Each file is checked for the expected row and column count before being
moved into place, so a partial or HTML error response never ends up on
disk. Needs outbound HTTPS; rerun on a machine with network access if the
sandbox you test in has none, then copy data/ across.
"""

import argparse
import csv
import io
import os
import sys
import urllib.request

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_DIR = os.path.join(HERE, "..", "data")

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

# (filename, candidate URLs in preference order, rows, columns, delimiter)
FILES = [
    ("sonar.all-data",
     [f"{UCI}/undocumented/connectionist-bench/sonar/sonar.all-data"],
     208, 61, ","),
    ("ionosphere.data",
     [f"{UCI}/ionosphere/ionosphere.data"],
     351, 35, ","),
    ("winequality-white.csv",
     [f"{UCI}/wine-quality/winequality-white.csv"],
     4899, 12, ";"),  # 4898 data rows + 1 header row
]


def verify(text, rows, cols, delimiter, name):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != rows:
        raise ValueError(f"{name}: expected {rows} rows, got {len(lines)}")
    for ln in csv.reader(io.StringIO("\n".join(lines)), delimiter=delimiter):
        if len(ln) != cols:
            raise ValueError(f"{name}: expected {cols} columns, got {len(ln)}")


def fetch(name, urls, rows, cols, delimiter, data_dir):
    dest = os.path.join(data_dir, name)
    if os.path.exists(dest):
        with open(dest) as fh:
            verify(fh.read(), rows, cols, delimiter, name)
        print(f"{name}: already present, verified")
        return True
    last_error = None
    for url in urls:
        try:
            print(f"{name}: fetching {url}")
            with urllib.request.urlopen(url, timeout=60) as resp:
                text = resp.read().decode("utf-8")
            verify(text, rows, cols, delimiter, name)
            tmp = dest + ".part"
            with open(tmp, "w") as fh:
                fh.write(text)
            os.replace(tmp, dest)
            print(f"{name}: ok ({rows} rows)")
            return True
        except Exception as exc:  # noqa: BLE001 - report and try the next URL
            last_error = exc
            print(f"{name}: {exc}", file=sys.stderr)
    print(f"{name}: all sources failed ({last_error})", file=sys.stderr)
    return False


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default=DEFAULT_DIR)
    parser.add_argument("--only", nargs="*", metavar="NAME",
                        help="fetch just these file names")
    args = parser.parse_args(argv)
    data_dir = os.path.abspath(args.data_dir)
    os.makedirs(data_dir, exist_ok=True)
    ok = True
    for name, urls, rows, cols, delim in FILES:
        if args.only and name not in args.only:
            continue
        ok = fetch(name, urls, rows, cols, delim, data_dir) and ok
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
