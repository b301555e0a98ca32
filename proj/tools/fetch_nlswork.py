#!/usr/bin/env python3
"""Fetch the public nlswork panel and convert it to data/nlswork.csv.

Downloads the Stata example dataset (NLS young women, 1968-1988), derives the
vismin indicator from the race code, keeps the columns the example regression
needs, and drops rows with a missing value in any of them.  Age filtering is
left to the CLI's --sample flag so the CSV stays reusable.

Usage: python3 tools/fetch_nlswork.py [--out data/nlswork.csv]
"""

import argparse
import io
import os
import sys
import urllib.request

URLS = [
    "https://www.stata-press.com/data/r18/nlswork.dta",
    "https://www.stata-press.com/data/r16/nlswork.dta",
    "https://www.stata-press.com/data/r11/nlswork.dta",
    "http://www.stata-press.com/data/r11/nlswork.dta",
]

COLUMNS = ["hours", "vismin", "south", "age", "birth_yr", "year", "ind_code"]


def fetch_bytes():
    last_err = None
    for url in URLS:
        try:
            sys.stderr.write(f"fetching {url} ...\n")
            with urllib.request.urlopen(url, timeout=60) as resp:
                return resp.read()
        except Exception as err:  # noqa: BLE001 - try the next mirror
            last_err = err
            sys.stderr.write(f"  failed: {err}\n")
    raise SystemExit(f"could not download nlswork.dta: {last_err}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/nlswork.csv")
    parser.add_argument("--dta", default="", help="use a local nlswork.dta instead of downloading")
    args = parser.parse_args()

    import pandas as pd

    if args.dta:
        df = pd.read_stata(args.dta, convert_categoricals=False)
    else:
        raw = fetch_bytes()
        df = pd.read_stata(io.BytesIO(raw), convert_categoricals=False)

    # vismin = 1 for race codes 2 (black) and 3 (other), 0 for white
    df["vismin"] = df["race"].between(2, 3).astype(int)
    out = df[COLUMNS].dropna().copy()
    for col in ["vismin", "south", "age", "birth_yr", "year", "ind_code"]:
        out[col] = out[col].astype(int)

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    out.to_csv(args.out, index=False)
    kept = (out["age"] >= 25) & (out["age"] <= 35)
    sys.stderr.write(
        f"wrote {args.out}: {len(out)} rows total, {int(kept.sum())} with age in [25,35]\n"
    )


if __name__ == "__main__":
    main()
