#!/usr/bin/env python3
"""Fetch raw datasets into data/raw/.

Only package indexes are assumed reachable, so the raw files are pulled out of
PyPI wheels that redistribute them:

  * MovieLens 100k: recbole (atomic files, converted back to u.data / u.item)
  * Adult:          responsibly (original UCI adult.data / adult.test)

LastFM (hetrec-2011) and Amazon Home and Kitchen must be placed by hand:
  data/raw/lastfm/user_artists.dat
  data/raw/amazon/ratings_Home_and_Kitchen.csv
"""

import argparse
import pathlib
import re
import subprocess
import sys
import tempfile
import zipfile

MONTHS = "Jan Feb Mar Apr May Jun Jul Aug Sep Oct Nov Dec".split()


def download_wheel(requirement, dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", dest, requirement],
        check=True,
    )
    wheels = sorted(pathlib.Path(dest).glob("*.whl"))
    if not wheels:
        sys.exit(f"no wheel downloaded for {requirement}")
    return wheels[-1]


def fetch_movielens(out):
    with tempfile.TemporaryDirectory() as tmp:
        whl = zipfile.ZipFile(download_wheel("recbole==1.2.1", tmp))
        inter = whl.read("recbole/dataset_example/ml-100k/ml-100k.inter").decode()
        items = whl.read("recbole/dataset_example/ml-100k/ml-100k.item").decode("latin-1")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "u.data", "w") as f:
        for line in inter.splitlines()[1:]:
            user, item, rating, ts = line.split("\t")
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
    with open(out / "u.item", "w", encoding="latin-1") as f:
        for line in items.splitlines()[1:]:
            fields = line.split("\t")
            item, title, year = fields[0], fields[1], fields[2].strip()
            if not re.fullmatch(r"\d{4}", year):
                # the redistributed copy has a few mangled years; fall back
                # to the title, or leave the date empty like the original
                m = re.search(r"\((\d{4})\)\s*$", title)
                year = m.group(1) if m else ""
            date = f"01-Jan-{year}" if year else ""
            f.write(f"{item}|{title}|{date}||\n")


def fetch_adult(out):
    with tempfile.TemporaryDirectory() as tmp:
        whl = zipfile.ZipFile(download_wheel("responsibly==0.1.2", tmp))
        out.mkdir(parents=True, exist_ok=True)
        for name in ("adult.data", "adult.test"):
            (out / name).write_bytes(whl.read(f"responsibly/dataset/adult/{name}"))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "raw"))
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    fetch_movielens(out / "ml-100k")
    fetch_adult(out / "adult")
    print(f"wrote raw data under {out}")


if __name__ == "__main__":
    main()
