#!/usr/bin/env python3
"""Materialise MovieLens-100K as u.data / u.item.

Tries the GroupLens zip first. When that host is unreachable, falls back to
the atomic-file copy shipped inside the RecBole wheel on PyPI and converts it
to the original layout (tab-separated u.data, pipe-separated u.item with 19
genre flags).
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery",
    "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
RECBOLE = "recbole==1.2.1"


def from_grouplens(out: pathlib.Path) -> bool:
    try:
        with urllib.request.urlopen(GROUPLENS, timeout=20) as resp:
            blob = resp.read()
    except OSError as exc:
        print(f"grouplens unavailable: {exc}", file=sys.stderr)
        return False
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("u.data", "u.item"):
            (out / name).write_bytes(zf.read(f"ml-100k/{name}"))
    return True


def from_recbole(out: pathlib.Path) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, RECBOLE],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            inter = zf.read("recbole/dataset_example/ml-100k/ml-100k.inter").decode("utf-8")
            items = zf.read("recbole/dataset_example/ml-100k/ml-100k.item").decode("latin-1")

    rows = inter.splitlines()[1:]
    with open(out / "u.data", "w", encoding="utf-8") as f:
        for line in rows:
            user, item, rating, ts = line.split("\t")
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")

    with open(out / "u.item", "w", encoding="latin-1") as f:
        for line in items.splitlines()[1:]:
            item, title, year, genres = (line.split("\t") + [""] * 4)[:4]
            present = set(genres.split())
            flags = "|".join("1" if g in present else "0" for g in GENRES)
            f.write(f"{item}|{title} ({year})||||{flags}\n")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/ml-100k")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not from_grouplens(out):
        from_recbole(out)
    print(f"wrote {out / 'u.data'} and {out / 'u.item'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
