#!/usr/bin/env python3
"""Convert a detector CSV into emocam detection records.

Input columns (header required): image_id, class, score, and either
x_min,y_min,x_max,y_max in pixels or XMin,XMax,YMin,YMax relative to the
image size (the Open Images convention). Image sizes are read from
<images>/<image_id>.* with Pillow.

    python tools/detections_to_jsonl.py boxes.csv images/ detections.jsonl
"""

import argparse
import csv
import json
from collections import defaultdict
from pathlib import Path

from PIL import Image

EXTENSIONS = (".png", ".jpg", ".jpeg", ".ppm", ".pgm", ".pnm", ".bmp")


def image_sizes(root):
    sizes = {}
    for p in sorted(Path(root).iterdir()):
        if p.suffix.lower() in EXTENSIONS:
            with Image.open(p) as im:
                sizes[p.stem] = im.size
    return sizes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("images")
    ap.add_argument("out")
    args = ap.parse_args()

    sizes = image_sizes(args.images)
    per_image = defaultdict(list)
    skipped = 0
    with open(args.csv, newline="") as f:
        for row in csv.DictReader(f):
            image_id = row.get("image_id") or row["ImageID"]
            if image_id not in sizes:
                skipped += 1
                continue
            w, h = sizes[image_id]
            if "x_min" in row:
                box = [float(row[k]) for k in ("x_min", "y_min", "x_max", "y_max")]
            else:
                box = [float(row["XMin"]) * w, float(row["YMin"]) * h, float(row["XMax"]) * w, float(row["YMax"]) * h]
            name = row.get("class") or row["LabelName"]
            per_image[image_id].append({"class": name, "score": float(row.get("score") or row["Confidence"]), "box": box})

    with open(args.out, "w") as f:
        for image_id in sorted(sizes):
            w, h = sizes[image_id]
            record = {"image_id": image_id, "width": w, "height": h, "detections": per_image.get(image_id, [])}
            f.write(json.dumps(record) + "\n")
    if skipped:
        print(f"skipped {skipped} rows for images not under {args.images}")


if __name__ == "__main__":
    main()
