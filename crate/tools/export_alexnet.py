#!/usr/bin/env python3
"""Export a torchvision-layout AlexNet checkpoint (e.g. a fine-tuned emotion
classifier) to an emocam model descriptor and weights container.

    python tools/export_alexnet.py checkpoint.pt labels.txt out/model

writes out/model.json and out/model.bin. Layer widths are read from the
checkpoint; the final linear layer must have one output per label.
Checkpoints using grouped convolutions or local response normalization
cannot be expressed in the descriptor vocabulary.
"""

import argparse
import json
import struct
from pathlib import Path

import numpy as np

# torchvision.models.alexnet: (name, state-dict prefix, stride, padding)
CONVS = [
    ("conv1", "features.0", 4, 2),
    ("conv2", "features.3", 1, 2),
    ("conv3", "features.6", 1, 1),
    ("conv4", "features.8", 1, 1),
    ("conv5", "features.10", 1, 1),
]
LINEARS = [("fc6", "classifier.1"), ("fc7", "classifier.4"), ("fc8", "classifier.6")]
POOLED_AFTER = {"conv1", "conv2", "conv5"}


def load_state_dict(path):
    import torch

    obj = torch.load(path, map_location="cpu", weights_only=False)
    if hasattr(obj, "state_dict"):
        obj = obj.state_dict()
    if "state_dict" in obj:
        obj = obj["state_dict"]
    out = {}
    for key, value in obj.items():
        key = key.removeprefix("module.").removeprefix("model.")
        out[key] = value.detach().cpu().numpy().astype("<f4")
    return out


def write_container(path, tensors):
    header, offset = {}, 0
    for name in sorted(tensors):
        arr = tensors[name]
        header[name] = {"dtype": "f32", "shape": list(arr.shape), "offset": offset}
        offset += arr.size * 4
        offset = (offset + 7) // 8 * 8
    header_bytes = json.dumps(header, separators=(",", ":")).encode()
    with open(path, "wb") as f:
        f.write(struct.pack("<Q", len(header_bytes)))
        f.write(header_bytes)
        start = f.tell()
        for name in sorted(tensors):
            f.seek(start + header[name]["offset"])
            f.write(np.ascontiguousarray(tensors[name], dtype="<f4").tobytes())
        f.seek(0, 2)
        f.write(b"\0" * (start + offset - f.tell()))


def read_container(path):
    data = Path(path).read_bytes()
    (n,) = struct.unpack("<Q", data[:8])
    header = json.loads(data[8 : 8 + n])
    payload = data[8 + n :]
    return {
        name: np.frombuffer(payload, "<f4", int(np.prod(e["shape"])), e["offset"]).reshape(e["shape"])
        for name, e in header.items()
    }


def build(state, labels, input_size, mean, std, pooled):
    layers, tensors = [], {}
    for name, prefix, stride, padding in CONVS:
        w, b = state[f"{prefix}.weight"], state[f"{prefix}.bias"]
        layers.append(
            {
                "name": name,
                "kind": "conv2d",
                "out_channels": int(w.shape[0]),
                "kernel": [int(w.shape[2]), int(w.shape[3])],
                "stride": stride,
                "padding": padding,
                "weights": f"{name}.weight",
                "bias": f"{name}.bias",
            }
        )
        layers.append({"name": f"relu{name[-1]}", "kind": "relu"})
        if name in POOLED_AFTER:
            layers.append({"name": f"pool{name[-1]}", "kind": "maxpool", "kernel": 3, "stride": 2})
        tensors[f"{name}.weight"], tensors[f"{name}.bias"] = w, b
    layers.append({"name": "avgpool", "kind": "adaptive-avgpool", "output": [pooled, pooled]})
    layers.append({"name": "flatten", "kind": "flatten"})
    for i, (name, prefix) in enumerate(LINEARS):
        if i < 2:
            layers.append({"name": f"drop{name[-1]}", "kind": "dropout", "rate": 0.5})
        w, b = state[f"{prefix}.weight"], state[f"{prefix}.bias"]
        layers.append(
            {"name": name, "kind": "linear", "out_features": int(w.shape[0]), "weights": f"{name}.weight", "bias": f"{name}.bias"}
        )
        if i < 2:
            layers.append({"name": f"relu{name[-1]}", "kind": "relu"})
        tensors[f"{name}.weight"], tensors[f"{name}.bias"] = w, b
    if tensors["fc8.weight"].shape[0] != len(labels):
        raise SystemExit(f"fc8 has {tensors['fc8.weight'].shape[0]} outputs but {len(labels)} labels were given")
    descriptor = {
        "input": {"channels": 3, "height": input_size, "width": input_size},
        "normalization": {"mean": mean, "std": std},
        "labels": labels,
        "layers": layers,
    }
    return descriptor, tensors


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("checkpoint")
    p.add_argument("labels", help="one label per line, in output order")
    p.add_argument("out", help="output stem; writes <out>.json and <out>.bin")
    p.add_argument("--input-size", type=int, default=224)
    p.add_argument("--pooled", type=int, default=6)
    p.add_argument("--mean", type=float, nargs=3, default=[0.485, 0.456, 0.406])
    p.add_argument("--std", type=float, nargs=3, default=[0.229, 0.224, 0.225])
    p.add_argument("--verify", action="store_true", help="re-read the container and compare every tensor")
    args = p.parse_args()

    labels = [l.strip() for l in Path(args.labels).read_text().splitlines() if l.strip()]
    state = load_state_dict(args.checkpoint)
    descriptor, tensors = build(state, labels, args.input_size, args.mean, args.std, args.pooled)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.with_suffix(".json").write_text(json.dumps(descriptor, indent=2) + "\n")
    write_container(out.with_suffix(".bin"), tensors)
    if args.verify:
        back = read_container(out.with_suffix(".bin"))
        for name, arr in tensors.items():
            if not np.array_equal(back[name], arr):
                raise SystemExit(f"round trip mismatch in {name}")
        print(f"verified {len(back)} tensors")


if __name__ == "__main__":
    main()
