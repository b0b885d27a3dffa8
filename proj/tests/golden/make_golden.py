"""Writes the golden binary files from the documented layouts with struct,
independently of the C++ encoder. Run from this directory; outputs are
checked in."""
import json
import struct


def split_file():
    h, w = 2, 3
    records = []
    for i in range(2):
        gel = [round(0.25 * i + 0.125 * k, 6) for k in range(3 * h * w)]
        membrane = [-1.5 + 0.5 * k + i for k in range(h * w)]
        records.append({"tool_id": 4 + i, "grasp_id": 100 + i, "y": 1.5 - i, "z": -2.25, "theta": 12.5 * (i + 1),
                        "depth": 0.75, "gel": gel, "membrane": membrane})
    out = b"CTTPDS01" + struct.pack("<III", len(records), h, w)
    for r in records:
        out += struct.pack("<II", r["tool_id"], r["grasp_id"])
        out += struct.pack("<ffff", r["y"], r["z"], r["theta"], r["depth"])
        out += struct.pack("<%df" % len(r["gel"]), *r["gel"])
        out += struct.pack("<%df" % len(r["membrane"]), *r["membrane"])
    return out, {"height": h, "width": w, "records": records}


def checkpoint_file():
    tensors = [("gel.encoder.fc.bias", [3], [0.5, -1.0, 2.0]),
               ("w", [2, 2], [1.0, -0.0, 3.25, 1e-3])]
    out = b"CTTPCK01" + struct.pack("<I", len(tensors))
    checksum = 0
    for name, shape, values in tensors:
        raw = name.encode("utf-8")
        out += struct.pack("<H", len(raw)) + raw + struct.pack("<B", len(shape))
        out += struct.pack("<%dI" % len(shape), *shape)
        payload = struct.pack("<%df" % len(values), *values)
        checksum += sum(payload)
        out += payload
    out += struct.pack("<Q", checksum % 2**64)
    return out, {"tensors": [{"name": n, "shape": s, "values": v} for n, s, v in tensors], "checksum": checksum}


if __name__ == "__main__":
    split_bytes, split_meta = split_file()
    ckpt_bytes, ckpt_meta = checkpoint_file()
    with open("split_small.bin", "wb") as f:
        f.write(split_bytes)
    with open("checkpoint_small.ckpt", "wb") as f:
        f.write(ckpt_bytes)
    with open("expected.json", "w") as f:
        json.dump({"split": split_meta, "checkpoint": ckpt_meta}, f, indent=1)
