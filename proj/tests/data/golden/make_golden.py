#!/usr/bin/env python3
# Copyright 2026 The malvis Authors.
# SPDX-License-Identifier: Apache-2.0
"""Golden vectors for the byte-to-image conversion.

Writes a fixed set of synthetic binaries covering every width bracket, a
manifest, and hashes.txt with the SHA-256 of the .mimg store each
conversion setting must produce. The store bytes are computed here, in plain
Python, independently of the C++ code:

  width table -> row-major reshape with zero padding -> b / 255 ->
  bilinear resize (half-pixel centres, edge clamp) -> f32 little-endian.

Run from this directory: python3 make_golden.py
"""

import hashlib
import math
import os
import struct

# (upper bound in kb, width); anything larger gets 2048.
WIDTHS = [(10, 32), (30, 64), (60, 128), (100, 256), (200, 384),
          (500, 512), (1000, 768), (2000, 1024)]

FILES = [
    ("g00_one_byte.bin", 1),
    ("g01_10kb_edge.bin", 10 * 1024),
    ("g02_10kb_plus1.bin", 10 * 1024 + 1),
    ("g03_45k.bin", 45_000),
    ("g04_80k.bin", 80_000),
    ("g05_150k.bin", 150_000),
    ("g06_300k.bin", 300_000),
    ("g07_600k.bin", 600_000),
    ("g08_1100k.bin", 1_100_000),
    ("g09_2100k.bin", 2_100_000),
    ("g10_white.bin", 5_000),
]

SETTINGS = [("side224_gray", 224, 1), ("side28_gray", 28, 1), ("side64_rgb", 64, 3)]


def content(name, size):
    if name == "g00_one_byte.bin":
        return bytes([0x80])
    if name == "g10_white.bin":
        return bytes([0xFF]) * size
    seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
    state = seed | 1
    out = bytearray()
    block = 0
    while len(out) < size:
        kind = block % 4
        length = min(size - len(out), 700 + (block * 131) % 2400)
        if kind == 0:
            out += bytes(length)
        elif kind == 1:
            out += bytes((i * 7 + block) % 256 for i in range(length))
        elif kind == 2:
            for _ in range(length):
                state = (state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
                out.append(state >> 56)
        else:
            out += bytes(0x20 + (i * 13 + block) % 95 for i in range(length))
        block += 1
    return bytes(out[:size])


def width_for(n):
    for kb, w in WIDTHS:
        if n <= kb * 1024:
            return w
    return 2048


def taps(n_in, n_out):
    scale = n_in / n_out
    out = []
    for i in range(n_out):
        pos = (i + 0.5) * scale - 0.5
        pos = min(max(pos, 0.0), float(n_in - 1))
        lo = int(math.floor(pos))
        out.append((lo, min(lo + 1, n_in - 1), pos - lo))
    return out


def to_image(data, side):
    w = width_for(len(data))
    h = (len(data) + w - 1) // w
    pix = [b / 255.0 for b in data] + [0.0] * (h * w - len(data))
    rows, cols = taps(h, side), taps(w, side)
    out = []
    for ylo, yhi, fy in rows:
        for xlo, xhi, fx in cols:
            top = (1.0 - fx) * pix[ylo * w + xlo] + fx * pix[ylo * w + xhi]
            bottom = (1.0 - fx) * pix[yhi * w + xlo] + fx * pix[yhi * w + xhi]
            out.append(min(max((1.0 - fy) * top + fy * bottom, 0.0), 1.0))
    return out


def store_bytes(records, side, channels):
    buf = bytearray(b"MIMG")
    buf += struct.pack("<BI", 1, len(records))
    for rid, pixels in records:
        raw = rid.encode()
        buf += struct.pack("<H", len(raw)) + raw
        buf += struct.pack("<HHB", side, side, channels)
        if channels == 1:
            buf += struct.pack("<%df" % len(pixels), *pixels)
        else:
            buf += struct.pack("<%df" % (3 * len(pixels)), *[v for v in pixels for _ in range(3)])
    return bytes(buf)


def main():
    os.makedirs("bin", exist_ok=True)
    blobs = []
    for name, size in FILES:
        data = content(name, size)
        with open(os.path.join("bin", name), "wb") as f:
            f.write(data)
        blobs.append(("bin/" + name, data))
    with open("manifest.csv", "w", newline="\n") as f:
        f.write("path,label\n")
        for rid, data in blobs:
            f.write("%s,%s\n" % (rid, "width%d" % width_for(len(data))))
    with open("hashes.txt", "w", newline="\n") as f:
        f.write("# setting side channels sha256-of-store\n")
        for setting, side, channels in SETTINGS:
            records = [(rid, to_image(data, side)) for rid, data in blobs]
            digest = hashlib.sha256(store_bytes(records, side, channels)).hexdigest()
            f.write("%s %d %d %s\n" % (setting, side, channels, digest))
    with open("files.txt", "w", newline="\n") as f:
        f.write("# file bytes width sha256-of-file\n")
        for rid, data in blobs:
            f.write("%s %d %d %s\n" % (rid, len(data), width_for(len(data)),
                                      hashlib.sha256(data).hexdigest()))


if __name__ == "__main__":
    main()
