"""Binary checkpoint container shared by every module in the repo.

Byte layout (all integers little-endian):

    offset  size  field
    0       8     magic  b"GPRCKPT\\0"
    8       4     uint32 format version (currently 1)
    12      4     uint32 metadata length M
    16      M     UTF-8 JSON metadata object
    16+M    4     uint32 entry count E
    ...           E manifest entries, each:
                    uint16 name length L
                    L      UTF-8 name
                    uint8  ndim
                    ndim x uint32 shape extents
                    uint64 byte offset into the data block
    ...     8     uint64 data block size in bytes
    ...           data block: concatenated little-endian float32 values

Entries are written in sorted-name order; offsets are multiples of 4.
"""

import json
import struct

import numpy as np

MAGIC = b"GPRCKPT\0"
VERSION = 1


class CheckpointError(Exception):
    pass


def save(path, arrays, metadata=None):
    """Write named float arrays plus a JSON metadata object."""
    meta_bytes = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    names = sorted(arrays)
    blobs, entries = [], []
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(arrays[name], dtype="<f4")
        entries.append((name, arr.shape, offset))
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(meta_bytes)))
        f.write(meta_bytes)
        f.write(struct.pack("<I", len(entries)))
        for name, shape, off in entries:
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", len(shape)))
            for s in shape:
                f.write(struct.pack("<I", s))
            f.write(struct.pack("<Q", off))
        f.write(struct.pack("<Q", offset))
        for blob in blobs:
            f.write(blob)


def load(path):
    """Read a checkpoint; returns (dict name -> float32 array, metadata)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: bad magic {raw[:8]!r}")
    pos = 8
    (version,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    (meta_len,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    metadata = json.loads(raw[pos:pos + meta_len].decode("utf-8"))
    pos += meta_len
    (count,) = struct.unpack_from("<I", raw, pos)
    pos += 4
    entries = []
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", raw, pos)
        pos += 2
        name = raw[pos:pos + name_len].decode("utf-8")
        pos += name_len
        (ndim,) = struct.unpack_from("<B", raw, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", raw, pos) if ndim else ()
        pos += 4 * ndim
        (off,) = struct.unpack_from("<Q", raw, pos)
        pos += 8
        entries.append((name, shape, off))
    (data_size,) = struct.unpack_from("<Q", raw, pos)
    pos += 8
    data = raw[pos:pos + data_size]
    if len(data) != data_size:
        raise CheckpointError(f"{path}: truncated data block")
    arrays = {}
    for name, shape, off in entries:
        n = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f4", count=n, offset=off)
        arrays[name] = arr.reshape(shape).copy()
    return arrays, metadata
