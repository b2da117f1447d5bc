"""Versioned binary container for named tensors.

Layout (all integers little-endian):

    magic   4 bytes  b"NMTF"
    version u32      currently 1
    then one record per tensor, in sorted-name order:
        name_len u32, name UTF-8 bytes,
        rank u32, dims u32 each,
        dtype tag u8 (0=f32 1=f64 2=i32 3=i64),
        payload little-endian raw bytes

Records are read until EOF. Round-trips are bit-exact, and because names
are sorted on write, identical parameter dicts produce identical files.
"""

import struct

import numpy as np

MAGIC = b"NMTF"
VERSION = 1

_TAG_TO_DTYPE = {0: "<f4", 1: "<f8", 2: "<i4", 3: "<i8"}
_DTYPE_TO_TAG = {np.dtype(v): k for k, v in _TAG_TO_DTYPE.items()}


class CheckpointError(IOError):
    pass


def save_tensors(path, tensors):
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        for name in sorted(tensors):
            arr = np.asarray(tensors[name])
            key = arr.dtype.newbyteorder("<")
            if key not in _DTYPE_TO_TAG:
                raise CheckpointError(f"unsupported dtype {arr.dtype} for '{name}'")
            nb = name.encode("utf-8")
            f.write(struct.pack("<I", len(nb)))
            f.write(nb)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(struct.pack("<B", _DTYPE_TO_TAG[key]))
            f.write(np.ascontiguousarray(arr, dtype=key).tobytes())


def load_tensors(path):
    out = {}
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise CheckpointError(f"{path}: bad magic")
        (version,) = struct.unpack("<I", f.read(4))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported version {version}")
        while True:
            head = f.read(4)
            if not head:
                break
            (name_len,) = struct.unpack("<I", head)
            name = f.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", f.read(4))
            dims = struct.unpack(f"<{rank}I", f.read(4 * rank)) if rank else ()
            (tag,) = struct.unpack("<B", f.read(1))
            if tag not in _TAG_TO_DTYPE:
                raise CheckpointError(f"{path}: unknown dtype tag {tag}")
            dt = np.dtype(_TAG_TO_DTYPE[tag])
            count = int(np.prod(dims, dtype=np.int64)) if dims else 1
            payload = f.read(count * dt.itemsize)
            if len(payload) != count * dt.itemsize:
                raise CheckpointError(f"{path}: truncated record for '{name}'")
            out[name] = np.frombuffer(payload, dtype=dt).reshape(dims).copy()
    return out
