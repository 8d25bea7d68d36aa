"""Reader and writer for a strict NRRD0004 subset.

Supported files: 3-D, little-endian, attached header, raw or gzip encoding,
payload types uint8 / short / float.  The payload is x-fastest (NRRD
convention), matching the internal linear index ``x + nx*(y + ny*z)``.
Anything outside the subset is rejected; unknown header fields are skipped
with a warning.
"""

import gzip
import warnings
from pathlib import Path

import numpy as np

from .grid import LabelMask, ProbabilityMap, VoxelGeometry, Volume3D

MAGIC = "NRRD0004"

_TYPE_TO_DTYPE = {
    "uint8": np.dtype("<u1"),
    "short": np.dtype("<i2"),
    "float": np.dtype("<f4"),
}
_DTYPE_TO_TYPE = {v: k for k, v in _TYPE_TO_DTYPE.items()}

_REQUIRED_FIELDS = (
    "type",
    "dimension",
    "sizes",
    "space directions",
    "space origin",
    "endian",
    "encoding",
)


class NrrdFormatError(ValueError):
    """Raised when a file falls outside the supported NRRD subset."""


def _parse_vector(text: str) -> np.ndarray:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise NrrdFormatError(f"malformed vector {text!r}")
    return np.array([float(t) for t in text[1:-1].split(",")], dtype=np.float64)


def _format_vector(vec) -> str:
    return "(" + ",".join(repr(float(v)) for v in vec) + ")"


def _parse_header(fh, path) -> tuple:
    magic = fh.readline().decode("ascii", "replace").rstrip("\r\n")
    if magic != MAGIC:
        raise NrrdFormatError(f"{path}: expected magic {MAGIC!r}, got {magic!r}")
    fields = {}
    while True:
        raw = fh.readline()
        if raw == b"":
            raise NrrdFormatError(f"{path}: header ended without a blank line")
        line = raw.decode("ascii", "replace").rstrip("\r\n")
        if line == "":
            break
        if line.startswith("#"):
            continue
        if ":=" in line:
            key = line.split(":=", 1)[0]
            warnings.warn(f"{path}: ignoring key/value pair {key!r}")
            continue
        if ": " not in line and not line.endswith(":"):
            raise NrrdFormatError(f"{path}: malformed header line {line!r}")
        name, _, value = line.partition(":")
        name = name.strip().lower()
        value = value.strip()
        if name == "data file":
            raise NrrdFormatError(f"{path}: detached headers are not supported")
        if name in _REQUIRED_FIELDS:
            fields[name] = value
        else:
            warnings.warn(f"{path}: ignoring unknown field {name!r}")
    missing = [f for f in _REQUIRED_FIELDS if f not in fields]
    if missing:
        raise NrrdFormatError(f"{path}: missing required fields {missing}")
    return fields, fh.read()


def _geometry_from_fields(fields, path) -> tuple:
    if fields["dimension"] != "3":
        raise NrrdFormatError(f"{path}: only dimension 3 is supported, got {fields['dimension']}")
    if fields["endian"] != "little":
        raise NrrdFormatError(f"{path}: only little-endian payloads are supported")
    if fields["type"] not in _TYPE_TO_DTYPE:
        raise NrrdFormatError(f"{path}: unsupported type {fields['type']!r}")
    if fields["encoding"] not in ("raw", "gzip"):
        raise NrrdFormatError(f"{path}: unsupported encoding {fields['encoding']!r}")
    try:
        sizes = tuple(int(t) for t in fields["sizes"].split())
    except ValueError as exc:
        raise NrrdFormatError(f"{path}: malformed sizes {fields['sizes']!r}") from exc
    if len(sizes) != 3 or min(sizes) < 1:
        raise NrrdFormatError(f"{path}: sizes must be three positive ints, got {sizes}")
    vecs = fields["space directions"].split(") ")
    vecs = [v if v.endswith(")") else v + ")" for v in vecs]
    if len(vecs) != 3:
        raise NrrdFormatError(f"{path}: expected three space direction vectors")
    dirs = np.stack([_parse_vector(v) for v in vecs])  # row i = direction of axis i
    spacing = np.linalg.norm(dirs, axis=1)
    if not np.all(spacing > 0):
        raise NrrdFormatError(f"{path}: zero-length space direction")
    axes = (dirs / spacing[:, None]).T  # column i = unit direction of axis i
    if not np.allclose(axes.T @ axes, np.eye(3), atol=1e-6):
        raise NrrdFormatError(f"{path}: space directions are not orthonormal")
    aligned = np.isclose(np.abs(axes), 1.0, atol=1e-6).sum(axis=0)
    if not np.all(aligned == 1):
        raise NrrdFormatError(f"{path}: only axis-aligned space directions are supported")
    origin = _parse_vector(fields["space origin"])
    if origin.shape != (3,):
        raise NrrdFormatError(f"{path}: space origin must have three components")
    return sizes, VoxelGeometry(spacing, origin, axes)


def read_nrrd(path, kind: str = "image"):
    """Read a supported NRRD file.

    ``kind`` selects the returned grid type and its validation:
    ``image`` -> Volume3D, ``mask`` -> LabelMask (values must be 0/1),
    ``prob`` -> ProbabilityMap (values must lie in [0, 1]).
    """
    if kind not in ("image", "mask", "prob"):
        raise ValueError(f"kind must be image|mask|prob, got {kind!r}")
    path = Path(path)
    with open(path, "rb") as fh:
        fields, payload = _parse_header(fh, path)
    sizes, geometry = _geometry_from_fields(fields, path)
    dtype = _TYPE_TO_DTYPE[fields["type"]]
    if fields["encoding"] == "gzip":
        payload = gzip.decompress(payload)
    expected = int(np.prod(sizes)) * dtype.itemsize
    if len(payload) != expected:
        raise NrrdFormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype=dtype)
    arr = flat.reshape(sizes, order="F")  # x-fastest
    if kind == "mask":
        if arr.min() < 0 or arr.max() > 1 or (dtype.kind == "f" and not np.all(arr == arr.astype(np.int64))):
            raise NrrdFormatError(f"{path}: mask values outside {{0, 1}}")
        return LabelMask(arr.astype(np.uint8), geometry)
    if kind == "prob":
        if arr.min() < 0 or arr.max() > 1:
            raise NrrdFormatError(f"{path}: probabilities outside [0, 1]")
        return ProbabilityMap(arr.astype(np.float32), geometry)
    return Volume3D(arr.astype(np.float32), geometry)


def _grid_payload(grid, dtype) -> np.ndarray:
    if isinstance(grid, LabelMask):
        arr = grid.labels
    elif isinstance(grid, ProbabilityMap):
        arr = grid.probs
    elif isinstance(grid, Volume3D):
        arr = grid.values
    else:
        raise TypeError(f"cannot write a {type(grid).__name__} as NRRD")
    out = arr.astype(dtype)
    if not np.array_equal(out.astype(arr.dtype), arr):
        raise ValueError(f"values are not exactly representable as {_DTYPE_TO_TYPE[dtype]}")
    return out


def write_nrrd(grid, path, encoding: str = "raw", dtype: str | None = None) -> None:
    """Write a grid as NRRD0004.

    Default payload types: mask -> uint8, image/probability -> float.  The
    gzip encoding uses mtime 0 so identical grids produce identical bytes.
    """
    if encoding not in ("raw", "gzip"):
        raise ValueError(f"encoding must be raw or gzip, got {encoding!r}")
    if dtype is None:
        dtype = "uint8" if isinstance(grid, LabelMask) else "float"
    if dtype not in _TYPE_TO_DTYPE:
        raise ValueError(f"dtype must be one of {sorted(_TYPE_TO_DTYPE)}, got {dtype!r}")
    np_dtype = _TYPE_TO_DTYPE[dtype]
    arr = _grid_payload(grid, np_dtype)
    geom = grid.geometry
    dirs = (geom.axes * geom.spacing[None, :]).T  # row i = spacing_i * unit_i
    header = "\n".join(
        [
            MAGIC,
            f"type: {dtype}",
            "dimension: 3",
            "sizes: {} {} {}".format(*arr.shape),
            "space directions: {} {} {}".format(*(_format_vector(d) for d in dirs)),
            f"space origin: {_format_vector(geom.origin)}",
            "endian: little",
            f"encoding: {encoding}",
            "",
            "",
        ]
    )
    payload = arr.ravel(order="F").tobytes()
    if encoding == "gzip":
        payload = gzip.compress(payload, mtime=0)
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)
