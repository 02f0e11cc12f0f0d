"""Reading and writing of feature matrices, labels, and run manifests.

The tensor interchange format is the ubiquitous dense-array container:
magic ``\\x93NUMPY``, format version 1.0, a textual header dict with
``descr``/``fortran_order``/``shape``, then the raw little-endian C-order
payload, with the preamble padded to a 64-byte boundary. Files written
here load with ``numpy.load`` and vice versa, so companion tools can
produce runs with zero custom serialization code.

A *run* is a directory holding one tensor file per layer, a label file,
and a JSON manifest:

    {"model": str, "dataset": str, "num_classes": int,
     "labels_file": str,
     "layers": [{"name": str, "file": str, "repeatable": bool,
                 "stage": str?}]}

Paths inside the manifest are relative to the manifest's directory.
"""

from __future__ import annotations

import ast
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, IoError, ModgraphError, ShapeError

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"

# descr -> (numpy dtype, may appear in a feature file)
_FLOAT_DESCRS = ("<f4", "<f8")
_LABEL_DESCR = "<i8"
_KNOWN_DESCRS = _FLOAT_DESCRS + (_LABEL_DESCR,)


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense (n_samples, n_features) activation matrix for one layer.

    Row r is sample r; the row order is shared by every layer of a run.
    Stored dtype (float32 or float64) is preserved for bit-exact
    round-trips; numeric stages upcast to float64 on entry.
    """

    data: np.ndarray

    def __post_init__(self):
        if not isinstance(self.data, np.ndarray) or self.data.ndim != 2:
            raise ShapeError("feature matrix must be a 2-D array")
        if self.data.dtype not in (np.float32, np.float64):
            raise DataError(f"feature dtype must be float32 or float64, got {self.data.dtype}")
        if self.data.shape[0] < 2 or self.data.shape[1] < 1:
            raise ShapeError(f"feature matrix needs >= 2 samples and >= 1 feature, got {self.data.shape}")
        if not np.isfinite(self.data).all():
            raise DataError("feature matrix contains non-finite values")

    @property
    def n_samples(self) -> int:
        return self.data.shape[0]

    @property
    def n_features(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Ground-truth class ids for the samples of a run."""

    labels: np.ndarray
    n_classes: int

    def __post_init__(self):
        if self.labels.ndim != 1:
            raise ShapeError("labels must be a 1-D array")
        if self.labels.size == 0:
            raise ShapeError("labels are empty")
        if self.labels.min() < 0:
            raise DataError("labels contain a negative class id")
        if self.n_classes < 2:
            raise DataError(f"need at least 2 classes, got n_classes={self.n_classes}")
        if self.labels.max() >= self.n_classes:
            raise DataError(
                f"label {int(self.labels.max())} out of range for n_classes={self.n_classes}"
            )
        if len(np.unique(self.labels)) < 2:
            raise DataError("fewer than 2 distinct classes appear in the labels")

    def __len__(self) -> int:
        return int(self.labels.size)


@dataclass(frozen=True)
class LayerEntry:
    """One manifest row: a named layer and the tensor file that holds it."""

    name: str
    file: str
    repeatable: bool = False
    stage: str | None = None


@dataclass(frozen=True)
class RunManifest:
    model: str
    dataset: str
    num_classes: int
    labels_file: str
    layers: tuple[LayerEntry, ...]
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if len(self.layers) == 0:
            raise FormatError("manifest has an empty layers list")
        names = [e.name for e in self.layers]
        if len(set(names)) != len(names):
            raise FormatError("manifest layer names are not unique")

    @property
    def layer_names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.layers)


@dataclass(frozen=True)
class LayerFeatureSet:
    """Ordered per-layer feature matrices plus the shared labels of one run."""

    manifest: RunManifest
    features: tuple[FeatureMatrix, ...]
    labels: LabelVector

    @property
    def n_layers(self) -> int:
        return len(self.features)

    @property
    def n_samples(self) -> int:
        return len(self.labels)

    @property
    def layer_names(self) -> tuple[str, ...]:
        return self.manifest.layer_names


def _read_preamble(fp, path) -> tuple[tuple[int, ...], str]:
    """Parse magic/version/header; returns (shape, descr). Rejects Fortran order."""
    head = fp.read(8)
    if len(head) < 8 or head[:6] != _MAGIC:
        raise FormatError(f"'{path}': not a tensor file (bad magic)")
    if head[6:8] != _VERSION:
        raise FormatError(f"'{path}': unsupported tensor format version {head[6]}.{head[7]}")
    raw_len = fp.read(2)
    if len(raw_len) < 2:
        raise FormatError(f"'{path}': truncated header")
    (hlen,) = struct.unpack("<H", raw_len)
    header = fp.read(hlen)
    if len(header) < hlen:
        raise FormatError(f"'{path}': truncated header")
    try:
        meta = ast.literal_eval(header.decode("latin1"))
    except (ValueError, SyntaxError) as e:
        raise FormatError(f"'{path}': unparseable header") from e
    if not isinstance(meta, dict) or not {"descr", "fortran_order", "shape"} <= set(meta):
        raise FormatError(f"'{path}': header missing required keys")
    descr, fortran, shape = meta["descr"], meta["fortran_order"], meta["shape"]
    if descr not in _KNOWN_DESCRS:
        raise FormatError(f"'{path}': unsupported dtype descr {descr!r}")
    if fortran:
        raise FormatError(f"'{path}': fortran_order payloads are not supported")
    if not isinstance(shape, tuple) or not all(isinstance(d, int) and d >= 0 for d in shape):
        raise FormatError(f"'{path}': invalid shape {shape!r}")
    return shape, descr


def _read_array(path) -> tuple[np.ndarray, str]:
    try:
        with open(path, "rb") as fp:
            shape, descr = _read_preamble(fp, path)
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            flat = np.fromfile(fp, dtype=np.dtype(descr), count=count)
    except OSError as e:
        raise IoError(f"cannot read '{path}': {e}") from e
    if flat.size != count:
        raise FormatError(f"'{path}': payload truncated ({flat.size} of {count} elements)")
    return flat.reshape(shape), descr


def _write_array(arr: np.ndarray, path) -> None:
    descr = arr.dtype.newbyteorder("<").str
    header = "{'descr': '%s', 'fortran_order': False, 'shape': %s, }" % (descr, repr(arr.shape))
    pad = -(len(_MAGIC) + 4 + len(header) + 1) % 64
    try:
        with open(path, "wb") as fp:
            fp.write(_MAGIC)
            fp.write(_VERSION)
            fp.write(struct.pack("<H", len(header) + pad + 1))
            fp.write((header + " " * pad + "\n").encode("latin1"))
            np.ascontiguousarray(arr).astype(descr, copy=False).tofile(fp)
    except OSError as e:
        raise IoError(f"cannot write '{path}': {e}") from e


def read_feature_matrix(path) -> FeatureMatrix:
    """Load one layer's activations; rank > 2 tensors are flattened C-order.

    A stored (N, C, W, H) tensor becomes (N, C*W*H) with element
    (n, c, w, h) at column c*W*H + w*H + h.
    """
    arr, descr = _read_array(path)
    if descr not in _FLOAT_DESCRS:
        raise FormatError(f"'{path}': feature files must be <f4 or <f8, got {descr}")
    if arr.ndim < 2:
        raise ShapeError(f"'{path}': feature tensor must have rank >= 2, got rank {arr.ndim}")
    if arr.ndim > 2:
        arr = arr.reshape(arr.shape[0], -1)
    try:
        return FeatureMatrix(data=arr)
    except (DataError, ShapeError) as e:
        raise type(e)(f"'{path}': {e}") from e


def write_feature_matrix(matrix: FeatureMatrix, path) -> None:
    """Write a matrix so that reading it back is bit-identical."""
    _write_array(matrix.data, path)


def read_labels(path, expected_n: int | None = None, n_classes: int | None = None) -> LabelVector:
    """Load a 1-D int64 label file.

    ``expected_n`` enforces the sample count when the caller knows it;
    ``n_classes`` widens K beyond 1 + max(label) for batches that miss
    some classes.
    """
    arr, descr = _read_array(path)
    if descr != _LABEL_DESCR:
        raise FormatError(f"'{path}': label files must be <i8, got {descr}")
    if arr.ndim != 1:
        raise ShapeError(f"'{path}': labels must be rank 1, got rank {arr.ndim}")
    if expected_n is not None and arr.size != expected_n:
        raise ShapeError(f"'{path}': {arr.size} labels, expected {expected_n}")
    if arr.size and arr.min() < 0:
        raise DataError(f"'{path}': labels contain a negative class id")
    k = int(arr.max()) + 1 if arr.size else 0
    if n_classes is not None:
        if n_classes < k:
            raise DataError(f"'{path}': label {k - 1} exceeds declared num_classes={n_classes}")
        k = n_classes
    try:
        return LabelVector(labels=arr, n_classes=k)
    except (DataError, ShapeError) as e:
        raise type(e)(f"'{path}': {e}") from e


def write_labels(labels: LabelVector, path) -> None:
    _write_array(labels.labels.astype(np.int64, copy=False), path)


def load_manifest(path) -> RunManifest:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise IoError(f"cannot read '{path}': {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"'{path}': invalid JSON: {e}") from e
    try:
        layers = tuple(
            LayerEntry(
                name=str(entry["name"]),
                file=str(entry["file"]),
                repeatable=bool(entry.get("repeatable", False)),
                stage=entry.get("stage"),
            )
            for entry in doc["layers"]
        )
        manifest = RunManifest(
            model=str(doc["model"]),
            dataset=str(doc["dataset"]),
            num_classes=int(doc["num_classes"]),
            labels_file=str(doc["labels_file"]),
            layers=layers,
            base_dir=path.parent,
        )
    except (KeyError, TypeError) as e:
        raise FormatError(f"'{path}': manifest missing or malformed field: {e}") from e
    if manifest.num_classes < 2:
        raise DataError(f"'{path}': num_classes must be >= 2, got {manifest.num_classes}")
    return manifest


def load_run(manifest_path) -> LayerFeatureSet:
    """Load a full run: manifest, labels, and every layer's features.

    The label file's length is the authoritative sample count; a layer
    whose row count disagrees raises a ShapeError naming that layer.
    """
    manifest = load_manifest(manifest_path)
    labels = read_labels(manifest.base_dir / manifest.labels_file, n_classes=manifest.num_classes)
    features = []
    for entry in manifest.layers:
        try:
            fm = read_feature_matrix(manifest.base_dir / entry.file)
        except ModgraphError as e:
            raise type(e)(f"layer '{entry.name}': {e}") from e
        if fm.n_samples != len(labels):
            raise ShapeError(
                f"layer '{entry.name}': {fm.n_samples} samples, labels have {len(labels)}"
            )
        features.append(fm)
    return LayerFeatureSet(manifest=manifest, features=tuple(features), labels=labels)


def write_run(run: LayerFeatureSet, out_dir) -> Path:
    """Write manifest + labels + one tensor file per layer; returns manifest path."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"cannot create '{out_dir}': {e}") from e
    manifest = run.manifest
    write_labels(run.labels, out_dir / manifest.labels_file)
    for entry, fm in zip(manifest.layers, run.features):
        write_feature_matrix(fm, out_dir / entry.file)
    doc = {
        "model": manifest.model,
        "dataset": manifest.dataset,
        "num_classes": manifest.num_classes,
        "labels_file": manifest.labels_file,
        "layers": [
            {
                "name": e.name,
                "file": e.file,
                "repeatable": e.repeatable,
                **({"stage": e.stage} if e.stage is not None else {}),
            }
            for e in manifest.layers
        ],
    }
    manifest_path = out_dir / "manifest.json"
    try:
        manifest_path.write_text(json.dumps(doc, indent=2) + "\n")
    except OSError as e:
        raise IoError(f"cannot write '{manifest_path}': {e}") from e
    return manifest_path
