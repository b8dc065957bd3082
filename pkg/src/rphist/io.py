"""File formats: CSV point ingestion, histogram JSON, tree text, plot CSV.

Histogram JSON is versioned and fully deterministic (sorted keys,
leaves in ascending label order, labels as decimal strings so arbitrary
depths survive), which makes fixed-seed pipeline runs byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, EmptyInput, ParseError
from .geometry import Box
from .srp import Histogram, HistogramLeaf
from .tree import RPTree

HISTOGRAM_FORMAT = "rphist-histogram"
HISTOGRAM_VERSION = 1
TREE_FORMAT = "rptree"
TREE_VERSION = 1


def ingest_csv(path, d: int, strict: bool = True) -> tuple[np.ndarray, int]:
    """Read points from a CSV of ``d`` comma-separated finite decimals.

    Blank lines and ``#`` comments are ignored; a non-numeric first row
    is treated as a header.  Malformed rows raise :class:`ParseError`
    with their line number in strict mode and are skipped otherwise.
    Returns ``(points, skipped_rows)``.
    """
    if d < 1:
        raise DimensionMismatch("dimension must be >= 1")
    rows: list[list[float]] = []
    skipped = 0
    saw_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            try:
                values = [float(f) for f in fields]
                if len(values) != d:
                    raise ValueError(f"expected {d} fields, got {len(values)}")
                if not all(np.isfinite(values)):
                    raise ValueError("non-finite value")
            except ValueError as exc:
                if not saw_data and not _any_number(fields):
                    continue  # header row
                if strict:
                    raise ParseError(f"{path}:{lineno}: {exc}") from None
                skipped += 1
                continue
            saw_data = True
            rows.append(values)
    if not rows:
        raise EmptyInput(f"no data rows in {path}")
    return np.array(rows, dtype=float), skipped


def _any_number(fields) -> bool:
    for f in fields:
        try:
            float(f)
            return True
        except ValueError:
            pass
    return False


def _box_to_json(box: Box) -> dict:
    return {"lo": [iv.lo for iv in box.intervals],
            "hi": [iv.hi for iv in box.intervals]}


def _box_from_json(obj) -> Box:
    return Box.from_bounds(obj["lo"], obj["hi"])


def histogram_to_json(h: Histogram) -> dict:
    leaves = [
        {
            "label": str(leaf.label),
            "count": leaf.count,
            "volume": leaf.volume,
            "height": leaf.height,
        }
        for leaf in sorted(h.leaves, key=lambda leaf: leaf.label)
    ]
    return {
        "format": HISTOGRAM_FORMAT,
        "version": HISTOGRAM_VERSION,
        "root_box": _box_to_json(h.root_box),
        "n": h.n,
        "leaves": leaves,
    }


def save_histogram(h: Histogram, path) -> None:
    Path(path).write_text(
        json.dumps(histogram_to_json(h), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_histogram(path) -> Histogram:
    """Load a histogram, revalidating the labels against the root box.

    The leaf labels must form a paving (prefix consistent, zero or two
    children everywhere); boxes are rebuilt from the labels rather than
    trusted from the file.
    """
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if obj.get("format") != HISTOGRAM_FORMAT:
        raise ParseError(f"{path}: not a {HISTOGRAM_FORMAT} file")
    if obj.get("version") != HISTOGRAM_VERSION:
        raise ParseError(f"{path}: unsupported version {obj.get('version')}")
    root_box = _box_from_json(obj["root_box"])
    labels = [int(rec["label"]) for rec in obj["leaves"]]
    tree = RPTree.from_leaves(root_box, labels)
    n = int(obj["n"])
    leaves = []
    for rec in obj["leaves"]:
        label = int(rec["label"])
        box = tree.cell_box(label)
        vol = box.volume
        count = int(rec["count"])
        leaves.append(HistogramLeaf(label, box, count, vol, count / (n * vol)))
    if sum(leaf.count for leaf in leaves) != n:
        raise ParseError(f"{path}: leaf counts do not sum to n")
    return Histogram(root_box, n, tuple(leaves))


def save_tree(tree: RPTree, path) -> None:
    """Text serialization: a root-box header, then one decimal leaf
    label per line in ascending order."""
    lines = [f"{TREE_FORMAT} {TREE_VERSION}", str(tree.dim)]
    for iv in tree.root_box.intervals:
        lines.append(f"{iv.lo!r} {iv.hi!r}")
    lines.extend(str(label) for label in tree.leaves())
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_tree(path) -> RPTree:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith(TREE_FORMAT):
        raise ParseError(f"{path}: not a {TREE_FORMAT} file")
    try:
        d = int(lines[1])
        bounds = [line.split() for line in lines[2:2 + d]]
        box = Box.from_bounds([float(b[0]) for b in bounds],
                              [float(b[1]) for b in bounds])
        labels = [int(line) for line in lines[2 + d:] if line.strip()]
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    return RPTree.from_leaves(box, labels)


def export_plot_data(h: Histogram, path) -> str:
    """CSV for plotting: leaf rectangles for 2-D, a leaf table otherwise.

    Returns the mode written (``"rectangles"`` or ``"table"``) so
    callers can tell users which layout they got.
    """
    out = Path(path)
    rows = []
    if h.root_box.dim == 2:
        rows.append("x0,y0,x1,y1,height")
        for leaf in sorted(h.leaves, key=lambda leaf: leaf.label):
            (x, y) = leaf.box.intervals
            rows.append(f"{x.lo!r},{y.lo!r},{x.hi!r},{y.hi!r},{leaf.height!r}")
        mode = "rectangles"
    else:
        rows.append("label,count,volume,height")
        for leaf in sorted(h.leaves, key=lambda leaf: leaf.label):
            rows.append(f"{leaf.label},{leaf.count},{leaf.volume!r},{leaf.height!r}")
        mode = "table"
    out.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return mode
