"""File formats (edge lists, constraints, labels, points, PGM, scribbles)
and pixel-grid graph construction."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .errors import GraphValidationError
from .generators import LabeledPointCloud
from .graph import WeightedGraph
from .merge import ConstraintSet, check_conflicts

__all__ = [
    "read_edge_list", "write_edge_list",
    "read_constraints", "write_constraints",
    "read_labels", "write_labels",
    "read_points", "write_points",
    "read_pgm", "write_pgm",
    "read_scribbles", "scribbles_to_constraints",
    "image_to_graph",
]


def _data_lines(path):
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


class ParseError(GraphValidationError):
    """A text input file does not match its format."""


def read_edge_list(path, n: int | None = None) -> WeightedGraph:
    """Read "u v [w]" lines (0-based endpoints, '#' comments, one line per
    undirected edge). The vertex count comes from a "# N vertices" header
    comment if present (written by :func:`write_edge_list`, so isolated
    trailing vertices round-trip), else defaults to max endpoint + 1."""
    if n is None:
        with open(path) as fh:
            header = re.match(r"#\s*(\d+)\s+vertices", fh.readline())
        if header:
            n = int(header.group(1))
    us, vs, ws = [], [], []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        us.append(u)
        vs.append(v)
        ws.append(w)
    if not us:
        raise ParseError(f"{path}: no edges found")
    size = max(max(us), max(vs)) + 1 if n is None else n
    return WeightedGraph(size, us, vs, ws)


def write_edge_list(path, g: WeightedGraph) -> None:
    with open(path, "w") as fh:
        fh.write(f"# {g.n} vertices, {g.num_edges} undirected edges\n")
        for u, v, w in zip(g.u, g.v, g.w):
            fh.write(f"{u} {v} {float(w)!r}\n")


def read_constraints(path) -> ConstraintSet:
    """Read "ML u v [w]" / "CL u v [w]" lines; conflicts are rejected here."""
    cs = ConstraintSet()
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) not in (3, 4) or parts[0].upper() not in ("ML", "CL"):
            raise ParseError(f"{path}:{lineno}: expected 'ML|CL u v [w]', got {line!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
            w = float(parts[3]) if len(parts) == 4 else None
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        target = cs.ml if parts[0].upper() == "ML" else cs.cl
        target.append((u, v, w))
    check_conflicts(cs)
    return cs


def write_constraints(path, cs: ConstraintSet) -> None:
    with open(path, "w") as fh:
        for kind, pairs in (("ML", cs.ml), ("CL", cs.cl)):
            for u, v, w in pairs:
                suffix = "" if w is None else f" {float(w)!r}"
                fh.write(f"{kind} {u} {v}{suffix}\n")


def read_labels(path) -> np.ndarray:
    labels = []
    for lineno, line in _data_lines(path):
        try:
            labels.append(int(line))
        except ValueError:
            raise ParseError(f"{path}:{lineno}: expected one integer label") from None
    return np.asarray(labels, dtype=np.int64)


def write_labels(path, labels) -> None:
    with open(path, "w") as fh:
        for lab in np.asarray(labels).ravel():
            fh.write(f"{int(lab)}\n")


def read_points(path) -> LabeledPointCloud:
    """Read "x y label" lines into a labeled 2-d point cloud."""
    pts, labels = [], []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'x y label'")
        try:
            pts.append((float(parts[0]), float(parts[1])))
            labels.append(int(parts[2]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not pts:
        raise ParseError(f"{path}: no points found")
    return LabeledPointCloud(
        points=np.asarray(pts), labels=np.asarray(labels, dtype=np.int64)
    )


def write_points(path, cloud: LabeledPointCloud) -> None:
    with open(path, "w") as fh:
        for (x, y), lab in zip(cloud.points, cloud.labels):
            fh.write(f"{float(x)!r} {float(y)!r} {int(lab)}\n")


def read_pgm(path) -> np.ndarray:
    """Read a PGM image (plain P2 or binary P5) as a (H, W) uint array."""
    data = Path(path).read_bytes()
    # header: magic, width, height, maxval, separated by whitespace/comments
    tokens = []
    pos = 0
    while len(tokens) < 4:
        if pos >= len(data):
            raise ParseError(f"{path}: truncated PGM header")
        chunk = data[pos:pos + 1]
        if chunk == b"#":
            pos = data.find(b"\n", pos)
            if pos == -1:
                raise ParseError(f"{path}: unterminated comment")
            continue
        if chunk.isspace():
            pos += 1
            continue
        m = re.match(rb"[^\s#]+", data[pos:])
        tokens.append(m.group(0))
        pos += m.end()
    magic = tokens[0]
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError(f"{path}: malformed PGM header") from None
    if maxval <= 0 or maxval > 65535:
        raise ParseError(f"{path}: unsupported maxval {maxval}")
    if magic == b"P2":
        flat = np.array(data[pos:].split(), dtype=np.int64)
        if flat.size != width * height:
            raise ParseError(f"{path}: expected {width * height} pixels, got {flat.size}")
    elif magic == b"P5":
        pos += 1  # single whitespace after maxval
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        flat = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
        flat = flat.astype(np.int64)
    else:
        raise ParseError(f"{path}: not a PGM file (magic {magic!r})")
    if flat.max(initial=0) > maxval:
        raise ParseError(f"{path}: pixel value exceeds maxval")
    img = flat.reshape(height, width)
    return img.astype(np.uint8 if maxval < 256 else np.uint16)


def write_pgm(path, image: np.ndarray, maxval: int = 255) -> None:
    """Write a (H, W) array as binary PGM (P5)."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise GraphValidationError("PGM image must be 2-d")
    if img.min(initial=0) < 0 or img.max(initial=0) > maxval:
        raise GraphValidationError("pixel values out of range for maxval")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode()
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    Path(path).write_bytes(header + img.astype(dtype).tobytes())


def read_scribbles(path) -> list:
    """Read "row col label" annotation lines; returns [(row, col, label)]."""
    out = []
    for lineno, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'row col label'")
        try:
            out.append((int(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return out


def scribbles_to_constraints(scribbles, shape) -> ConstraintSet:
    """Clique-expand pixel annotations into pairwise constraints.

    Pixel (r, c) maps to vertex r * W + c; same-label scribbles become
    must-links, different labels cannot-links.
    """
    h, w = shape
    ids, labels = [], []
    for r, c, lab in scribbles:
        if not (0 <= r < h and 0 <= c < w):
            raise GraphValidationError(f"scribble ({r}, {c}) outside a {h}x{w} image")
        ids.append(r * w + c)
        labels.append(lab)
    return ConstraintSet.from_labeled_vertices(ids, labels)


def image_to_graph(image: np.ndarray, sigma: float = 0.1,
                   connectivity: int = 4) -> WeightedGraph:
    """Grid graph over pixels with Gaussian intensity affinities.

    Pixel (r, c) is vertex r * W + c. Neighbors (4- or 8-connectivity)
    are joined with weight exp(-(g_i - g_j)^2 / (2 sigma^2)) where g is
    the intensity normalized to [0, 1].
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise GraphValidationError("image must be a 2-d grayscale array")
    if connectivity not in (4, 8):
        raise GraphValidationError("connectivity must be 4 or 8")
    if sigma <= 0:
        raise GraphValidationError("sigma must be positive")
    peak = img.max()
    g = img / peak if peak > 0 else img
    h, w = g.shape
    ids = np.arange(h * w).reshape(h, w)
    shifts = [(0, 1), (1, 0)]
    if connectivity == 8:
        shifts += [(1, 1), (1, -1)]
    us, vs, ws = [], [], []
    for dr, dc in shifts:
        r0, r1 = max(0, -dr), min(h, h - dr)
        c0, c1 = max(0, -dc), min(w, w - dc)
        src = ids[r0:r1, c0:c1].ravel()
        dst = ids[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
        a = g[r0:r1, c0:c1].ravel()
        b = g[r0 + dr:r1 + dr, c0 + dc:c1 + dc].ravel()
        us.append(src)
        vs.append(dst)
        # floor keeps tiny-sigma affinities from underflowing to zero weight
        ws.append(np.maximum(np.exp(-((a - b) ** 2) / (2.0 * sigma * sigma)),
                             1e-300))
    return WeightedGraph(
        h * w, np.concatenate(us), np.concatenate(vs), np.concatenate(ws)
    )
