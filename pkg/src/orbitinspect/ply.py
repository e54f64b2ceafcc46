"""Minimal ASCII PLY reader for point-cloud targets.

Extracts the x/y/z properties of the vertex element and ignores everything
else (normals, colors, faces).  Binary variants are detected and rejected.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import PointCloud

__all__ = ["load_ply", "ParseError", "UnsupportedFormat"]

_FLOAT_TYPES = {"float", "float32", "float64", "double"}


class ParseError(ValueError):
    """Malformed PLY content; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnsupportedFormat(ValueError):
    """Structurally valid PLY in a format this reader does not implement."""


def load_ply(path) -> PointCloud:
    """Read an ASCII PLY file into a PointCloud.

    The vertex element must carry scalar float x, y, z properties; additional
    scalar properties are skipped and non-vertex elements (faces and friends)
    are ignored wholesale.
    """
    path = Path(path)
    with open(path, "r", errors="replace") as fh:
        lines = fh.read().splitlines()

    pos = 0

    def next_line():
        nonlocal pos
        while pos < len(lines):
            raw = lines[pos]
            pos += 1
            stripped = raw.strip()
            if stripped and not stripped.startswith(("comment", "obj_info")):
                return stripped
        raise ParseError("unexpected end of file", len(lines))

    if pos >= len(lines) or lines[0].strip() != "ply":
        raise ParseError("missing 'ply' magic", 1)
    pos = 1

    fmt = next_line()
    if not fmt.startswith("format"):
        raise ParseError("expected 'format' after magic", pos)
    fmt_name = fmt.split()[1] if len(fmt.split()) > 1 else ""
    if fmt_name in ("binary_little_endian", "binary_big_endian"):
        raise UnsupportedFormat(f"binary PLY ({fmt_name}) is not supported; convert to ascii")
    if fmt_name != "ascii":
        raise ParseError(f"unknown PLY format {fmt_name!r}", pos)

    # Header: ordered elements with their property lists.
    elements = []  # (name, count, [(kind, name) ...]) with kind "list" or scalar type
    while True:
        line = next_line()
        if line == "end_header":
            break
        tokens = line.split()
        if tokens[0] == "element":
            if len(tokens) != 3:
                raise ParseError("malformed element declaration", pos)
            try:
                count = int(tokens[2])
            except ValueError:
                raise ParseError(f"bad element count {tokens[2]!r}", pos) from None
            elements.append((tokens[1], count, []))
        elif tokens[0] == "property":
            if not elements:
                raise ParseError("property before any element", pos)
            if tokens[1] == "list":
                elements[-1][2].append(("list", tokens[-1]))
            elif len(tokens) == 3:
                elements[-1][2].append((tokens[1], tokens[2]))
            else:
                raise ParseError("malformed property declaration", pos)
        else:
            raise ParseError(f"unexpected header line {tokens[0]!r}", pos)

    vertex_specs = [e for e in elements if e[0] == "vertex"]
    if not vertex_specs:
        raise ParseError("no vertex element declared", pos)

    points = None
    for name, count, props in elements:
        if name != "vertex":
            for _ in range(count):
                next_line()
            continue
        if any(kind == "list" for kind, _ in props):
            raise ParseError("list properties on the vertex element are not supported", pos)
        prop_names = [p for _, p in props]
        try:
            cols = [prop_names.index(axis) for axis in ("x", "y", "z")]
        except ValueError as missing:
            raise ParseError(f"vertex element lacks an x/y/z property ({missing})", pos) from None
        for axis, col in zip("xyz", cols):
            if props[col][0] not in _FLOAT_TYPES:
                raise ParseError(
                    f"vertex property {axis} has non-float type {props[col][0]!r}", pos)
        rows = np.empty((count, 3))
        for i in range(count):
            line = next_line()
            tokens = line.split()
            if len(tokens) < len(props):
                raise ParseError(
                    f"vertex row has {len(tokens)} values, expected {len(props)}", pos)
            try:
                for k, col in enumerate(cols):
                    rows[i, k] = float(tokens[col])
            except ValueError:
                raise ParseError(f"non-numeric vertex coordinate in {line!r}", pos) from None
        points = rows

    return PointCloud(points, meta={"source": str(path), "point_count": len(points)})
