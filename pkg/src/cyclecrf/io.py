"""File formats: edge maps (PGM/CSV), graph text files, partitions, labelings."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .graph import EdgeGraph, EdgeMap


class FormatError(ValueError):
    """Malformed input file."""


def _pgm_tokens(data: bytes):
    # header tokens, skipping comments; yields (token, end offset)
    i, n = 0, len(data)
    while i < n:
        ch = data[i:i + 1]
        if ch == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif ch.isspace():
            i += 1
        else:
            j = i
            while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(path) -> EdgeMap:
    """Plain (P2) or binary (P5) graymap; values are scaled by 1/maxval."""
    data = Path(path).read_bytes()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError) as exc:
        raise FormatError(f"{path}: bad PGM header") from exc
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"{path}: not a P2/P5 graymap")
    if not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad maxval {maxval}")
    count = width * height
    if magic == b"P5":
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        raw = data[end + 1:]
        values = np.frombuffer(raw, dtype=dtype, count=count) if len(raw) >= count * np.dtype(dtype).itemsize else None
        if values is None:
            raise FormatError(f"{path}: truncated pixel data")
    else:
        try:
            values = np.array([int(t) for t, _ in tokens], dtype=np.int64)
        except ValueError as exc:
            raise FormatError(f"{path}: non-integer pixel value") from exc
        if len(values) != count:
            raise FormatError(f"{path}: expected {count} pixels, found {len(values)}")
    values = values.astype(np.float64) / maxval
    if values.max(initial=0.0) > 1.0:
        raise FormatError(f"{path}: pixel value above maxval")
    return EdgeMap(values.reshape(height, width))


def write_pgm(path, edge_map: EdgeMap, binary: bool = True) -> None:
    pix = np.rint(edge_map.values * 255).astype(np.uint8)
    h, w = pix.shape
    if binary:
        Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode() + pix.tobytes())
    else:
        rows = "\n".join(" ".join(str(x) for x in row) for row in pix)
        Path(path).write_text(f"P2\n{w} {h}\n255\n{rows}\n")


def read_csv_map(path) -> EdgeMap:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-numeric value") from exc
    if not rows:
        raise FormatError(f"{path}: empty edge map")
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: ragged rows")
    try:
        return EdgeMap(np.array(rows))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_csv_map(path, edge_map: EdgeMap) -> None:
    np.savetxt(path, edge_map.values, delimiter=",", fmt="%.6f")


def read_edge_map(path) -> EdgeMap:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_csv_map(path)
    head = path.read_bytes()[:2]
    if head in (b"P2", b"P5"):
        return read_pgm(path)
    return read_csv_map(path)


def write_graph(path, graph: EdgeGraph, probs=None) -> None:
    """``nodes <n> edges <m>`` header, then one ``u v p`` line per edge."""
    probs = graph.probs if probs is None else np.asarray(probs)
    lines = [f"nodes {graph.num_nodes} edges {graph.num_edges}"]
    lines += [f"{u} {v} {p:.9f}" for (u, v), p in zip(graph.edges.tolist(), probs.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path) -> EdgeGraph:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "nodes" or header[2] != "edges":
            raise FormatError(f"{path}:1: expected 'nodes <n> edges <m>'")
        try:
            n, m = int(header[1]), int(header[3])
        except ValueError as exc:
            raise FormatError(f"{path}:1: bad counts") from exc
        edges = np.empty((m, 2), dtype=np.int64)
        probs = np.empty(m)
        count = 0
        for lineno, line in enumerate(fh, 2):
            parts = line.split()
            if not parts:
                continue
            if count >= m or len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 'u v p'")
            try:
                u, v, p = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: expected 'u v p'") from exc
            edges[count] = (u, v) if u < v else (v, u)
            probs[count] = p
            count += 1
    if count != m:
        raise FormatError(f"{path}: header declares {m} edges, found {count}")
    try:
        return EdgeGraph(n, edges, probs)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_partition(path, partition) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "component"])
        w.writerows(enumerate(np.asarray(partition).tolist()))


def read_partition(path) -> np.ndarray:
    nodes, comps = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            if lineno == 1 and row[0].strip() == "node":
                continue
            if len(row) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'node,component'")
            try:
                nodes.append(int(row[0]))
                comps.append(int(row[1]))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: expected integers") from exc
    out = np.full(len(nodes), -1, dtype=np.int64)
    for node, comp in zip(nodes, comps):
        if not 0 <= node < len(nodes) or out[node] != -1:
            raise FormatError(f"{path}: node ids must be 0..{len(nodes) - 1}, each once")
        out[node] = comp
    return out


def write_labeling(path, graph: EdgeGraph, labeling) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "cut"])
        for (u, v), y in zip(graph.edges.tolist(), np.asarray(labeling).tolist()):
            w.writerow([u, v, int(y)])


def read_labeling(path) -> np.ndarray:
    out = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or (lineno == 1 and row[0].strip() == "u"):
                continue
            try:
                out.append(int(row[2]))
            except (ValueError, IndexError) as exc:
                raise FormatError(f"{path}:{lineno}: expected 'u,v,cut'") from exc
    return np.array(out, dtype=np.int8)
