"""Index persistence with a per-category disk layout.

An index directory holds:

* ``graph.bin``       -- the graph (binary CSR),
* ``vertices.txt``    -- original vertex label per dense id,
* ``categories.txt``  -- normalized membership lines,
* ``labels.bin``      -- the full label index (sequential format),
* ``segments-N.bin``  -- the seekable payload: a global out-label section, a
  global in-label section, and one segment per category bundling its posting
  lists with the out-labels of its members,
* ``manifest.json``   -- offsets, lengths, member counts, payload checksum.

Disk-backed queries touch only the manifest, the segments of the queried
categories, the source's out-label, and the destination's in-label.  Updates
write a fresh payload file and switch the manifest atomically, so an
interrupted update leaves the previous manifest valid.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .graph import (
    CategoryMap,
    Graph,
    GraphFormatError,
    VertexRemap,
    load_categories,
    load_graph_binary,
    save_graph,
    write_categories,
)
from .inverted import InvertedLabelIndex
from .labels import LabelIndex, load_labels, save_labels

MANIFEST_NAME = "manifest.json"
FORMAT_VERSION = 1
_ENTRY_DTYPE = np.dtype([("hub", "<u4"), ("dist", "<i8"), ("parent", "<u4")])
_POSTING_DTYPE = np.dtype([("member", "<u4"), ("dist", "<i8")])


class IndexDirError(RuntimeError):
    """Missing, locked, or corrupt index directory."""


# ---------------------------------------------------------------------------
# Writer lock.


def _lock_path(dirpath: str) -> str:
    return os.path.join(dirpath, ".lock")


def acquire_writer_lock(dirpath: str) -> None:
    try:
        fd = os.open(_lock_path(dirpath), os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise IndexDirError(f"index directory {dirpath} is locked by another writer") from None
    with os.fdopen(fd, "w") as fh:
        fh.write(str(os.getpid()))


def release_writer_lock(dirpath: str) -> None:
    try:
        os.unlink(_lock_path(dirpath))
    except FileNotFoundError:
        pass


def ensure_no_writer(dirpath: str) -> None:
    if os.path.exists(_lock_path(dirpath)):
        raise IndexDirError(f"index directory {dirpath} is being rewritten (lock file present)")


# ---------------------------------------------------------------------------
# Payload serialization.


def _label_block(labels: LabelIndex, v: int, side: str) -> bytes:
    if side == "out":
        indptr, hubs, dists, parents = (
            labels.out_indptr, labels.out_hubs, labels.out_dists, labels.out_parents,
        )
    else:
        indptr, hubs, dists, parents = (
            labels.in_indptr, labels.in_hubs, labels.in_dists, labels.in_parents,
        )
    lo, hi = int(indptr[v]), int(indptr[v + 1])
    records = np.empty(hi - lo, dtype=_ENTRY_DTYPE)
    records["hub"] = hubs[lo:hi]
    records["dist"] = dists[lo:hi]
    records["parent"] = parents[lo:hi]
    return struct.pack("<I", hi - lo) + records.tobytes()


def _parse_label_block(buf: bytes, offset: int = 0) -> tuple[list[tuple[int, int, int]], int]:
    (count,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    records = np.frombuffer(buf, dtype=_ENTRY_DTYPE, count=count, offset=offset)
    offset += count * _ENTRY_DTYPE.itemsize
    entries = list(
        zip(records["hub"].tolist(), records["dist"].tolist(), records["parent"].tolist())
    )
    return entries, offset


def _global_section(labels: LabelIndex, side: str) -> bytes:
    n = labels.vertex_count
    blocks = [_label_block(labels, v, side) for v in range(n)]
    offsets = np.zeros(n + 1, dtype="<u8")
    np.cumsum([len(b) for b in blocks], out=offsets[1:])
    out = io.BytesIO()
    out.write(struct.pack("<Q", n))
    out.write(offsets.tobytes())
    for b in blocks:
        out.write(b)
    return out.getvalue()


def _category_segment(
    category: str, cm: CategoryMap, il: InvertedLabelIndex, labels: LabelIndex
) -> bytes:
    members = cm.members[category]
    out = io.BytesIO()
    out.write(struct.pack("<I", len(members)))
    out.write(np.asarray(members, dtype="<u4").tobytes())
    hubs = sorted(il.postings)
    out.write(struct.pack("<I", len(hubs)))
    for hub in hubs:
        lst = il.postings[hub]
        records = np.empty(len(lst), dtype=_POSTING_DTYPE)
        records["dist"] = [d for d, _ in lst]
        records["member"] = [m for _, m in lst]
        out.write(struct.pack("<II", hub, len(lst)))
        out.write(records.tobytes())
    for v in members:
        out.write(_label_block(labels, v, "out"))
    return out.getvalue()


def parse_category_segment(buf: bytes):
    """Returns (members, InvertedLabelIndex, {member: out entries})."""
    (member_count,) = struct.unpack_from("<I", buf, 0)
    offset = 4
    members = np.frombuffer(buf, dtype="<u4", count=member_count, offset=offset).tolist()
    offset += 4 * member_count
    (hub_count,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    postings: dict[int, list[tuple[int, int]]] = {}
    for _ in range(hub_count):
        hub, count = struct.unpack_from("<II", buf, offset)
        offset += 8
        records = np.frombuffer(buf, dtype=_POSTING_DTYPE, count=count, offset=offset)
        offset += count * _POSTING_DTYPE.itemsize
        postings[hub] = list(zip(records["dist"].tolist(), records["member"].tolist()))
    out_labels: dict[int, list[tuple[int, int, int]]] = {}
    for v in members:
        out_labels[v], offset = _parse_label_block(buf, offset)
    return members, postings, out_labels


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def manifest_bytes(manifest: dict) -> bytes:
    return (json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _write_payload_and_manifest(
    dirpath: str,
    cm: CategoryMap,
    labels: LabelIndex,
    postings: dict[str, InvertedLabelIndex],
    generation: int,
) -> dict:
    payload_name = f"segments-{generation:06d}.bin"
    payload_path = os.path.join(dirpath, payload_name)
    tmp = payload_path + ".tmp"
    entries = []
    with open(tmp, "wb") as fh:
        out_section = _global_section(labels, "out")
        in_section = out_section if labels.undirected else _global_section(labels, "in")
        global_out = {"offset": fh.tell(), "length": len(out_section)}
        fh.write(out_section)
        if labels.undirected:
            global_in = dict(global_out)
        else:
            global_in = {"offset": fh.tell(), "length": len(in_section)}
            fh.write(in_section)
        for c in sorted(cm.categories):
            seg = _category_segment(c, cm, postings[c], labels)
            entries.append(
                {
                    "id": c,
                    "offset": fh.tell(),
                    "length": len(seg),
                    "member_count": len(cm.members[c]),
                }
            )
            fh.write(seg)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, payload_path)
    manifest = {
        "format_version": FORMAT_VERSION,
        "vertex_count": labels.vertex_count,
        "undirected": labels.undirected,
        "generation": generation,
        "payload": payload_name,
        "payload_length": os.path.getsize(payload_path),
        "payload_sha256": _sha256(payload_path),
        "global_out": global_out,
        "global_in": global_in,
        "categories": entries,
    }
    _atomic_write(os.path.join(dirpath, MANIFEST_NAME), manifest_bytes(manifest))
    return manifest


def write_index_dir(
    dirpath: str,
    graph: Graph,
    remap: VertexRemap,
    cm: CategoryMap,
    labels: LabelIndex,
    postings: dict[str, InvertedLabelIndex],
) -> dict:
    os.makedirs(dirpath, exist_ok=True)
    save_graph(graph, os.path.join(dirpath, "graph.bin"))
    with open(os.path.join(dirpath, "vertices.txt"), "w") as fh:
        for label in remap.labels:
            fh.write(label + "\n")
    with open(os.path.join(dirpath, "categories.txt"), "w") as fh:
        write_categories(cm, remap, fh)
    save_labels(labels, os.path.join(dirpath, "labels.bin"))
    return _write_payload_and_manifest(dirpath, cm, labels, postings, generation=1)


def load_manifest(dirpath: str) -> dict:
    path = os.path.join(dirpath, MANIFEST_NAME)
    try:
        with open(path, "rb") as fh:
            return json.loads(fh.read())
    except FileNotFoundError:
        raise IndexDirError(f"{dirpath}: no manifest (not an index directory?)") from None


def verify_manifest(dirpath: str, manifest: dict) -> None:
    payload = os.path.join(dirpath, manifest["payload"])
    if os.path.getsize(payload) != manifest["payload_length"]:
        raise IndexDirError(f"{payload}: length does not match manifest")
    if _sha256(payload) != manifest["payload_sha256"]:
        raise IndexDirError(f"{payload}: checksum does not match manifest")


def load_remap(dirpath: str) -> VertexRemap:
    with open(os.path.join(dirpath, "vertices.txt")) as fh:
        return VertexRemap(line.rstrip("\n") for line in fh)


# ---------------------------------------------------------------------------
# In-memory view: everything loaded up front.


@dataclass
class MemIndex:
    graph: Graph
    remap: VertexRemap
    cm: CategoryMap
    labels: LabelIndex
    postings: dict[str, InvertedLabelIndex]
    manifest: dict

    @classmethod
    def load(cls, dirpath: str, verify: bool = True) -> "MemIndex":
        manifest = load_manifest(dirpath)
        if verify:
            verify_manifest(dirpath, manifest)
        graph = load_graph_binary(os.path.join(dirpath, "graph.bin"))
        remap = load_remap(dirpath)
        with open(os.path.join(dirpath, "categories.txt")) as fh:
            cm = load_categories(fh, remap, graph.vertex_count)
        labels = load_labels(os.path.join(dirpath, "labels.bin"))
        postings = {}
        with open(os.path.join(dirpath, manifest["payload"]), "rb") as fh:
            for entry in manifest["categories"]:
                fh.seek(entry["offset"])
                buf = fh.read(entry["length"])
                _members, posting_lists, _outs = parse_category_segment(buf)
                postings[entry["id"]] = InvertedLabelIndex(entry["id"], posting_lists)
        return cls(graph, remap, cm, labels, postings, manifest)


# ---------------------------------------------------------------------------
# Disk view: point reads, one logical open per category/source/destination.


class DiskIndex:
    """Seekable access to the payload; counts logical open operations."""

    def __init__(self, dirpath: str):
        self.dirpath = dirpath
        self.manifest = load_manifest(dirpath)
        self.opens = 1  # the manifest itself
        self._fh = open(os.path.join(dirpath, self.manifest["payload"]), "rb")
        self.vertex_count = int(self.manifest["vertex_count"])

    def close(self) -> None:
        self._fh.close()

    def categories(self) -> list[str]:
        return [e["id"] for e in self.manifest["categories"]]

    def _segment_entry(self, category: str) -> dict:
        for e in self.manifest["categories"]:
            if e["id"] == category:
                return e
        raise IndexDirError(f"category {category!r} not in manifest")

    def load_category(self, category: str):
        entry = self._segment_entry(category)
        self.opens += 1
        self._fh.seek(entry["offset"])
        buf = self._fh.read(entry["length"])
        return parse_category_segment(buf)

    def _fetch_label(self, section: dict, v: int) -> list[tuple[int, int, int]]:
        if not (0 <= v < self.vertex_count):
            raise IndexDirError(f"vertex {v} out of range")
        base = section["offset"] + 8
        self._fh.seek(base + 8 * v)
        lo, hi = struct.unpack("<QQ", self._fh.read(16))
        data_base = base + 8 * (self.vertex_count + 1)
        self._fh.seek(data_base + lo)
        buf = self._fh.read(hi - lo)
        entries, _ = _parse_label_block(buf)
        return entries

    def fetch_out_label(self, v: int) -> list[tuple[int, int, int]]:
        self.opens += 1
        return self._fetch_label(self.manifest["global_out"], v)

    def fetch_in_label(self, v: int) -> list[tuple[int, int, int]]:
        self.opens += 1
        return self._fetch_label(self.manifest["global_in"], v)


class DiskQueryAccess:
    """Label access for one disk-backed query.

    Holds the source's out-label, the destination's in-label, and the
    out-labels bundled in the loaded category segments; exact-distance joins
    are only ever needed against the destination.
    """

    def __init__(self, s: int, source_out: list, dest: int, dest_in: list, segment_outs: dict):
        self._out: dict[int, list[tuple[int, int, int]]] = dict(segment_outs)
        self._out[s] = source_out
        self._dest = dest
        self._dest_in = sorted(dest_in)

    def out_items(self, v: int) -> list[tuple[int, int]]:
        entries = self._out.get(v)
        if entries is None:
            raise IndexDirError(f"out-label of vertex {v} is not resident in disk mode")
        return [(hub, d) for hub, d, _p in entries]

    def dist(self, v: int, t: int) -> int | None:
        if t != self._dest:
            raise IndexDirError("disk mode only joins distances to the query destination")
        if v == self._dest:
            return 0
        entries = self._out.get(v)
        if entries is None:
            raise IndexDirError(f"out-label of vertex {v} is not resident in disk mode")
        best = None
        i, j = 0, 0
        tin = self._dest_in
        while i < len(entries) and j < len(tin):
            hi, hj = entries[i][0], tin[j][0]
            if hi == hj:
                d = entries[i][1] + tin[j][1]
                if best is None or d < best:
                    best = d
                i += 1
                j += 1
            elif hi < hj:
                i += 1
            else:
                j += 1
        return best


def open_disk_query(dirpath: str, s: int, t: int, seq: list[str]):
    """Load exactly the pieces one query needs; returns
    (DiskQueryAccess, postings dict, members dict, DiskIndex)."""
    disk = DiskIndex(dirpath)
    postings: dict[str, InvertedLabelIndex] = {}
    members: dict[str, list[int]] = {}
    segment_outs: dict[int, list] = {}
    for c in dict.fromkeys(seq):
        mem, posting_lists, outs = disk.load_category(c)
        postings[c] = InvertedLabelIndex(c, posting_lists)
        members[c] = mem
        segment_outs.update(outs)
    source_out = disk.fetch_out_label(s)
    dest_in = disk.fetch_in_label(t)
    access = DiskQueryAccess(s, source_out, t, dest_in, segment_outs)
    return access, postings, members, disk


# ---------------------------------------------------------------------------
# Updates.


def apply_category_update(dirpath: str, op: str, v: int, category: str) -> bool:
    """Add or remove one vertex-category membership and rewrite the payload.

    Returns False when the operation was a no-op (membership already in the
    requested state)."""
    from .inverted import add_vertex_category, remove_vertex_category

    mem = MemIndex.load(dirpath)
    if category not in mem.cm.members:
        from .graph import CategoryError

        raise CategoryError(f"unknown category {category!r}")
    il = mem.postings[category]
    if op == "add":
        changed = add_vertex_category(mem.cm, il, mem.labels, v, category)
    elif op == "remove":
        changed = remove_vertex_category(mem.cm, il, mem.labels, v, category)
    else:
        raise ValueError(f"unknown update op {op!r}")
    if not changed:
        return False
    generation = int(mem.manifest.get("generation", 1)) + 1
    old_payload = mem.manifest["payload"]
    _write_payload_and_manifest(dirpath, mem.cm, mem.labels, mem.postings, generation)
    cat_tmp = os.path.join(dirpath, "categories.txt.tmp")
    with open(cat_tmp, "w") as fh:
        write_categories(mem.cm, mem.remap, fh)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(cat_tmp, os.path.join(dirpath, "categories.txt"))
    old_path = os.path.join(dirpath, old_payload)
    if os.path.basename(old_payload) != f"segments-{generation:06d}.bin" and os.path.exists(old_path):
        os.unlink(old_path)
    return True
