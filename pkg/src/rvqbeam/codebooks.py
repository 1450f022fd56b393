"""Codebook data model, deterministic generation/training, and file I/O.

A codebook is a table of code vectors used by one quantization level; a
CodebookSet stacks one codebook per level. Entries are held as float64 in
memory so quantization arithmetic is done at full double precision, but the
on-disk format stores little-endian float32. Every constructor in this module
that *produces* codebooks (generation, training, loading) therefore snaps
entries to float32-representable doubles, which makes save/load round-trips
bit-exact for any set the library itself created.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError

_MAGIC = b"RVQC"
_VERSION = 1
_HEADER = struct.Struct("<4sHHIII")  # magic, version, L, S, D, reserved


def _seed64(seed: int) -> int:
    # accept any signed 64-bit value; wrap to the unsigned range numpy needs
    return int(seed) & 0xFFFF_FFFF_FFFF_FFFF


def _f32_grid(arr: np.ndarray) -> np.ndarray:
    """Round to the nearest float32 value, returned as float64."""
    return np.asarray(arr, dtype=np.float32).astype(np.float64)


@dataclass(frozen=True, eq=False)
class Codebook:
    """One quantization level's code table, shape (size, dim), float64."""

    level: int
    entries: np.ndarray

    def __post_init__(self):
        if self.level < 1:
            raise ValueError(f"codebook level must be >= 1, got {self.level}")
        e = np.array(self.entries, dtype=np.float64, order="C", copy=True)
        if e.ndim != 2 or e.shape[0] < 1 or e.shape[1] < 1:
            raise ValueError(f"entries must be a non-empty 2-D array, got shape {e.shape}")
        if not np.isfinite(e).all():
            raise ValueError(f"entries of level {self.level} contain non-finite values")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def dim(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, eq=False)
class CodebookSet:
    """Ordered codebooks for levels 1..L, all sharing one vector dimension."""

    codebooks: tuple[Codebook, ...]

    def __post_init__(self):
        books = tuple(self.codebooks)
        if len(books) < 1:
            raise ValueError("a codebook set needs at least one level")
        for pos, cb in enumerate(books):
            if cb.level != pos + 1:
                raise ValueError(
                    f"codebook at position {pos} has level {cb.level}, expected {pos + 1}"
                )
            if cb.dim != books[0].dim:
                raise ValueError(
                    f"level {cb.level} has dim {cb.dim}, expected {books[0].dim}"
                )
        object.__setattr__(self, "codebooks", books)

    @property
    def num_levels(self) -> int:
        return len(self.codebooks)

    @property
    def dim(self) -> int:
        return self.codebooks[0].dim

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(cb.size for cb in self.codebooks)

    @property
    def uniform_size(self) -> int | None:
        sizes = set(self.sizes)
        return sizes.pop() if len(sizes) == 1 else None


@dataclass(frozen=True, eq=False)
class GroupedCodebookSet:
    """Independent codebook sets applied to consecutive slices of the input."""

    groups: tuple[CodebookSet, ...]

    def __post_init__(self):
        groups = tuple(self.groups)
        if len(groups) < 1:
            raise ValueError("a grouped set needs at least one group")
        levels = {g.num_levels for g in groups}
        if len(levels) != 1:
            raise ValueError(f"all groups must share one level count, got {sorted(levels)}")
        object.__setattr__(self, "groups", groups)

    @property
    def num_groups(self) -> int:
        return len(self.groups)

    @property
    def num_levels(self) -> int:
        return self.groups[0].num_levels

    @property
    def group_dims(self) -> tuple[int, ...]:
        return tuple(g.dim for g in self.groups)

    @property
    def total_dim(self) -> int:
        return sum(self.group_dims)


def generate_random(
    seed: int, num_levels: int, size: int, dim: int, scale: float = 1.0
) -> CodebookSet:
    """Deterministic random codebooks for fixtures and baselines.

    Entries come from a PCG64-seeded standard normal stream multiplied by
    ``scale``, filled level-major, then row-major, then column-major, and
    snapped to float32-representable doubles. Identical arguments produce
    bit-identical sets on every platform.
    """
    if num_levels < 1 or size < 1 or dim < 1:
        raise ValueError(
            f"num_levels, size, dim must all be >= 1, got ({num_levels}, {size}, {dim})"
        )
    if not (scale > 0) or not np.isfinite(scale):
        raise ValueError(f"scale must be a positive finite number, got {scale}")
    rng = np.random.default_rng(_seed64(seed))
    raw = rng.standard_normal((num_levels, size, dim)) * float(scale)
    grid = _f32_grid(raw)
    return CodebookSet(
        tuple(Codebook(level=i + 1, entries=grid[i]) for i in range(num_levels))
    )


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return (diff * diff).sum(axis=2)


def _lloyd(points: np.ndarray, k: int, iters: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded Lloyd iterations; empty clusters steal the farthest point."""
    n = points.shape[0]
    init = rng.choice(n, size=k, replace=False)
    centers = points[init].copy()
    prev = None
    for _ in range(iters):
        d2 = _pairwise_sq(points, centers)
        assign = d2.argmin(axis=1)
        counts = np.bincount(assign, minlength=k)
        if (counts == 0).any():
            dist_own = d2[np.arange(n), assign].copy()
            for empty in np.flatnonzero(counts == 0):
                j = int(dist_own.argmax())
                centers[empty] = points[j]
                assign[j] = empty
                dist_own[j] = -1.0
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign.copy()
        sums = np.zeros((k, points.shape[1]))
        np.add.at(sums, assign, points)
        counts = np.bincount(assign, minlength=k)
        centers = sums / counts[:, None]
    return centers


def train_residual_kmeans(
    samples, num_levels: int, size: int, iters: int = 25, seed: int = 0
) -> CodebookSet:
    """Fit one k-means codebook per level on the running greedy residuals.

    Level 1 clusters the samples themselves; each later level clusters the
    residuals left after assigning every sample to its nearest entry of the
    levels trained so far. Initial centers are ``size`` distinct samples drawn
    from a seeded PCG64 stream, so the result is a pure function of the
    arguments.
    """
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
        raise ValueError(f"samples must be a non-empty 2-D array, got shape {pts.shape}")
    if pts.shape[0] < size:
        raise ValueError(f"need at least {size} samples to fit {size} centers, got {pts.shape[0]}")
    if num_levels < 1 or size < 1:
        raise ValueError(f"num_levels and size must be >= 1, got ({num_levels}, {size})")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    if not np.isfinite(pts).all():
        raise ValueError("samples contain non-finite values")

    rng = np.random.default_rng(_seed64(seed))
    residual = pts.copy()
    books = []
    for level in range(1, num_levels + 1):
        centers = _f32_grid(_lloyd(residual, size, iters, rng))
        books.append(Codebook(level=level, entries=centers))
        assign = _pairwise_sq(residual, centers).argmin(axis=1)
        residual = residual - centers[assign]
    return CodebookSet(tuple(books))


def save(cbs: CodebookSet, path) -> None:
    """Write a set to the self-describing `.rvqc` format.

    Layout: magic ``RVQC`` | u16 version=1 | u16 L | u32 S | u32 D |
    u32 reserved=0 | L*S*D little-endian float32, level-major then row-major.
    Entries not representable in float32 are rounded on write; sets produced
    by this module are already on the float32 grid, so their round-trips are
    bit-exact.
    """
    s = cbs.uniform_size
    if s is None:
        raise ValueError(f"the .rvqc format requires a uniform codebook size, got {cbs.sizes}")
    header = _HEADER.pack(_MAGIC, _VERSION, cbs.num_levels, s, cbs.dim, 0)
    payload = np.stack([cb.entries for cb in cbs.codebooks]).astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def load(path) -> CodebookSet:
    """Read a `.rvqc` file written by :func:`save`."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"header: file is {len(data)} bytes, need {_HEADER.size}")
    magic, version, levels, size, dim, _reserved = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise FormatError(f"magic: expected {_MAGIC!r}, got {magic!r}")
    if version != _VERSION:
        raise FormatError(f"version: expected {_VERSION}, got {version}")
    if levels < 1:
        raise FormatError(f"level count: must be >= 1, got {levels}")
    if size < 1:
        raise FormatError(f"codebook size: must be >= 1, got {size}")
    if dim < 1:
        raise FormatError(f"dim: must be >= 1, got {dim}")
    expected = levels * size * dim * 4
    actual = len(data) - _HEADER.size
    if actual < expected:
        raise FormatError(f"payload: truncated, expected {expected} bytes, got {actual}")
    if actual > expected:
        raise FormatError(f"payload: {actual - expected} trailing bytes after {expected}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    values = values.astype(np.float64).reshape(levels, size, dim)
    books = []
    for i in range(levels):
        if not np.isfinite(values[i]).all():
            raise FormatError(f"payload: non-finite value in level {i + 1}")
        books.append(Codebook(level=i + 1, entries=values[i]))
    return CodebookSet(tuple(books))


_MANIFEST_NAME = "manifest.json"


def save_grouped(gset: GroupedCodebookSet, dirpath) -> None:
    """Store a grouped set as per-group `.rvqc` files plus a JSON manifest."""
    root = Path(dirpath)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for g, group in enumerate(gset.groups):
        name = f"group_{g:02d}.rvqc"
        save(group, root / name)
        entries.append({"file": name, "dim": group.dim})
    manifest = {"format": "rvqc-grouped", "version": 1, "groups": entries}
    (root / _MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def load_grouped(dirpath) -> GroupedCodebookSet:
    """Read a grouped-set directory written by :func:`save_grouped`."""
    root = Path(dirpath)
    mpath = root / _MANIFEST_NAME
    if not mpath.is_file():
        raise FormatError(f"manifest: {mpath} does not exist")
    try:
        manifest = json.loads(mpath.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest: invalid JSON ({exc})") from exc
    if manifest.get("format") != "rvqc-grouped":
        raise FormatError(f"manifest format: expected 'rvqc-grouped', got {manifest.get('format')!r}")
    if manifest.get("version") != 1:
        raise FormatError(f"manifest version: expected 1, got {manifest.get('version')!r}")
    entries = manifest.get("groups")
    if not isinstance(entries, list) or not entries:
        raise FormatError("manifest groups: expected a non-empty list")
    groups = []
    for g, entry in enumerate(entries):
        group = load(root / entry["file"])
        if group.dim != entry["dim"]:
            raise FormatError(
                f"group {g} dim: manifest says {entry['dim']}, file has {group.dim}"
            )
        groups.append(group)
    try:
        return GroupedCodebookSet(tuple(groups))
    except ValueError as exc:
        raise FormatError(f"groups: {exc}") from exc
