"""Residual-vector-quantization encoders: greedy, beam search, and exhaustive.

All encoders return a :class:`QuantResult` whose fields are recomputed from
the chosen index path through one shared code path, so ``quantized`` always
equals ``decode(codes)`` and ``sq_err`` always equals the recomputed squared
distance, bit for bit.

Determinism contract: candidates are totally ordered by squared error
ascending, then index path lexicographically ascending. Pruning, the final
pick, and every nearest-neighbor scan obey that order, so each encoder is a
pure function of its arguments and parallel batch encoding is bit-identical
to sequential encoding.
"""

from __future__ import annotations

import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice, product
from pathlib import Path

import numpy as np

from .codebooks import Codebook, CodebookSet, GroupedCodebookSet
from .errors import CapacityError, FormatError

EXHAUSTIVE_GUARD = 10_000_000


@dataclass(frozen=True)
class CodeSequence:
    """Per-level codebook indices identifying one quantized output."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) < 1:
            raise ValueError("a code sequence needs at least one index")
        if any(i < 0 for i in idx):
            raise ValueError(f"indices must be non-negative, got {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def n_q(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, i):
        return self.indices[i]


@dataclass(frozen=True, eq=False)
class BeamNode:
    """An in-progress candidate: accumulated vector, path, and exact error."""

    acc: np.ndarray
    path: tuple[int, ...]
    sq_err: float


@dataclass(frozen=True, eq=False)
class QuantResult:
    """A finished encoding: index path, decoded vector, and its error."""

    codes: CodeSequence
    quantized: np.ndarray
    sq_err: float
    l2_err: float


@dataclass(frozen=True)
class BeamParams:
    """Beam-search knobs: beam size B, per-node search width k, levels used.

    ``search_k`` defaults to ``beam_size`` when not given. Both are clamped
    to the available pool sizes during the search rather than raising.
    """

    beam_size: int
    levels: int
    search_k: int | None = None

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        k = self.beam_size if self.search_k is None else self.search_k
        if k < 1:
            raise ValueError(f"search_k must be >= 1, got {k}")
        object.__setattr__(self, "search_k", int(k))


def _as_vector(x, dim: int) -> np.ndarray:
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.shape != (dim,):
        raise ValueError(f"expected a vector of shape ({dim},), got {v.shape}")
    return v


def _check_levels(cbs: CodebookSet, n_q: int) -> None:
    if not 1 <= n_q <= cbs.num_levels:
        raise ValueError(f"n_q must be in [1, {cbs.num_levels}], got {n_q}")


def _sq_dists(queries: np.ndarray, entries: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances, shape (n_queries, n_entries).

    Broadcast-subtract plus pairwise-sum keeps every distance bit-identical
    regardless of batch shape, which the cross-encoder equivalences rely on.
    """
    diff = queries[:, None, :] - entries[None, :, :]
    return (diff * diff).sum(axis=2)


def top_k_nearest(query, codebook: Codebook, k: int) -> list[tuple[int, float]]:
    """The min(k, S) nearest entries as (index, squared distance) pairs.

    Sorted by distance ascending; exact ties go to the smaller index.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    q = _as_vector(query, codebook.dim)
    d2 = _sq_dists(q[None, :], codebook.entries)[0]
    order = np.argsort(d2, kind="stable")[: min(k, codebook.size)]
    return [(int(i), float(d2[i])) for i in order]


def decode(codes, cbs: CodebookSet) -> np.ndarray:
    """Sum the addressed entries over levels 1..n_q, in level order."""
    indices = tuple(codes.indices) if isinstance(codes, CodeSequence) else tuple(codes)
    _check_levels(cbs, len(indices))
    out = None
    for level, idx in enumerate(indices):
        cb = cbs.codebooks[level]
        if not 0 <= idx < cb.size:
            raise ValueError(f"index {idx} out of range [0, {cb.size}) at level {level + 1}")
        out = cb.entries[idx].copy() if out is None else out + cb.entries[idx]
    return out


def _finalize(x: np.ndarray, path: tuple[int, ...], cbs: CodebookSet) -> QuantResult:
    quantized = decode(path, cbs)
    quantized.setflags(write=False)
    diff = x - quantized
    sq = float((diff * diff).sum())
    return QuantResult(
        codes=CodeSequence(path), quantized=quantized, sq_err=sq, l2_err=math.sqrt(sq)
    )


def encode_greedy(x, cbs: CodebookSet, n_q: int) -> QuantResult:
    """Conventional one-best encoding: each level takes the nearest entry
    to the running residual, ties to the smaller index."""
    _check_levels(cbs, n_q)
    v = _as_vector(x, cbs.dim)
    acc = None
    path = []
    for level in range(n_q):
        r = v if acc is None else v - acc
        j, _ = top_k_nearest(r, cbs.codebooks[level], 1)[0]
        path.append(j)
        chosen = cbs.codebooks[level].entries[j]
        acc = chosen.copy() if acc is None else acc + chosen
    return _finalize(v, tuple(path), cbs)


def beam_search_nodes(x, cbs: CodebookSet, params: BeamParams) -> list[BeamNode]:
    """Run the beam search and return the final beam, best node first.

    Level 1 seeds the beam with the top ``beam_size`` entries nearest to the
    input. Each later level expands every node with the ``search_k`` entries
    nearest to that node's residual (input minus accumulated vector), scores
    each new node by its exact squared error against the input, and prunes
    the pool back to ``beam_size`` under the (error, path) total order.
    Duplicate accumulated vectors reached via different paths are kept.
    """
    v = _as_vector(x, cbs.dim)
    _check_levels(cbs, params.levels)

    first = cbs.codebooks[0].entries
    d2 = _sq_dists(v[None, :], first)[0]
    order = np.argsort(d2, kind="stable")[: min(params.beam_size, first.shape[0])]
    acc = first[order]
    paths = [(int(j),) for j in order]
    errs = [float(d2[j]) for j in order]

    for level in range(1, params.levels):
        entries = cbs.codebooks[level].entries
        k_eff = min(params.search_k, entries.shape[0])
        residuals = v[None, :] - acc
        cand = np.argsort(_sq_dists(residuals, entries), axis=1, kind="stable")[:, :k_eff]
        parents = np.repeat(np.arange(acc.shape[0]), k_eff)
        codes = cand.ravel()
        nodes = acc[parents] + entries[codes]
        diff = v[None, :] - nodes
        pool_errs = (diff * diff).sum(axis=1)
        pool = sorted(
            (
                (float(pool_errs[t]), paths[parents[t]] + (int(codes[t]),), t)
                for t in range(nodes.shape[0])
            ),
            key=lambda item: (item[0], item[1]),
        )[: params.beam_size]
        errs = [item[0] for item in pool]
        paths = [item[1] for item in pool]
        acc = nodes[[item[2] for item in pool]]

    out = []
    for e, p, row in zip(errs, paths, acc):
        vec = row.copy()
        vec.setflags(write=False)
        out.append(BeamNode(acc=vec, path=p, sq_err=e))
    return out


def encode_beam(x, cbs: CodebookSet, params: BeamParams) -> QuantResult:
    """Beam-search encoding; with beam_size=1 and search_k=1 it reproduces
    :func:`encode_greedy` bit for bit."""
    best = beam_search_nodes(x, cbs, params)[0]
    return _finalize(_as_vector(x, cbs.dim), best.path, cbs)


def encode_exhaustive(
    x, cbs: CodebookSet, n_q: int, guard: int = EXHAUSTIVE_GUARD
) -> QuantResult:
    """Global minimum-error code sequence by full enumeration.

    Feasible only for small shapes: raises :class:`CapacityError` when the
    number of combinations exceeds ``guard``. Ties resolve to the
    lexicographically smallest index path.
    """
    _check_levels(cbs, n_q)
    v = _as_vector(x, cbs.dim)
    sizes = cbs.sizes[:n_q]
    total = math.prod(sizes)
    if total > guard:
        raise CapacityError(
            f"{total} code combinations exceed the exhaustive guard of {guard}"
        )
    best_err = math.inf
    best_path = None
    combos = product(*(range(s) for s in sizes))
    chunk_len = 4096
    while True:
        block = list(islice(combos, chunk_len))
        if not block:
            break
        idx = np.asarray(block, dtype=np.intp)
        sums = cbs.codebooks[0].entries[idx[:, 0]]
        for level in range(1, n_q):
            sums = sums + cbs.codebooks[level].entries[idx[:, level]]
        diff = v[None, :] - sums
        errs = (diff * diff).sum(axis=1)
        j = int(errs.argmin())
        if errs[j] < best_err:
            best_err = float(errs[j])
            best_path = block[j]
    return _finalize(v, tuple(best_path), cbs)


def encode_grvq(x, gset: GroupedCodebookSet, params: BeamParams) -> list[QuantResult]:
    """Slice the input by group dims and beam-encode each slice independently."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.shape != (gset.total_dim,):
        raise ValueError(f"expected a vector of shape ({gset.total_dim},), got {v.shape}")
    results = []
    offset = 0
    for group in gset.groups:
        results.append(encode_beam(v[offset : offset + group.dim], group, params))
        offset += group.dim
    return results


def grvq_decode(codes: list, gset: GroupedCodebookSet) -> np.ndarray:
    """Concatenate per-group decodes in group order."""
    if len(codes) != gset.num_groups:
        raise ValueError(f"expected {gset.num_groups} code sequences, got {len(codes)}")
    return np.concatenate([decode(c, g) for c, g in zip(codes, gset.groups)])


def _beam_batch_paths(block: np.ndarray, cbs: CodebookSet, params: BeamParams) -> np.ndarray:
    """Vectorized beam search over a block of samples; returns the best index
    path per sample, shape (n, levels).

    Every step mirrors the per-sample search exactly: distances come from the
    same broadcast-subtract-and-sum, per-node candidates from the same stable
    argsort, and pruning from a lexicographic sort on (sample, error, path),
    so the chosen paths are bit-identical to sequential encoding regardless
    of block size.
    """
    n = block.shape[0]
    bufs: dict[tuple, np.ndarray] = {}

    def scratch(name: str, *shape: int) -> np.ndarray:
        # reused work buffers; every element is overwritten before use
        key = (name, *shape)
        if key not in bufs:
            bufs[key] = np.empty(shape)
        return bufs[key]

    first = cbs.codebooks[0].entries
    diff = scratch("lvl1", n, *first.shape)
    np.subtract(block[:, None, :], first[None, :, :], out=diff)
    np.multiply(diff, diff, out=diff)
    d2 = diff.sum(axis=2)
    order = np.argsort(d2, axis=1, kind="stable")[:, : min(params.beam_size, first.shape[0])]
    paths = order[:, :, None].astype(np.intp)
    acc = first[order]

    for level in range(1, params.levels):
        entries = cbs.codebooks[level].entries
        k_eff = min(params.search_k, entries.shape[0])
        width = acc.shape[1]
        residuals = block[:, None, :] - acc
        diff = scratch("expand", n, width, *entries.shape)
        np.subtract(residuals[:, :, None, :], entries[None, None, :, :], out=diff)
        np.multiply(diff, diff, out=diff)
        d2 = diff.sum(axis=3).reshape(n * width, entries.shape[0])
        cand = np.argsort(d2, axis=1, kind="stable")[:, :k_eff].reshape(n, width, k_eff)

        parents = np.repeat(np.arange(width), k_eff)
        codes = cand.reshape(n, width * k_eff)
        nodes = acc[:, parents, :] + entries[codes]
        diff = scratch("score", n, *nodes.shape[1:])
        np.subtract(block[:, None, :], nodes, out=diff)
        np.multiply(diff, diff, out=diff)
        pool_errs = diff.sum(axis=2)
        pool_paths = np.concatenate([paths[:, parents, :], codes[:, :, None]], axis=2)

        m = pool_errs.shape[1]
        keys = [pool_paths[:, :, d].ravel() for d in range(pool_paths.shape[2] - 1, -1, -1)]
        keys.append(pool_errs.ravel())
        keys.append(np.repeat(np.arange(n), m))
        local = np.lexsort(keys).reshape(n, m) - (np.arange(n) * m)[:, None]
        keep = local[:, : min(params.beam_size, m)]
        paths = np.take_along_axis(pool_paths, keep[:, :, None], axis=1)
        acc = np.take_along_axis(nodes, keep[:, :, None], axis=1)

    return paths[:, 0, :]


def encode_batch(
    xs,
    cbs: CodebookSet,
    params: BeamParams,
    mode: str = "sequential",
    threads: int | None = None,
) -> list[QuantResult]:
    """Beam-encode a batch of vectors.

    ``sequential`` mode maps :func:`encode_beam` over the samples one by one.
    ``parallel`` mode runs the vectorized block search (the whole
    expand-score-prune step as array operations) on chunks of samples spread
    across a thread pool. The two modes are bit-identical: every comparison
    is made on the same values under the same (error, path) total order, so
    neither blocking nor scheduling can change any output. Per-sample
    argument errors are re-raised with the sample index attached.
    """
    if mode not in ("sequential", "parallel"):
        raise ValueError(f"mode must be 'sequential' or 'parallel', got {mode!r}")
    arr = np.asarray(xs, dtype=np.float64)
    if arr.size == 0:
        return []
    if arr.ndim != 2 or arr.shape[1] != cbs.dim:
        raise ValueError(f"expected a batch of shape (n, {cbs.dim}), got {arr.shape}")
    _check_levels(cbs, params.levels)
    n = arr.shape[0]

    if mode == "sequential":
        out = []
        for i in range(n):
            try:
                out.append(encode_beam(arr[i], cbs, params))
            except ValueError as exc:
                raise ValueError(f"sample {i}: {exc}") from exc
        return out

    # chunk size bounds the (chunk, beam, size, dim) expansion tensor
    per_sample = max(1, params.beam_size * max(cbs.sizes) * cbs.dim)
    chunk = int(np.clip(4_000_000 // per_sample, 8, 256))

    def run_block(start: int) -> list[QuantResult]:
        block = arr[start : start + chunk]
        best = _beam_batch_paths(block, cbs, params)
        return [_finalize(block[i], tuple(int(j) for j in best[i]), cbs) for i in range(block.shape[0])]

    starts = range(0, n, chunk)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        blocks = list(pool.map(run_block, starts))
    return [res for blk in blocks for res in blk]


# ---------------------------------------------------------------------------
# Code-sequence serialization: JSON lines and a packed binary stream.
# ---------------------------------------------------------------------------

_REC_HEAD = struct.Struct("<H")


def _as_sequences(items) -> list[CodeSequence]:
    out = []
    for item in items:
        if isinstance(item, QuantResult):
            out.append(item.codes)
        elif isinstance(item, CodeSequence):
            out.append(item)
        else:
            out.append(CodeSequence(tuple(item)))
    return out


def save_codes_jsonl(items, path) -> None:
    """One ``{"n_q": n, "indices": [...]}`` object per line."""
    seqs = _as_sequences(items)
    lines = [json.dumps({"n_q": s.n_q, "indices": list(s.indices)}) for s in seqs]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def load_codes_jsonl(path) -> list[CodeSequence]:
    seqs = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            seq = CodeSequence(tuple(obj["indices"]))
            if obj["n_q"] != seq.n_q:
                raise ValueError(f"n_q {obj['n_q']} != {seq.n_q} indices")
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"line {ln}: {exc}") from exc
        seqs.append(seq)
    return seqs


def save_codes_packed(items, path) -> None:
    """Per sample: u16 level count, then that many little-endian u32 indices."""
    seqs = _as_sequences(items)
    parts = []
    for s in seqs:
        if s.n_q > 0xFFFF:
            raise ValueError(f"n_q {s.n_q} does not fit in u16")
        if any(i > 0xFFFF_FFFF for i in s.indices):
            raise ValueError("index does not fit in u32")
        parts.append(_REC_HEAD.pack(s.n_q) + np.asarray(s.indices, dtype="<u4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_codes_packed(path) -> list[CodeSequence]:
    data = Path(path).read_bytes()
    seqs = []
    pos = 0
    while pos < len(data):
        if pos + _REC_HEAD.size > len(data):
            raise FormatError(f"record {len(seqs)}: truncated level count at byte {pos}")
        (n_q,) = _REC_HEAD.unpack_from(data, pos)
        pos += _REC_HEAD.size
        if n_q < 1:
            raise FormatError(f"record {len(seqs)}: n_q must be >= 1, got {n_q}")
        end = pos + 4 * n_q
        if end > len(data):
            raise FormatError(f"record {len(seqs)}: truncated index payload at byte {pos}")
        idx = np.frombuffer(data, dtype="<u4", count=n_q, offset=pos)
        seqs.append(CodeSequence(tuple(int(i) for i in idx)))
        pos = end
    return seqs
