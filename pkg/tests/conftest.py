"""Shared fixtures: random instances, tie manufacturing, consistency checks."""

import numpy as np
import pytest

from rvqbeam.codebooks import Codebook, CodebookSet


def make_instance(seed, levels, size, dim, scale=1.0, with_ties=False):
    """A seeded (input vector, codebook set) pair.

    With ``with_ties`` every codebook gets one duplicated row, which forces
    exact distance ties whenever that row is among the nearest candidates.
    """
    rng = np.random.default_rng(seed)
    books = []
    for level in range(1, levels + 1):
        entries = np.asarray(rng.standard_normal((size, dim)) * scale, dtype=np.float32)
        entries = entries.astype(np.float64)
        if with_ties and size >= 2:
            src, dst = rng.choice(size, size=2, replace=False)
            entries[dst] = entries[src]
        books.append(Codebook(level=level, entries=entries))
    x = rng.standard_normal(dim) * scale
    return x, CodebookSet(tuple(books))


def assert_result_consistent(x, result, books, rel=1e-6):
    """QuantResult invariants: decode match, recomputed errors, l2 = sqrt(sq)."""
    from rvqbeam.quantizer import decode

    np.testing.assert_array_equal(result.quantized, decode(result.codes, books))
    recomputed = float(((np.asarray(x, dtype=np.float64) - result.quantized) ** 2).sum())
    assert result.sq_err == pytest.approx(recomputed, rel=rel, abs=1e-300)
    assert result.l2_err**2 == pytest.approx(result.sq_err, rel=rel, abs=1e-300)
    assert result.codes.n_q == len(result.codes.indices)


def results_bit_equal(a, b) -> bool:
    return (
        a.codes.indices == b.codes.indices
        and a.sq_err == b.sq_err
        and a.l2_err == b.l2_err
        and np.array_equal(a.quantized, b.quantized)
    )


@pytest.fixture
def demo_books():
    """Scalar three-level instance where greedy encoding is suboptimal."""
    from rvqbeam.cli import demo_codebooks

    return demo_codebooks()


@pytest.fixture
def demo_x():
    return np.array([2.13])
