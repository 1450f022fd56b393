"""Codebook generation, training, and file-format tests."""

from pathlib import Path

import numpy as np
import pytest

import rvqbeam.codebooks as cb
from rvqbeam.errors import FormatError
from rvqbeam.quantizer import encode_greedy

GOLDEN_PATH = Path(__file__).parent / "data" / "golden_seed7.rvqc"

# frozen once from generate_random(7, 3, 8, 4, 1.0)
GOLDEN_ROWS = {
    (0, 0): [0.001230153371579945, 0.2987455427646637, -0.27413785457611084, -0.8905918598175049],
    (1, 3): [1.3588234186172485, -1.5471446514129639, 0.859382688999176, 0.11935402452945709],
    (2, 7): [-0.33986955881118774, 1.052126407623291, -0.005399560555815697, 0.5833823680877686],
}


class TestGenerateRandom:
    def test_deterministic(self):
        a = cb.generate_random(7, 2, 4, 3, 1.0)
        b = cb.generate_random(7, 2, 4, 3, 1.0)
        for x, y in zip(a.codebooks, b.codebooks):
            np.testing.assert_array_equal(x.entries, y.entries)

    def test_seed_sensitivity(self):
        a = cb.generate_random(7, 2, 4, 3, 1.0)
        b = cb.generate_random(8, 2, 4, 3, 1.0)
        assert any(
            not np.array_equal(x.entries, y.entries)
            for x, y in zip(a.codebooks, b.codebooks)
        )

    def test_golden_values(self):
        books = cb.generate_random(7, 3, 8, 4, 1.0)
        for (level, row), expected in GOLDEN_ROWS.items():
            np.testing.assert_array_equal(books.codebooks[level].entries[row], expected)

    def test_golden_fixture_file(self):
        loaded = cb.load(GOLDEN_PATH)
        books = cb.generate_random(7, 3, 8, 4, 1.0)
        for x, y in zip(loaded.codebooks, books.codebooks):
            np.testing.assert_array_equal(x.entries, y.entries)

    def test_shapes_and_levels(self):
        books = cb.generate_random(1, 5, 6, 2, 0.5)
        assert books.num_levels == 5
        assert books.dim == 2
        assert books.sizes == (6, 6, 6, 6, 6)
        assert [c.level for c in books.codebooks] == [1, 2, 3, 4, 5]

    @pytest.mark.parametrize("bad", [(0, 4, 3), (2, 0, 3), (2, 4, 0)])
    def test_invalid_sizes(self, bad):
        with pytest.raises(ValueError):
            cb.generate_random(0, *bad)

    @pytest.mark.parametrize("scale", [0.0, -1.0, float("nan")])
    def test_invalid_scale(self, scale):
        with pytest.raises(ValueError):
            cb.generate_random(0, 1, 1, 1, scale)


class TestValidation:
    def test_entries_read_only(self):
        books = cb.generate_random(0, 1, 2, 2)
        with pytest.raises(ValueError):
            books.codebooks[0].entries[0, 0] = 1.0

    def test_non_finite_entries_rejected(self):
        with pytest.raises(ValueError):
            cb.Codebook(level=1, entries=np.array([[1.0, np.nan]]))

    def test_level_order_enforced(self):
        a = cb.Codebook(level=1, entries=np.ones((2, 2)))
        with pytest.raises(ValueError):
            cb.CodebookSet((a, a))

    def test_uniform_dim_enforced(self):
        a = cb.Codebook(level=1, entries=np.ones((2, 2)))
        b = cb.Codebook(level=2, entries=np.ones((2, 3)))
        with pytest.raises(ValueError):
            cb.CodebookSet((a, b))

    def test_grouped_needs_shared_level_count(self):
        g1 = cb.generate_random(0, 2, 3, 2)
        g2 = cb.generate_random(1, 3, 3, 4)
        with pytest.raises(ValueError):
            cb.GroupedCodebookSet((g1, g2))

    def test_grouped_dims(self):
        g1 = cb.generate_random(0, 2, 3, 2)
        g2 = cb.generate_random(1, 2, 3, 4)
        gset = cb.GroupedCodebookSet((g1, g2))
        assert gset.group_dims == (2, 4)
        assert gset.total_dim == 6


class TestTrainResidualKmeans:
    def test_k_equals_n_recovers_samples(self):
        rng = np.random.default_rng(3)
        samples = rng.standard_normal((8, 3))
        books = cb.train_residual_kmeans(samples, num_levels=1, size=8, iters=5, seed=0)
        got = {tuple(np.float32(v) for v in row) for row in books.codebooks[0].entries}
        want = {tuple(np.float32(v) for v in row) for row in samples}
        assert got == want

    def test_identical_samples_give_zero_residual_level(self):
        v = np.array([1.5, -2.25, 0.5])  # exactly float32-representable
        samples = np.tile(v, (10, 1))
        books = cb.train_residual_kmeans(samples, num_levels=2, size=1, iters=3, seed=1)
        np.testing.assert_array_equal(books.codebooks[0].entries, v[None, :])
        np.testing.assert_array_equal(books.codebooks[1].entries, np.zeros((1, 3)))

    def test_training_beats_random(self):
        rng = np.random.default_rng(42)
        samples = rng.standard_normal((256, 4)) * 1.5 + rng.integers(0, 2, (256, 1)) * 3.0
        trained = cb.train_residual_kmeans(samples, num_levels=4, size=16, iters=10, seed=5)
        random = cb.generate_random(5, 4, 16, 4)
        err_t = np.mean([encode_greedy(s, trained, 4).sq_err for s in samples])
        err_r = np.mean([encode_greedy(s, random, 4).sq_err for s in samples])
        assert err_t < err_r

    def test_deterministic(self):
        samples = np.random.default_rng(0).standard_normal((40, 3))
        a = cb.train_residual_kmeans(samples, 3, 8, iters=6, seed=9)
        b = cb.train_residual_kmeans(samples, 3, 8, iters=6, seed=9)
        for x, y in zip(a.codebooks, b.codebooks):
            np.testing.assert_array_equal(x.entries, y.entries)

    def test_degenerate_duplicates_stay_finite(self):
        samples = np.tile(np.array([[2.0, -1.0], [2.0, -1.0], [0.5, 0.5]]), (4, 1))
        books = cb.train_residual_kmeans(samples, num_levels=3, size=4, iters=8, seed=2)
        for book in books.codebooks:
            assert np.isfinite(book.entries).all()

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            cb.train_residual_kmeans(np.ones((3, 2)), num_levels=1, size=4, iters=1, seed=0)


class TestFileFormat:
    def test_roundtrip_bit_exact(self, tmp_path):
        books = cb.generate_random(11, 4, 6, 5, 2.0)
        path = tmp_path / "set.rvqc"
        cb.save(books, path)
        back = cb.load(path)
        assert back.sizes == books.sizes
        for x, y in zip(books.codebooks, back.codebooks):
            np.testing.assert_array_equal(x.entries, y.entries)

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.rvqc"
        books = cb.generate_random(0, 1, 2, 2)
        cb.save(books, path)
        data = bytearray(path.read_bytes())
        data[:4] = b"NOPE"
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="magic"):
            cb.load(path)

    def test_wrong_version(self, tmp_path):
        path = tmp_path / "bad.rvqc"
        cb.save(cb.generate_random(0, 1, 2, 2), path)
        data = bytearray(path.read_bytes())
        data[4:6] = (99).to_bytes(2, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="version"):
            cb.load(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "bad.rvqc"
        cb.save(cb.generate_random(0, 1, 2, 2), path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(FormatError, match="payload"):
            cb.load(path)

    def test_trailing_bytes(self, tmp_path):
        path = tmp_path / "bad.rvqc"
        cb.save(cb.generate_random(0, 1, 2, 2), path)
        path.write_bytes(path.read_bytes() + b"\x00\x00")
        with pytest.raises(FormatError, match="payload"):
            cb.load(path)

    def test_non_finite_payload(self, tmp_path):
        path = tmp_path / "bad.rvqc"
        cb.save(cb.generate_random(0, 1, 2, 2), path)
        data = bytearray(path.read_bytes())
        data[20:24] = np.array([np.inf], dtype="<f4").tobytes()
        path.write_bytes(bytes(data))
        with pytest.raises(FormatError, match="non-finite"):
            cb.load(path)

    def test_non_uniform_size_not_serializable(self, tmp_path):
        books = cb.CodebookSet((
            cb.Codebook(level=1, entries=np.ones((2, 2))),
            cb.Codebook(level=2, entries=np.ones((3, 2))),
        ))
        with pytest.raises(ValueError, match="uniform"):
            cb.save(books, tmp_path / "x.rvqc")

    def test_header_layout(self, tmp_path):
        path = tmp_path / "set.rvqc"
        cb.save(cb.generate_random(0, 3, 5, 7), path)
        data = path.read_bytes()
        assert data[:4] == b"RVQC"
        assert int.from_bytes(data[4:6], "little") == 1
        assert int.from_bytes(data[6:8], "little") == 3
        assert int.from_bytes(data[8:12], "little") == 5
        assert int.from_bytes(data[12:16], "little") == 7
        assert int.from_bytes(data[16:20], "little") == 0
        assert len(data) == 20 + 3 * 5 * 7 * 4


class TestGroupedFormat:
    def test_roundtrip(self, tmp_path):
        gset = cb.GroupedCodebookSet((
            cb.generate_random(0, 2, 4, 3),
            cb.generate_random(1, 2, 4, 5),
        ))
        root = tmp_path / "grouped"
        cb.save_grouped(gset, root)
        back = cb.load_grouped(root)
        assert back.group_dims == (3, 5)
        for g1, g2 in zip(gset.groups, back.groups):
            for x, y in zip(g1.codebooks, g2.codebooks):
                np.testing.assert_array_equal(x.entries, y.entries)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FormatError, match="manifest"):
            cb.load_grouped(tmp_path)

    def test_dim_mismatch_in_manifest(self, tmp_path):
        gset = cb.GroupedCodebookSet((cb.generate_random(0, 2, 4, 3),))
        root = tmp_path / "grouped"
        cb.save_grouped(gset, root)
        manifest = (root / "manifest.json").read_text().replace('"dim": 3', '"dim": 4')
        (root / "manifest.json").write_text(manifest)
        with pytest.raises(FormatError, match="dim"):
            cb.load_grouped(root)
