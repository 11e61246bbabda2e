import hashlib
from pathlib import Path

import pytest

from sls.dataset import (DEFAULT_COUNTS, MissingDataset, evaluate_detector,
                         generate_dataset, load_manifest)
from sls.detection import BlobParams, DetectorSpec


def tree_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted((root / "images").iterdir()):
        digest.update(path.name.encode())
        digest.update(path.read_bytes())
    digest.update((root / "manifest.txt").read_bytes())
    return digest.hexdigest()


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    manifest = generate_dataset(str(root), seed=7,
                                counts={"train": 6, "test": 4, "validation": 8})
    return root, manifest


def test_default_counts_match_published_split(tmp_path):
    manifest = generate_dataset(str(tmp_path), seed=0,
                                counts=dict(DEFAULT_COUNTS))
    assert manifest.total == 212
    assert manifest.count("train") == 132
    assert manifest.count("test") == 50
    assert manifest.count("validation") == 30


def test_minimal_request(tmp_path):
    manifest = generate_dataset(str(tmp_path), seed=3,
                                counts={"train": 1, "test": 1, "validation": 1})
    assert manifest.total == 3
    for entry in manifest.entries:
        assert entry.radius > 0
        assert (tmp_path / entry.path).is_file()


def test_nonpositive_counts_rejected(tmp_path):
    with pytest.raises(ValueError):
        generate_dataset(str(tmp_path), counts={"train": 0, "test": 1, "validation": 1})


def test_same_seed_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    counts = {"train": 3, "test": 2, "validation": 2}
    generate_dataset(str(a), seed=11, counts=counts)
    generate_dataset(str(b), seed=11, counts=counts)
    assert tree_digest(a) == tree_digest(b)


def test_different_seed_differs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    counts = {"train": 2, "test": 1, "validation": 1}
    generate_dataset(str(a), seed=1, counts=counts)
    generate_dataset(str(b), seed=2, counts=counts)
    assert tree_digest(a) != tree_digest(b)


def test_manifest_round_trip(small_dataset):
    root, manifest = small_dataset
    loaded = load_manifest(str(root))
    assert loaded.total == manifest.total
    assert [e.path for e in loaded.entries] == [e.path for e in manifest.entries]
    for written, read in zip(manifest.entries, loaded.entries):
        assert read.cx == pytest.approx(written.cx, abs=1e-4)
        assert read.split == written.split


def test_evaluate_reference_detector(small_dataset):
    root, _ = small_dataset
    manifest = load_manifest(str(root))
    metrics = evaluate_detector(DetectorSpec(), manifest, "validation")
    assert metrics.images == 8
    assert metrics.recall >= 0.99
    assert metrics.false_positives == 0
    assert metrics.mean_centroid_error <= 1.5


def test_evaluate_empty_hue_range_detects_nothing(small_dataset):
    root, _ = small_dataset
    manifest = load_manifest(str(root))
    spec = DetectorSpec(blob=BlobParams(hue_min=10.0, hue_max=10.0))
    metrics = evaluate_detector(spec, manifest, "validation")
    assert metrics.recall == 0.0
    assert metrics.false_positives == 0


def test_missing_dataset_raises(tmp_path):
    with pytest.raises(MissingDataset):
        load_manifest(str(tmp_path / "nowhere"))


def test_empty_split_raises(small_dataset, tmp_path):
    root, _ = small_dataset
    manifest = load_manifest(str(root))
    stripped = type(manifest)(manifest.root,
                              tuple(e for e in manifest.entries if e.split != "test"))
    with pytest.raises(MissingDataset):
        evaluate_detector(DetectorSpec(), stripped, "test")
