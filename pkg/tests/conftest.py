import numpy as np
import pytest

from scbm.core import BinaryLabel, ClipKey, EmbeddingMatrix


def make_matrix(vectors, labels=None, scenario="s1", dtype=np.float32):
    """EmbeddingMatrix from a plain array; labels are 0/1 ints (default 0)."""
    vectors = np.asarray(vectors, dtype=dtype)
    n = vectors.shape[0]
    labels = labels if labels is not None else [0] * n
    keys = [
        ClipKey(
            subject=f"S{i:03d}",
            drive=f"S{i:03d}-d1",
            clip=f"c{i:04d}",
            scenario=scenario,
            label=BinaryLabel.AD_AGING if labels[i] else BinaryLabel.NORMAL,
        )
        for i in range(n)
    ]
    return EmbeddingMatrix(keys, vectors)


def make_matrix_subjects(vectors, labels, subjects, scenario="s1", dtype=np.float32):
    """Matrix where row i belongs to subjects[i]; clip ids stay unique."""
    vectors = np.asarray(vectors, dtype=dtype)
    keys = [
        ClipKey(
            subject=subjects[i],
            drive=f"{subjects[i]}-d1",
            clip=f"{subjects[i]}-c{i:05d}",
            scenario=scenario,
            label=BinaryLabel.AD_AGING if labels[i] else BinaryLabel.NORMAL,
        )
        for i in range(vectors.shape[0])
    ]
    return EmbeddingMatrix(keys, vectors)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
