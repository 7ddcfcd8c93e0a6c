import csv
import json

import numpy as np
import pytest

from conftest import write_manifest
from sbembridge.config import BridgeConfig
from sbembridge.encoder import FrameEncoder
from sbembridge.errors import BridgeError, ManifestError
from sbembridge.extract import extract, load_manifest
from sbembridge.frames import sample_frames

# the consumer-side reader; produced files must satisfy its checks
from scbm.embedding import read_embeddings
from scbm.errors import ChecksumMismatch


class TestConfig:
    def test_bad_frame_rate_rejected(self):
        with pytest.raises(BridgeError):
            BridgeConfig(frame_rate=5)

    def test_weights_id_defaults_to_seed(self):
        assert BridgeConfig(seed=7).weights_id == "seeded-random:seed=7"


class TestFrameSampling:
    def test_counts_follow_ceil_rule(self, video_dir):
        assert len(sample_frames(video_dir / "c1.mp4", 1, "c1")) == 1
        assert len(sample_frames(video_dir / "c1.mp4", 10, "c1")) == 10

    def test_rate_above_fps_repeats_frames(self, video_dir):
        # 3 frames at 2 fps -> 1.5 s -> ceil(1.5 * 10) = 15 samples
        frames = sample_frames(video_dir / "short.mp4", 10, "short")
        assert len(frames) == 15

    def test_frames_are_rgb_uint8(self, video_dir):
        (frame,) = sample_frames(video_dir / "c1.mp4", 1, "c1")
        assert frame.dtype == np.uint8 and frame.shape == (48, 64, 3)


class TestEncoder:
    def test_clip_vector_is_frame_mean_and_order_invariant(self, video_dir):
        cfg = BridgeConfig(resize=(128, 96))
        enc = FrameEncoder(cfg)
        frames = sample_frames(video_dir / "c1.mp4", 10, "c1")[:3]
        feats = enc.encode_frames(frames)
        assert feats.shape == (3, 6144)
        fwd = enc.encode_clip(frames)
        rev = enc.encode_clip(list(reversed(frames)))
        assert np.array_equal(fwd, rev)
        assert np.allclose(fwd, feats.mean(axis=0), atol=1e-6)
        assert not np.array_equal(feats[0], feats[1])


@pytest.fixture(scope="session")
def rate1_out(manifest_one, video_dir, out_dir):
    out = out_dir / "base.sbem"
    extract(manifest_one, video_dir, out, BridgeConfig(frame_rate=1))
    return out


class TestExtractConformance:
    @pytest.mark.parametrize("rate", [1, 10])
    def test_both_rates_produce_6144_readable_by_consumer(
        self, manifest_one, video_dir, out_dir, rate
    ):
        out = out_dir / f"rate{rate}.sbem"
        stats = extract(manifest_one, video_dir, out, BridgeConfig(frame_rate=rate))
        assert stats == {"embedded": 1, "rejected": 0}
        got = read_embeddings(out)  # enforces magic, length, and CRC
        assert got.vectors.shape == (1, 6144)
        assert np.all(np.isfinite(got.vectors))
        (key,) = got.keys
        assert (key.subject, key.drive, key.clip) == ("S001", "d1", "c1")
        assert key.scenario == "fwy-interchange" and key.label.value == "ad_aging"

    def test_repeat_runs_byte_identical(self, manifest_one, video_dir, out_dir):
        outs = [out_dir / "rep1.sbem", out_dir / "rep2.sbem"]
        for out in outs:
            extract(manifest_one, video_dir, out, BridgeConfig(frame_rate=1))
        assert outs[0].read_bytes() == outs[1].read_bytes()
        for suffix in (".idx.jsonl", ".meta.json"):
            a = (out_dir / ("rep1.sbem" + suffix)).read_bytes()
            b = (out_dir / ("rep2.sbem" + suffix)).read_bytes()
            assert a == b

    def test_corrupted_payload_fails_consumer_crc(self, rate1_out, out_dir):
        data = bytearray(rate1_out.read_bytes())
        data[30] ^= 0xFF
        bad = out_dir / "bad.sbem"
        bad.write_bytes(bytes(data))
        bad.with_name("bad.sbem.idx.jsonl").write_bytes(
            rate1_out.with_name(rate1_out.name + ".idx.jsonl").read_bytes()
        )
        with pytest.raises(ChecksumMismatch):
            read_embeddings(bad)

    def test_metadata_records_recipe(self, rate1_out):
        meta = json.loads((rate1_out.with_name(rate1_out.name + ".meta.json")).read_text())
        assert meta["dim"] == 6144
        assert meta["model"] == "resnet50"
        assert "6144" in meta["recipe"]
        assert meta["weights"].startswith("seeded-random")


class TestRejects:
    def test_undecodable_clips_listed_never_dropped(self, video_dir, tmp_path):
        manifest = tmp_path / "clips.csv"
        write_manifest(manifest, [
            {"subject_id": "S001", "drive_id": "d1", "clip_id": "c1",
             "scenario": "s", "label": "normal", "file": "c1.mp4"},
            {"subject_id": "S002", "drive_id": "d1", "clip_id": "gone",
             "scenario": "s", "label": "normal", "file": "missing.mp4"},
            {"subject_id": "S003", "drive_id": "d1", "clip_id": "junk",
             "scenario": "s", "label": "normal", "file": "broken.mp4"},
        ])
        out = tmp_path / "o.sbem"
        stats = extract(manifest, video_dir, out, BridgeConfig(frame_rate=1))
        assert stats == {"embedded": 1, "rejected": 2}
        assert len(read_embeddings(out)) == 1
        with open(str(out) + ".rejects.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert sorted(r["clip_id"] for r in rows) == ["gone", "junk"]


class TestManifest:
    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("subject_id,drive_id,clip_id\nS1,d1,c1\n")
        with pytest.raises(ManifestError, match="scenario"):
            load_manifest(path)

    def test_bad_label_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("subject_id,drive_id,clip_id,scenario,label\nS1,d1,c1,s,weird\n")
        with pytest.raises(ManifestError, match="label"):
            load_manifest(path)

    def test_duplicate_clip_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(
            "subject_id,drive_id,clip_id,scenario\nS1,d1,c1,s\nS1,d1,c1,s\n"
        )
        with pytest.raises(ManifestError, match="duplicate"):
            load_manifest(path)

    def test_defaults_applied(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("subject_id,drive_id,clip_id,scenario\nS1,d1,c1,s\n")
        (row,) = load_manifest(path)
        assert row.label == "normal" and row.filename == "c1.mp4"
