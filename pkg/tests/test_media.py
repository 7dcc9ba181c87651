"""Media-model tests: trace parsing, manifest validation, classification, track stats."""

from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from abrsim.media import (
    BandwidthTrace,
    ChunkMeta,
    MediaError,
    Track,
    VideoManifest,
    classify_chunks,
    parse_manifest,
    parse_trace,
    track_avg_bitrate,
    windowed_avg_bitrate,
)

from _builders import cbr_manifest, vbr_manifest


def manifest_json(bitrates, duration=2.0, n_chunks=3, is_vbr=False, sizes=None, vmaf=None):
    tracks = []
    for idx, rate in enumerate(bitrates):
        chunk_sizes = sizes[idx] if sizes else [round(rate * 125 * duration)] * n_chunks
        tracks.append(
            {
                "level": idx + 1,
                "declared_bitrate_kbps": rate,
                "chunks": [{"size_bytes": s, "vmaf": vmaf} for s in chunk_sizes],
            }
        )
    return json.dumps(
        {"name": "test", "chunk_duration_s": duration, "is_vbr": is_vbr, "tracks": tracks}
    )


class TestParseTrace:
    def test_echoes_samples(self):
        trace = parse_trace("t_s,bandwidth_kbps\n0,1000\n1,2000")
        assert trace.samples == (1000.0, 2000.0)

    def test_timestamp_gap_names_line(self):
        with pytest.raises(MediaError, match=r"line 3.*t=1"):
            parse_trace("t_s,bandwidth_kbps\n0,1000\n2,2000")

    def test_non_monotone_timestamp(self):
        with pytest.raises(MediaError, match="line 3"):
            parse_trace("t_s,bandwidth_kbps\n0,1000\n0,2000")

    def test_negative_bandwidth_names_line(self):
        with pytest.raises(MediaError, match="line 2"):
            parse_trace("t_s,bandwidth_kbps\n0,-5")

    def test_malformed_value_names_line(self):
        with pytest.raises(MediaError, match="line 3"):
            parse_trace("t_s,bandwidth_kbps\n0,1000\n1,abc")

    def test_missing_column(self):
        with pytest.raises(MediaError, match="line 2"):
            parse_trace("t_s,bandwidth_kbps\n0")

    def test_bad_header(self):
        with pytest.raises(MediaError, match="header"):
            parse_trace("time,bw\n0,1000")

    def test_empty_body(self):
        with pytest.raises(MediaError):
            parse_trace("t_s,bandwidth_kbps\n")

    def test_constant_half_hour(self):
        text = "t_s,bandwidth_kbps\n" + "\n".join(f"{t},5000" for t in range(1800))
        trace = parse_trace(text)
        assert len(trace.samples) == 1800
        assert sum(trace.samples) / len(trace.samples) == 5000.0

    def test_round_trip_fixed(self):
        trace = BandwidthTrace("rt", (0.0, 1234.5678, 3.1e-3, 987654.0))
        assert parse_trace(trace.to_csv(), name="rt") == trace

    def test_zero_bandwidth_allowed(self):
        assert parse_trace("t_s,bandwidth_kbps\n0,0").samples == (0.0,)

    @given(st.lists(st.floats(min_value=0.0, max_value=1e9), min_size=1, max_size=60))
    def test_round_trip_property(self, values):
        trace = BandwidthTrace("t", tuple(values))
        assert parse_trace(trace.to_csv(), name="t") == trace

    def test_concat_counts_add(self):
        a = BandwidthTrace("a", (1.0, 2.0))
        b = BandwidthTrace("b", (3.0,))
        joined = BandwidthTrace("ab", a.samples + b.samples)
        assert len(joined.samples) == len(a.samples) + len(b.samples)


class TestBandwidthTrace:
    def test_rejects_empty(self):
        with pytest.raises(MediaError):
            BandwidthTrace("x", ())

    def test_rejects_negative(self):
        with pytest.raises(MediaError):
            BandwidthTrace("x", (5.0, -1.0))

    def test_zero_order_hold_and_wrap(self):
        trace = BandwidthTrace("x", (10.0, 20.0))
        assert trace.bandwidth_at(0.0) == 10.0
        assert trace.bandwidth_at(0.99) == 10.0
        assert trace.bandwidth_at(1.5) == 20.0
        assert trace.bandwidth_at(2.0) == 10.0
        assert trace.bandwidth_at(3.7) == 20.0


class TestParseManifest:
    def test_cbr_sizes(self):
        m = parse_manifest(manifest_json([350, 600]))
        assert [t.chunks[0].size_bytes for t in m.tracks] == [87500, 150000]
        assert m.n_chunks == 3 and m.n_levels == 2

    def test_cbr_tolerates_one_byte(self):
        text = manifest_json([350, 600], sizes=[[87501, 87499, 87500], [150000] * 3])
        parse_manifest(text)

    def test_cbr_rejects_two_bytes_off(self):
        text = manifest_json([350, 600], sizes=[[87502, 87500, 87500], [150000] * 3])
        with pytest.raises(MediaError, match="CBR"):
            parse_manifest(text)

    def test_ragged_chunk_counts(self):
        text = manifest_json([350, 600], sizes=[[87500] * 3, [150000] * 4])
        with pytest.raises(MediaError, match="ragged"):
            parse_manifest(text)

    def test_non_contiguous_levels(self):
        raw = json.loads(manifest_json([350, 600]))
        raw["tracks"][1]["level"] = 3
        with pytest.raises(MediaError, match="contiguous"):
            parse_manifest(json.dumps(raw))

    def test_levels_start_at_one(self):
        raw = json.loads(manifest_json([350, 600]))
        for t in raw["tracks"]:
            t["level"] += 1
        with pytest.raises(MediaError, match="contiguous"):
            parse_manifest(json.dumps(raw))

    def test_missing_duration(self):
        raw = json.loads(manifest_json([350, 600]))
        del raw["chunk_duration_s"]
        with pytest.raises(MediaError, match="chunk_duration_s"):
            parse_manifest(json.dumps(raw))

    def test_single_track_rejected(self):
        with pytest.raises(MediaError, match="2 tracks"):
            parse_manifest(manifest_json([350]))

    def test_bitrate_order_enforced(self):
        text = manifest_json(
            [350, 600], is_vbr=True, sizes=[[90000, 90000, 90000], [10000, 10000, 10000]]
        )
        with pytest.raises(MediaError, match="increasing"):
            parse_manifest(text)

    def test_vbr_sizes_free(self):
        text = manifest_json(
            [350, 600], is_vbr=True, sizes=[[1000, 90000, 5000], [2000, 95000, 70000]]
        )
        m = parse_manifest(text)
        assert m.is_vbr

    def test_vmaf_passthrough_and_range(self):
        m = parse_manifest(manifest_json([350, 600], vmaf=93.5))
        assert m.tracks[0].chunks[0].vmaf == 93.5
        with pytest.raises(MediaError, match="vmaf"):
            parse_manifest(manifest_json([350, 600], vmaf=101.0))

    def test_null_vmaf_is_none(self):
        m = parse_manifest(manifest_json([350, 600]))
        assert m.tracks[0].chunks[0].vmaf is None

    def test_six_track_ladder_accepted(self):
        m = parse_manifest(manifest_json([350, 600, 1000, 2000, 3000, 5000]))
        assert m.n_levels == 6

    def test_not_json(self):
        with pytest.raises(MediaError, match="JSON"):
            parse_manifest("not json {")


class TestClassifyChunks:
    def test_ordered_sizes_split_in_quartiles(self):
        sizes = [[1000 * k for k in range(1, 9)]] * 2
        m = vbr_manifest([sizes[0], [2 * s for s in sizes[1]]])
        got = classify_chunks(m, reference_level=1)
        assert got.classes == (1, 1, 2, 2, 3, 3, 4, 4)
        assert got.reference_level == 1

    def test_two_blocks_split_by_rank(self):
        sizes = [10000] * 4 + [100000] * 4
        m = vbr_manifest([sizes, [2 * s for s in sizes]])
        assert classify_chunks(m, 1).classes == (1, 1, 2, 2, 3, 3, 4, 4)

    def test_all_equal_splits_by_position(self):
        # Stable rank on (size, position): ties fall back to playback order.
        sizes = [5000] * 8
        m = vbr_manifest([sizes, [2 * s for s in sizes]])
        assert classify_chunks(m, 1).classes == (1, 1, 2, 2, 3, 3, 4, 4)

    def test_needs_four_chunks(self):
        m = vbr_manifest([[100, 200, 300], [200, 400, 600]])
        with pytest.raises(MediaError, match="4 chunks"):
            classify_chunks(m, 1)

    def test_invalid_reference_level(self):
        m = vbr_manifest([[100, 200, 300, 400], [200, 400, 600, 800]])
        with pytest.raises(MediaError):
            classify_chunks(m, 9)

    @given(
        st.lists(st.integers(min_value=1, max_value=10**6), min_size=4, max_size=41),
    )
    def test_quartile_counts_balanced(self, sizes):
        n = len(sizes)
        m = vbr_manifest([sizes, [s * 2 for s in sizes]])
        classes = classify_chunks(m, 1).classes
        for q in (1, 2, 3, 4):
            count = classes.count(q)
            assert n // 4 - 1 <= count <= -(-n // 4) + 1

    @given(
        st.lists(st.integers(min_value=1, max_value=10**6), min_size=4, max_size=30),
        st.integers(min_value=2, max_value=4),
    )
    def test_reference_invariance_under_shared_rank_order(self, sizes, n_levels):
        # Scaling sizes by a positive factor preserves per-position rank order.
        m = vbr_manifest([[s * k for s in sizes] for k in range(1, n_levels + 1)])
        first = classify_chunks(m, 1).classes
        for level in range(2, n_levels + 1):
            assert classify_chunks(m, level).classes == first


class TestTrackStats:
    def test_track_avg_bitrate(self):
        track = Track(1, 1000.0, tuple(ChunkMeta(250000, 2.0) for _ in range(3)))
        assert track_avg_bitrate(track) == 1000.0

    def test_single_chunk_avg(self):
        track = Track(1, 1000.0, (ChunkMeta(500000, 2.0),))
        assert track_avg_bitrate(track) == 2000.0

    def test_cbr_avg_matches_declared(self):
        m = cbr_manifest([350, 600, 1000], duration_s=2.0, n_chunks=5)
        for t in m.tracks:
            assert track_avg_bitrate(t) == pytest.approx(t.declared_bitrate_kbps, abs=1e-6)

    def test_windowed_avg(self):
        track = Track(1, 2000.0, (ChunkMeta(250000, 2.0), ChunkMeta(750000, 2.0)))
        assert windowed_avg_bitrate(track, 0, 2) == 2000.0
        assert windowed_avg_bitrate(track, 0, 1) == 1000.0
        assert windowed_avg_bitrate(track, 1, 5) == 3000.0

    def test_windowed_rejects_bad_args(self):
        track = Track(1, 2000.0, (ChunkMeta(250000, 2.0),))
        with pytest.raises(MediaError):
            windowed_avg_bitrate(track, 1, 1)
        with pytest.raises(MediaError):
            windowed_avg_bitrate(track, 0, 0)

    @given(st.lists(st.integers(min_value=1, max_value=10**6), min_size=1, max_size=20))
    def test_window_of_one_is_chunk_bitrate(self, sizes):
        track = Track(1, 1.0, tuple(ChunkMeta(s, 2.0) for s in sizes))
        for i, chunk in enumerate(track.chunks):
            assert windowed_avg_bitrate(track, i, 1) == chunk.bitrate_kbps


class TestChunkMeta:
    def test_bitrate_kbps(self):
        assert ChunkMeta(250000, 2.0).bitrate_kbps == 1000.0

    def test_validation(self):
        with pytest.raises(MediaError):
            ChunkMeta(0, 2.0)
        with pytest.raises(MediaError):
            ChunkMeta(100, 0.0)
        with pytest.raises(MediaError):
            ChunkMeta(100, 2.0, -1.0)


class TestManifestAccessors:
    def test_track_and_chunk_lookup(self):
        m = cbr_manifest([350, 600], n_chunks=4)
        assert m.track(2).declared_bitrate_kbps == 600.0
        assert m.chunk(1, 0).size_bytes == 87500
        assert m.bitrate_kbps(2, 3) == pytest.approx(600.0)
        assert m.levels == (1, 2)
        with pytest.raises(MediaError):
            m.track(0)
        with pytest.raises(MediaError):
            m.track(3)

    def test_duration_mismatch_rejected(self):
        chunks_a = (ChunkMeta(87500, 2.0), ChunkMeta(87500, 2.0))
        chunks_b = (ChunkMeta(150000, 2.5), ChunkMeta(150000, 2.5))
        with pytest.raises(MediaError, match="duration"):
            VideoManifest("x", 2.0, True, (Track(1, 350.0, chunks_a), Track(2, 600.0, chunks_b)))
