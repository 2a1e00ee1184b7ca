"""Transcript parsing for SRT/VTT/JSONL with line-accurate diagnostics."""

from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sessionlens.errors import TranscriptParseError
from sessionlens.transcripts import parse_transcript, serialize_transcript

SRT = """\
1
00:00:00,200 --> 00:00:01,000
okay I will try the search box

2
00:00:01,200 --> 00:00:01,900
this is confusing
"""

VTT = """\
WEBVTT

00:00.200 --> 00:01.000
okay I will try the search box

cue-2
00:01.200 --> 00:01.900 align:start
this is confusing
"""


class TestSrt:
    def test_basic_parse(self):
        stream = parse_transcript(SRT, "srt")
        assert stream.variant == "text"
        assert [(s.t0_ms, s.t1_ms, s.text) for s in stream.payload] == [
            (200, 1000, "okay I will try the search box"),
            (1200, 1900, "this is confusing")]

    def test_word_counts_filled(self):
        stream = parse_transcript(SRT, "srt")
        assert [s.word_count for s in stream.payload] == [7, 3]

    def test_multiline_cue_joined(self):
        text = "1\n00:00:00,000 --> 00:00:01,000\nline one\nline two\n"
        stream = parse_transcript(text, "srt")
        assert stream.payload[0].text == "line one line two"

    def test_malformed_timestamp_reports_line(self):
        text = "1\n00:00:00,000 --> nonsense\nhello\n"
        with pytest.raises(TranscriptParseError, match="line 2"):
            parse_transcript(text, "srt")

    def test_end_before_start_reports_line(self):
        text = "1\n00:00:02,000 --> 00:00:01,000\nhello\n"
        with pytest.raises(TranscriptParseError, match="line 2"):
            parse_transcript(text, "srt")

    def test_hours_parse(self):
        text = "1\n01:02:03,004 --> 01:02:04,000\nhello\n"
        stream = parse_transcript(text, "srt")
        assert stream.payload[0].t0_ms == 3600_000 + 120_000 + 3004


class TestVtt:
    def test_basic_parse(self):
        stream = parse_transcript(VTT, "vtt")
        assert [(s.t0_ms, s.t1_ms) for s in stream.payload] == [(200, 1000), (1200, 1900)]

    def test_missing_header(self):
        with pytest.raises(TranscriptParseError, match="WEBVTT"):
            parse_transcript("00:00.000 --> 00:01.000\nhi\n", "vtt")

    def test_note_blocks_skipped(self):
        text = "WEBVTT\n\nNOTE internal comment\nmore comment\n\n00:00.000 --> 00:01.000\nhi\n"
        stream = parse_transcript(text, "vtt")
        assert [s.text for s in stream.payload] == ["hi"]

    def test_cue_settings_ignored(self):
        stream = parse_transcript(VTT, "vtt")
        assert stream.payload[1].text == "this is confusing"


class TestJsonl:
    def test_basic_parse(self):
        text = '{"t0_ms": 0, "t1_ms": 500, "text": "hi there"}\n'
        stream = parse_transcript(text, "jsonl")
        assert stream.payload[0].word_count == 2

    def test_missing_key_reports_line(self):
        text = '{"t0_ms": 0, "t1_ms": 500, "text": "ok"}\n{"t0_ms": 0, "text": "bad"}\n'
        with pytest.raises(TranscriptParseError, match="line 2"):
            parse_transcript(text, "jsonl")

    def test_bad_json_reports_line(self):
        with pytest.raises(TranscriptParseError, match="line 1"):
            parse_transcript("{not json}\n", "jsonl")


class TestSerialize:
    def test_jsonl_round_trip_lossless(self):
        stream = parse_transcript(SRT, "srt")
        text = serialize_transcript(stream, "jsonl")
        again = parse_transcript(text, "jsonl")
        assert again.payload == stream.payload

    def test_srt_round_trip(self):
        stream = parse_transcript(SRT, "srt")
        assert parse_transcript(serialize_transcript(stream, "srt"), "srt").payload \
            == stream.payload

    def test_vtt_round_trip(self):
        stream = parse_transcript(VTT, "vtt")
        assert parse_transcript(serialize_transcript(stream, "vtt"), "vtt").payload \
            == stream.payload


segments = st.lists(
    st.tuples(st.integers(0, 10**6), st.integers(1, 5000),
              st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=126),
                      min_size=1, max_size=20)),
    min_size=1, max_size=20)


@given(segments)
def test_all_formats_round_trip_property(raw):
    raw.sort()
    lines = [json.dumps({"t0_ms": t0, "t1_ms": t0 + d, "text": text})
             for t0, d, text in raw]
    stream = parse_transcript("\n".join(lines) + "\n", "jsonl")
    for fmt in ("jsonl", "srt", "vtt"):
        assert parse_transcript(serialize_transcript(stream, fmt), fmt).payload \
            == stream.payload
