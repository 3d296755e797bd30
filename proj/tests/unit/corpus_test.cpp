// Copyright 2026 The tvrag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sstream>

#include <gtest/gtest.h>

#include "synthetic.hpp"
#include "tvrag/corpus.hpp"
#include "tvrag/error.hpp"
#include "tvrag/text.hpp"

namespace tvrag {
namespace {

Track parse(const std::string& body, TrackKind kind = TrackKind::caption, ParseOptions opts = {}) {
    std::istringstream in(body);
    return parse_track(in, kind, opts);
}

Errc parse_error(const std::string& body, ParseOptions opts = {}) {
    try {
        parse(body, TrackKind::caption, opts);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error for: " << body;
    return Errc::io_error;
}

TEST(Text, NormalizeCollapsesWhitespaceAndComposes) {
    EXPECT_EQ(normalize_text("  a \t dog\n\nruns  "), "a dog runs");
    // "e" + combining acute composes to U+00E9.
    EXPECT_EQ(normalize_text("cafe\xCC\x81"), "caf\xC3\xA9");
    EXPECT_EQ(normalize_text(" \n "), "");
}

TEST(Text, TokenizeSplitsOnSpaces) {
    EXPECT_EQ(tokenize("a dog  runs"), (Tokens{"a", "dog", "runs"}));
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_EQ(join_tokens({"x", "y"}), "x y");
}

TEST(Text, Utf8LengthCountsCodePoints) {
    EXPECT_EQ(utf8_length("abc"), 3u);
    EXPECT_EQ(utf8_length("caf\xC3\xA9"), 4u);
    EXPECT_EQ(utf8_length(""), 0u);
}

TEST(Corpus, ParsesTwoEntries) {
    const Track t = parse("{\"start\":0,\"end\":2,\"text\":\"a dog runs\"}\n{\"start\":2,\"end\":4,\"text\":\"dog jumps\"}\n");
    ASSERT_EQ(t.entries.size(), 2u);
    EXPECT_DOUBLE_EQ(t.duration, 4.0);
    EXPECT_EQ(t.entries[1].text, "dog jumps");
}

TEST(Corpus, SortsByStart) {
    const Track t = parse("{\"start\":2,\"end\":3,\"text\":\"second\"}\n{\"start\":0,\"end\":1,\"text\":\"first\"}\n");
    ASSERT_EQ(t.entries.size(), 2u);
    EXPECT_EQ(t.entries[0].text, "first");
    EXPECT_DOUBLE_EQ(t.entries[1].start, 2.0);
}

TEST(Corpus, ZeroLengthIntervalRejected) {
    EXPECT_EQ(parse_error("{\"start\":1,\"end\":1,\"text\":\"x\"}\n"), Errc::invalid_interval);
}

TEST(Corpus, MalformedLinesRejectedWithLineNumber) {
    try {
        parse("{\"start\":0,\"end\":1,\"text\":\"ok\"}\nnot json\n");
        FAIL();
    } catch (const LineError& e) {
        EXPECT_EQ(e.code(), Errc::malformed_line);
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_EQ(parse_error("[1,2]\n"), Errc::malformed_line);
    EXPECT_EQ(parse_error("{\"start\":0,\"end\":1}\n"), Errc::malformed_line);
    EXPECT_EQ(parse_error("{\"start\":\"0\",\"end\":1,\"text\":\"x\"}\n"), Errc::malformed_line);
}

TEST(Corpus, ExtraKeysIgnoredAndBlankLinesSkipped) {
    const Track t = parse("\n{\"start\":0,\"end\":1,\"text\":\"x\",\"speaker\":\"a\"}\n\n");
    ASSERT_EQ(t.entries.size(), 1u);
}

TEST(Corpus, WhitespaceOnlyTextSkipped) {
    const Track t = parse("{\"start\":0,\"end\":1,\"text\":\"  \"}\n{\"start\":1,\"end\":2,\"text\":\"y\"}\n");
    ASSERT_EQ(t.entries.size(), 1u);
    EXPECT_EQ(t.entries[0].text, "y");
}

TEST(Corpus, EmptyTrackRequiresOptIn) {
    EXPECT_EQ(parse_error(""), Errc::empty_track);
    ParseOptions opts;
    opts.allow_empty = true;
    EXPECT_TRUE(parse("", TrackKind::transcript, opts).empty());
}

TEST(Corpus, OverlapBeyondSlackRejected) {
    const std::string body = "{\"start\":0,\"end\":2,\"text\":\"a\"}\n{\"start\":1.5,\"end\":3,\"text\":\"b\"}\n";
    EXPECT_EQ(parse_error(body), Errc::overlap_exceeded);
    ParseOptions loose;
    loose.overlap_slack = 0.5;
    EXPECT_EQ(parse(body, TrackKind::caption, loose).entries.size(), 2u);
}

TEST(Corpus, MissingFileIsIoError) {
    try {
        parse_track("/nonexistent/captions.jsonl", TrackKind::caption);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::io_error);
    }
}

TEST(Corpus, PairDurationIsMax) {
    const Track c = make_track(TrackKind::caption, {{0, 60, "x"}});
    const Track t = make_track(TrackKind::transcript, {{0, 58, "y"}});
    const TrackPair p = validate_pair(c, t);
    EXPECT_DOUBLE_EQ(p.duration, 60.0);
    EXPECT_FALSE(p.silent);
}

TEST(Corpus, SilentPair) {
    const Track c = make_track(TrackKind::caption, {{0, 10, "x"}});
    ParseOptions opts;
    opts.allow_empty = true;
    const Track t = make_track(TrackKind::transcript, {}, opts);
    const TrackPair p = validate_pair(c, t);
    EXPECT_TRUE(p.silent);
    EXPECT_DOUBLE_EQ(p.duration, 10.0);
}

TEST(Corpus, BothEmptyRejected) {
    ParseOptions opts;
    opts.allow_empty = true;
    const Track c = make_track(TrackKind::caption, {}, opts);
    const Track t = make_track(TrackKind::transcript, {}, opts);
    try {
        validate_pair(c, t);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::empty_track);
    }
}

TEST(Corpus, SwappedKindsRejected) {
    const Track c = make_track(TrackKind::caption, {{0, 1, "x"}});
    const Track t = make_track(TrackKind::transcript, {{0, 1, "y"}});
    try {
        validate_pair(t, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::kind_mismatch);
    }
}

// Property: serialize then parse is the identity on parsed tracks.
TEST(CorpusProperty, SerializeRoundTrip) {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TimedText> entries;
        double t = 0.0;
        const std::size_t n = 1 + rng.below(20);
        for (std::size_t i = 0; i < n; ++i) {
            const double start = t + rng.uniform(0.0, 2.0);
            const double end = start + rng.uniform(0.01, 5.0);
            entries.push_back({start, end, join_tokens(synth::random_tokens(rng, 1 + rng.below(6), 5)) + " \"q\" \xC3\xA9"});
            t = end;
        }
        const Track track = make_track(TrackKind::caption, entries);
        const Track again = parse(serialize_track(track));
        ASSERT_EQ(track, again);
        for (const auto& e : again.entries) {
            EXPECT_GT(e.end, e.start);
            EXPECT_FALSE(e.text.empty());
        }
    }
}

} // namespace
} // namespace tvrag
