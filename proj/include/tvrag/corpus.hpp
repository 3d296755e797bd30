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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tvrag {

enum class TrackKind { caption, transcript };

std::string_view to_string(TrackKind kind);

/// One timestamped text unit: a caption for a clip or a transcript line.
struct TimedText {
    double start = 0.0; // seconds
    double end = 0.0;
    std::string text;

    friend bool operator==(const TimedText&, const TimedText&) = default;
};

/// A time-ordered stream of one modality. Entries are sorted by start and
/// `duration >= max(end)`.
struct Track {
    TrackKind kind = TrackKind::caption;
    std::vector<TimedText> entries;
    double duration = 0.0;

    bool empty() const { return entries.empty(); }

    friend bool operator==(const Track&, const Track&) = default;
};

struct ParseOptions {
    double overlap_slack = 0.0;
    // A track with no valid entries is an EmptyTrack error unless this is set.
    bool allow_empty = false;
};

/// Reads line-delimited JSON objects with keys start, end, text. Blank lines
/// and entries whose text normalizes to nothing are skipped; extra keys are
/// ignored.
Track parse_track(const std::filesystem::path& path, TrackKind kind, const ParseOptions& options = {});
Track parse_track(std::istream& in, TrackKind kind, const ParseOptions& options = {});

/// Builds a track from in-memory entries with the same normalization and
/// validation as parse_track. Errors carry the 1-based entry position.
Track make_track(TrackKind kind, std::vector<TimedText> entries, const ParseOptions& options = {});

/// Line-delimited JSON rendering; parse_track(serialize_track(t)) == t.
std::string serialize_track(const Track& track);

struct TrackPair {
    Track captions;
    Track transcripts;
    double duration = 0.0; // max of both track durations
    bool silent = false;   // transcript track is empty
};

TrackPair validate_pair(Track captions, Track transcripts);

} // namespace tvrag
