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

#include "tvrag/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tvrag/error.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

namespace {

struct Numbered {
    TimedText entry;
    std::size_t line;
};

// Shared tail of parse_track / make_track: normalize, validate intervals,
// sort, check overlaps.
Track finish_track(TrackKind kind, std::vector<Numbered> rows, const ParseOptions& options) {
    std::vector<Numbered> kept;
    kept.reserve(rows.size());
    for (auto& row : rows) {
        auto& e = row.entry;
        if (!std::isfinite(e.start) || !std::isfinite(e.end) || e.start < 0.0)
            throw LineError(Errc::invalid_interval, row.line, "start must be a non-negative finite number");
        if (!(e.end > e.start))
            throw LineError(Errc::invalid_interval, row.line, "end must be greater than start");
        e.text = normalize_text(e.text);
        if (e.text.empty()) continue;
        kept.push_back(std::move(row));
    }

    if (kept.empty() && !options.allow_empty)
        throw Error(Errc::empty_track, std::string(to_string(kind)) + " track has no valid entries");

    std::stable_sort(kept.begin(), kept.end(),
                     [](const Numbered& a, const Numbered& b) { return a.entry.start < b.entry.start; });

    Track track;
    track.kind = kind;
    double max_end = 0.0;
    for (auto& row : kept) {
        if (!track.entries.empty() && max_end - row.entry.start > options.overlap_slack) {
            throw LineError(Errc::overlap_exceeded, row.line,
                            "entry starting at " + std::to_string(row.entry.start) +
                                " overlaps an earlier entry ending at " + std::to_string(max_end));
        }
        max_end = std::max(max_end, row.entry.end);
        track.entries.push_back(std::move(row.entry));
    }
    track.duration = max_end;
    return track;
}

} // namespace

std::string_view to_string(TrackKind kind) {
    return kind == TrackKind::caption ? "caption" : "transcript";
}

Track parse_track(std::istream& in, TrackKind kind, const ParseOptions& options) {
    std::vector<Numbered> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& ex) {
            throw LineError(Errc::malformed_line, lineno, std::string("invalid JSON: ") + ex.what());
        }
        if (!j.is_object())
            throw LineError(Errc::malformed_line, lineno, "expected a JSON object");
        const auto start = j.find("start");
        const auto end = j.find("end");
        const auto text = j.find("text");
        if (start == j.end() || end == j.end() || text == j.end())
            throw LineError(Errc::malformed_line, lineno, "object must have keys start, end, text");
        if (!start->is_number() || !end->is_number() || !text->is_string())
            throw LineError(Errc::malformed_line, lineno, "start/end must be numbers and text a string");

        rows.push_back({TimedText{start->get<double>(), end->get<double>(), text->get<std::string>()}, lineno});
    }
    return finish_track(kind, std::move(rows), options);
}

Track parse_track(const std::filesystem::path& path, TrackKind kind, const ParseOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + std::string(to_string(kind)) + " file " + path.string());
    return parse_track(in, kind, options);
}

Track make_track(TrackKind kind, std::vector<TimedText> entries, const ParseOptions& options) {
    std::vector<Numbered> rows;
    rows.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) rows.push_back({std::move(entries[i]), i + 1});
    return finish_track(kind, std::move(rows), options);
}

std::string serialize_track(const Track& track) {
    std::string out;
    for (const auto& e : track.entries) {
        out += nlohmann::json{{"start", e.start}, {"end", e.end}, {"text", e.text}}.dump();
        out.push_back('\n');
    }
    return out;
}

TrackPair validate_pair(Track captions, Track transcripts) {
    if (captions.kind != TrackKind::caption || transcripts.kind != TrackKind::transcript)
        throw Error(Errc::kind_mismatch, "expected (caption, transcript) tracks, got (" +
                                             std::string(to_string(captions.kind)) + ", " +
                                             std::string(to_string(transcripts.kind)) + ")");
    if (captions.empty() && transcripts.empty())
        throw Error(Errc::empty_track, "both caption and transcript tracks are empty");
    if (captions.empty())
        throw Error(Errc::empty_track, "caption track is empty");

    TrackPair pair;
    pair.duration = std::max(captions.duration, transcripts.duration);
    pair.silent = transcripts.empty();
    pair.captions = std::move(captions);
    pair.transcripts = std::move(transcripts);
    return pair;
}

} // namespace tvrag
