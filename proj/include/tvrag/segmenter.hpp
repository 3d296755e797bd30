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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvrag/corpus.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

inline constexpr std::string_view kEmptySegmentText = "[no content]";

/// A half-open window [t_start, t_end) and the entries whose start falls in it.
struct Segment {
    std::size_t index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::vector<TimedText> captions;
    std::vector<TimedText> transcripts;
    std::string fused_text;

    bool empty() const { return captions.empty() && transcripts.empty(); }
};

struct SegmentSet {
    std::vector<Segment> segments;
    double segment_size = 0.0;
    double total_duration = 0.0;

    std::size_t count() const { return segments.size(); }
};

/// Number of windows of `segment_size` needed to cover `duration`.
std::size_t segment_count(double duration, double segment_size);

/// Tiles [0, max(durations)) with windows of `segment_size` (the last may be
/// shorter). Entries are assigned whole, by start time. Empty windows are kept.
SegmentSet segment_tracks(const Track& captions, const Track& transcripts, double segment_size);
SegmentSet segment_tracks(const TrackPair& pair, double segment_size);

/// "[<start>-<end>] VISUAL: <text>" / "... AUDIO: <text>" lines in start
/// order, captions first on exact ties, joined by '\n'. Times use one decimal.
std::string fuse_segment_text(const Segment& segment);

/// Content tokens in fused order, skipping "[same as previous]" placeholders.
Tokens segment_tokens(const Segment& segment);

/// Unigram entropy of the segment's raw texts divided by their total length
/// in code points. 0 for an empty segment.
double information_density(const Segment& segment);

/// Minimum density over the non-empty segments of a tiling (0 if none).
double min_information_density(const SegmentSet& set);

std::vector<double> default_segment_candidates();

/// The candidate whose tiling has the largest minimum density over non-empty
/// segments; ties go to the smaller candidate.
double optimal_segment_size(const Track& captions, const Track& transcripts, std::span<const double> candidates);

} // namespace tvrag
