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

#include "tvrag/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "tvrag/dedup.hpp"
#include "tvrag/error.hpp"

namespace tvrag {

namespace {

constexpr double kDensityTieTolerance = 1e-12;

void append_line(std::string& out, const TimedText& e, const char* label) {
    char header[96];
    std::snprintf(header, sizeof header, "[%.1f-%.1f] %s: ", e.start, e.end, label);
    if (!out.empty()) out.push_back('\n');
    out += header;
    out += e.text;
}

std::size_t window_of(double start, double segment_size, std::size_t count) {
    auto k = static_cast<std::size_t>(std::max(0.0, std::floor(start / segment_size)));
    k = std::min(k, count - 1);
    // Division can land one window off near a boundary; settle against the
    // same products used for the window edges.
    while (k + 1 < count && start >= static_cast<double>(k + 1) * segment_size) ++k;
    while (k > 0 && start < static_cast<double>(k) * segment_size) --k;
    return k;
}

} // namespace

std::size_t segment_count(double duration, double segment_size) {
    if (!(segment_size > 0.0) || !std::isfinite(segment_size))
        throw Error(Errc::invalid_segment_size, "segment size must be a positive number");
    if (duration <= 0.0) return 1;
    const double ratio = duration / segment_size;
    auto k = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    // Exact coverage check with the same products used for window edges.
    while (static_cast<double>(k) * segment_size < duration) ++k;
    while (k > 1 && static_cast<double>(k - 1) * segment_size >= duration) --k;
    return std::max<std::size_t>(k, 1);
}

SegmentSet segment_tracks(const Track& captions, const Track& transcripts, double segment_size) {
    const double duration = std::max(captions.duration, transcripts.duration);
    const std::size_t count = segment_count(duration, segment_size);

    SegmentSet set;
    set.segment_size = segment_size;
    set.total_duration = duration;
    set.segments.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto& s = set.segments[k];
        s.index = k;
        s.t_start = static_cast<double>(k) * segment_size;
        s.t_end = k + 1 == count ? duration : static_cast<double>(k + 1) * segment_size;
    }
    for (const auto& e : captions.entries)
        set.segments[window_of(e.start, segment_size, count)].captions.push_back(e);
    for (const auto& e : transcripts.entries)
        set.segments[window_of(e.start, segment_size, count)].transcripts.push_back(e);
    for (auto& s : set.segments) s.fused_text = fuse_segment_text(s);
    return set;
}

SegmentSet segment_tracks(const TrackPair& pair, double segment_size) {
    return segment_tracks(pair.captions, pair.transcripts, segment_size);
}

std::string fuse_segment_text(const Segment& segment) {
    if (segment.empty()) return std::string(kEmptySegmentText);
    std::string out;
    std::size_t c = 0, t = 0;
    const auto& caps = segment.captions;
    const auto& trs = segment.transcripts;
    while (c < caps.size() || t < trs.size()) {
        if (t == trs.size() || (c < caps.size() && caps[c].start <= trs[t].start))
            append_line(out, caps[c++], "VISUAL");
        else
            append_line(out, trs[t++], "AUDIO");
    }
    return out;
}

Tokens segment_tokens(const Segment& segment) {
    Tokens tokens;
    std::size_t c = 0, t = 0;
    const auto& caps = segment.captions;
    const auto& trs = segment.transcripts;
    while (c < caps.size() || t < trs.size()) {
        const bool take_caption = t == trs.size() || (c < caps.size() && caps[c].start <= trs[t].start);
        const TimedText& e = take_caption ? caps[c++] : trs[t++];
        if (e.text == kSameAsPrevious) continue;
        for (auto& tok : tokenize(e.text)) tokens.push_back(std::move(tok));
    }
    return tokens;
}

double information_density(const Segment& segment) {
    Tokens tokens;
    std::size_t chars = 0;
    for (const auto* list : {&segment.captions, &segment.transcripts}) {
        for (const auto& e : *list) {
            chars += utf8_length(e.text);
            for (auto& tok : tokenize(e.text)) tokens.push_back(std::move(tok));
        }
    }
    if (chars == 0) return 0.0;
    return shannon_entropy(tokens) / static_cast<double>(chars);
}

double min_information_density(const SegmentSet& set) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& s : set.segments)
        if (!s.empty()) lowest = std::min(lowest, information_density(s));
    return std::isinf(lowest) ? 0.0 : lowest;
}

std::vector<double> default_segment_candidates() {
    return {10.0, 20.0, 30.0, 40.0, 50.0, 60.0};
}

double optimal_segment_size(const Track& captions, const Track& transcripts, std::span<const double> candidates) {
    if (candidates.empty()) throw Error(Errc::invalid_segment_size, "no segment size candidates");
    double best_size = 0.0;
    double best_density = -std::numeric_limits<double>::infinity();
    for (double size : candidates) {
        const double density = min_information_density(segment_tracks(captions, transcripts, size));
        const bool better = density > best_density + kDensityTieTolerance;
        const bool tie = std::abs(density - best_density) <= kDensityTieTolerance;
        if (better || (tie && size < best_size)) {
            best_size = size;
            best_density = density;
        }
    }
    return best_size;
}

} // namespace tvrag
