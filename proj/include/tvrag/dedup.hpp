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

// Caption redundancy removal.
//
// Consecutive captions are compared with a token-level LCS similarity
// 2|LCS| / (|prev| + |cur|). When the similarity exceeds a threshold that
// grows with the caption's per-token entropy, the tokens of the current
// caption that take part in the LCS are dropped. Only LCS positions can be
// removed, so a token of c_i that never occurs in c_{i-1} always survives.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvrag/config.hpp"
#include "tvrag/corpus.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

inline constexpr std::string_view kSameAsPrevious = "[same as previous]";

/// Positions in `b` of one longest common subsequence of `a` and `b`.
/// Among equally long LCSs the lexicographically smallest position list
/// (leftmost in `b`) is returned, so the result is deterministic.
std::vector<std::size_t> token_lcs(std::span<const std::string> a, std::span<const std::string> b);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

double similarity(std::span<const std::string> prev, std::span<const std::string> cur);
double similarity(std::string_view prev, std::string_view cur);

/// Empirical unigram entropy of whitespace tokens, in bits. 0 for no tokens.
double shannon_entropy(std::span<const std::string> tokens);
double shannon_entropy(std::string_view text);

/// alpha + beta * H(c) / |c| clamped to [0, 1]; |c| counts tokens.
/// Throws Error(empty_caption) for a caption without tokens.
double adaptive_threshold(std::string_view caption, const DedupConfig& config);

/// Removes LCS(prev, cur) positions from cur when similarity > threshold.
std::string dedup_pair_with_threshold(std::string_view prev, std::string_view cur, double threshold);
std::string dedup_pair(std::string_view prev, std::string_view cur, const DedupConfig& config);

/// Share of cur's unigram entropy carried by tokens that do not occur in
/// prev: sum over such tokens w of -p(w) log2 p(w), divided by H(cur).
/// A zero-entropy caption counts as 1 when its token is new, 0 otherwise.
double unique_information_fraction(std::span<const std::string> prev, std::span<const std::string> cur);

struct DedupReport {
    double kappa = 1.0;      // retained characters / original characters
    double iota_proxy = 1.0; // retained new-token occurrences / all new-token occurrences
    std::size_t removed_tokens = 0;
    std::size_t deduplicated_captions = 0;
    std::size_t caption_count = 0;
    // Captions whose threshold is not below 1 - (unique fraction); the
    // retention guarantee's precondition does not hold for them.
    std::size_t condition_violations = 0;
    double min_unique_fraction = 1.0;
};

struct DedupResult {
    std::vector<std::string> captions;
    DedupReport report;
};

/// Sequential pass; every caption is compared with the original (not the
/// deduplicated) predecessor.
DedupResult dedup_stream(std::span<const std::string> captions, const DedupConfig& config);

/// Same as dedup_stream with the threshold fixed for every caption.
DedupResult dedup_stream_with_threshold(std::span<const std::string> captions, double threshold);

/// Applies dedup_stream to a caption track, keeping timestamps.
Track dedup_track(const Track& captions, const DedupConfig& config, DedupReport* report = nullptr);

} // namespace tvrag
