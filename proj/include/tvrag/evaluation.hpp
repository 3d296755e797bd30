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

// Selector comparison: recall@M and mean reciprocal rank of labelled
// segments under four selection strategies.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tvrag/config.hpp"
#include "tvrag/embedder.hpp"
#include "tvrag/index.hpp"

namespace tvrag {

enum class Selector { dpp, greedy, temporal, random };

inline constexpr std::array<Selector, 4> kAllSelectors{Selector::dpp, Selector::greedy, Selector::temporal,
                                                       Selector::random};

std::string_view to_string(Selector selector);
/// Throws Error(invalid_config) for an unknown name.
Selector parse_selector(std::string_view name);

/// dpp: the config as given. greedy: nu = xi = mu = eta = 0.
RetrievalConfig selector_config(RetrievalConfig base, Selector selector);

/// Ordered selection of min(top_m, K) segments. `seed` drives the random selector.
std::vector<std::size_t> select_segments(const Matrix& embeddings, const Vector& query_embedding,
                                         const RetrievalConfig& config, Selector selector, std::uint64_t seed);

struct EvalQuery {
    std::string question;
    std::vector<std::size_t> relevant;
};

struct QueryFile {
    std::vector<EvalQuery> queries;
    std::vector<std::string> warnings;
    std::size_t skipped = 0;
};

/// Line-JSON {"question": str, "relevant_segment_indices": [int...]}. Bad
/// lines are skipped with a warning. When `answers` is given, its lines
/// (same schema, question optional) supply the relevant indices by position.
QueryFile parse_queries(std::istream& queries, std::istream* answers = nullptr);
QueryFile parse_queries(const std::filesystem::path& queries, const std::optional<std::filesystem::path>& answers = {});

/// Fraction of `relevant` inside `selected`.
double recall_at(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& relevant);
/// 1 / (1-based position of the first relevant pick), 0 when none is picked.
double reciprocal_rank(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& relevant);

struct SelectorMetrics {
    double recall = 0.0;
    double mrr = 0.0;
};

struct EvalReport {
    std::size_t queries = 0;
    std::size_t skipped = 0;
    std::size_t top_m = 0;
    std::vector<std::string> warnings;
    std::array<SelectorMetrics, 4> metrics{}; // indexed like kAllSelectors

    const SelectorMetrics& at(Selector s) const { return metrics[static_cast<std::size_t>(s)]; }
};

/// Query embeddings given directly; entries with no relevant segment or an
/// out-of-range index are counted as skipped.
EvalReport evaluate_embeddings(const Matrix& embeddings, const std::vector<Vector>& query_embeddings,
                               const std::vector<std::vector<std::size_t>>& relevant, const RetrievalConfig& config,
                               std::uint64_t seed);

/// Encodes every question with `encoder` (must match the index).
EvalReport evaluate(const SegmentIndex& index, const EncoderWeights& encoder, const QueryFile& queries,
                    const RetrievalConfig& config, std::uint64_t seed);

nlohmann::json to_json(const EvalReport& report);

} // namespace tvrag
