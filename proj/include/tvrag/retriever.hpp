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

// Query-time segment selection.
//
// Each greedy step recomputes
//   phi_k = cos(e_k, q) * (1 + eta * novelty_k),  novelty_k = 1 - max_{j in S} cos(e_k, e_j)
//   P     = softmax(phi / rho), rho raised until KL(uniform || P) <= epsilon
//   P'    = Markov-adjusted P (bonus for neighbors of the last pick)
// and picks the unselected k maximizing
//   P'(k) + nu * dlogdet_k + xi * [|k - last| = 1] * P'(k)
// where dlogdet_k is the log-determinant gain in the repaired kernel built
// from P.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tvrag/config.hpp"
#include "tvrag/embedder.hpp"
#include "tvrag/index.hpp"
#include "tvrag/linalg.hpp"

namespace tvrag {

/// Temperature increases allowed before the guard gives up and returns the
/// uniform distribution (KL = 0).
inline constexpr int kMaxTemperatureAdjustments = 64;
inline constexpr double kTemperatureGrowth = 1.5;

/// cos(e_k, q) for every row.
Vector query_cosines(const Matrix& embeddings, const Vector& query);

/// 1 - max_{j in selected} cos(e_k, e_j); all ones when nothing is selected.
Vector novelty(const Matrix& unit_rows, std::span<const std::size_t> selected);

/// phi_k = query_cos_k * (1 + eta * novelty_k).
Vector relevance_scores(const Matrix& unit_rows, const Vector& query_cos, std::span<const std::size_t> selected,
                        double eta);

/// softmax(scores / temperature); -inf scores get probability 0.
Vector softmax_tempered(const Vector& scores, double temperature);

/// softmax(phi / config.temperature) over all segments, selected ones included.
Vector relevance_distribution(const Matrix& embeddings, const Vector& query, std::span<const std::size_t> selected,
                              const RetrievalConfig& config);

/// KL(uniform || p) in bits; +inf when some entry is 0.
double kl_from_uniform(const Vector& p);

struct KlGuardResult {
    Vector probabilities;
    double temperature = 0.0;
    double kl = 0.0;
    int adjustments = 0;
    bool uniform_fallback = false;
};

/// Raises the temperature by kTemperatureGrowth until KL(uniform || P) <= epsilon.
KlGuardResult kl_guard_scores(const Vector& scores, double temperature, double epsilon);

/// Same, for a distribution taken as softmax(log p) at config.temperature.
KlGuardResult kl_guard(const Vector& probabilities, const RetrievalConfig& config);

/// P'(k) = (1 - mu) P(k) + mu * [|k - last| = 1] * max(cos(e_k, q), 0), renormalized.
/// Returns P unchanged without a last pick, or when the adjusted mass is 0.
Vector markov_adjusted(const Vector& probabilities, std::optional<std::size_t> last, const Vector& query_cos, double mu);

struct SelectionStep {
    std::size_t index = 0;
    double score = 0.0;        // marginal gain of the pick
    double probability = 0.0;  // P'(index)
    double delta_logdet = 0.0; // 0 when nu = 0
    double temperature = 0.0;
    double kl = 0.0;
    Vector probabilities; // P' at this step
};

struct RetrievalResult {
    std::vector<SelectionStep> steps;
    double logdet = 0.0; // log det of the selection in the final step's kernel
    double kl_value = 0.0;
    double temperature_used = 0.0;
    bool kernel_repaired = false;
    double min_kernel_eigenvalue = 0.0;

    std::vector<std::size_t> selected() const;
};

/// Greedy selection of min(top_m, K) segments. Throws Error(empty_index) when
/// there are no segments.
RetrievalResult greedy_select(const Matrix& embeddings, const Vector& query_embedding, const RetrievalConfig& config);
RetrievalResult greedy_select(const SegmentIndex& index, const Vector& query_embedding, const RetrievalConfig& config);

/// Encodes the query and runs greedy_select. Throws Error(version_mismatch)
/// when the encoder is not the one the index was built with.
RetrievalResult retrieve(const SegmentIndex& index, std::string_view query, const EncoderWeights& encoder,
                         const RetrievalConfig& config);

nlohmann::json to_json(const RetrievalResult& result, bool with_probabilities = false);

} // namespace tvrag
