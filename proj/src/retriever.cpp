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

#include "tvrag/retriever.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tvrag/dpp.hpp"
#include "tvrag/error.hpp"

namespace tvrag {

namespace {

KlGuardResult guard_logits(const Vector& logits, double temperature, double epsilon) {
    KlGuardResult out;
    out.temperature = temperature;
    out.probabilities = softmax_tempered(logits, temperature);
    out.kl = kl_from_uniform(out.probabilities);
    while (out.kl > epsilon) {
        if (out.adjustments == kMaxTemperatureAdjustments) {
            const auto n = logits.size();
            out.probabilities = Vector::Constant(n, 1.0 / static_cast<double>(n));
            out.temperature = std::numeric_limits<double>::infinity();
            out.kl = 0.0;
            out.uniform_fallback = true;
            break;
        }
        out.temperature *= kTemperatureGrowth;
        ++out.adjustments;
        out.probabilities = softmax_tempered(logits, out.temperature);
        out.kl = kl_from_uniform(out.probabilities);
    }
    return out;
}

bool adjacent(std::size_t k, std::optional<std::size_t> last) {
    return last && (k + 1 == *last || *last + 1 == k);
}

} // namespace

Vector query_cosines(const Matrix& embeddings, const Vector& query) {
    if (embeddings.cols() != query.size())
        throw Error(Errc::dimension_mismatch, "query has dimension " + std::to_string(query.size()) +
                                                  ", segments " + std::to_string(embeddings.cols()));
    const double qn = query.norm();
    if (qn == 0.0) return Vector::Zero(embeddings.rows());
    return normalized_rows(embeddings) * (query / qn);
}

Vector novelty(const Matrix& unit_rows, std::span<const std::size_t> selected) {
    const Eigen::Index k = unit_rows.rows();
    if (selected.empty()) return Vector::Ones(k);
    Vector best = Vector::Constant(k, -std::numeric_limits<double>::infinity());
    for (const auto j : selected) best = best.cwiseMax(unit_rows * unit_rows.row(static_cast<Eigen::Index>(j)).transpose());
    return (1.0 - best.array()).matrix();
}

Vector relevance_scores(const Matrix& unit_rows, const Vector& query_cos, std::span<const std::size_t> selected,
                        double eta) {
    return (query_cos.array() * (1.0 + eta * novelty(unit_rows, selected).array())).matrix();
}

Vector softmax_tempered(const Vector& scores, double temperature) {
    if (!(temperature > 0.0)) throw Error(Errc::invalid_config, "temperature must be positive");
    const double top = scores.maxCoeff();
    Vector p = ((scores.array() - top) / temperature).exp().matrix();
    return p / p.sum();
}

Vector relevance_distribution(const Matrix& embeddings, const Vector& query, std::span<const std::size_t> selected,
                              const RetrievalConfig& config) {
    const Matrix unit = normalized_rows(embeddings);
    return softmax_tempered(relevance_scores(unit, query_cosines(embeddings, query), selected, config.eta),
                            config.temperature);
}

double kl_from_uniform(const Vector& p) {
    const auto n = static_cast<double>(p.size());
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (!(p(i) > 0.0)) return std::numeric_limits<double>::infinity();
        kl += std::log2(1.0 / (n * p(i)));
    }
    return std::max(0.0, kl / n);
}

KlGuardResult kl_guard_scores(const Vector& scores, double temperature, double epsilon) {
    if (scores.size() == 0) throw Error(Errc::empty_index, "no segments to weigh");
    return guard_logits(scores, temperature, epsilon);
}

KlGuardResult kl_guard(const Vector& probabilities, const RetrievalConfig& config) {
    if (probabilities.size() == 0) throw Error(Errc::empty_index, "no segments to weigh");
    // p = softmax(logits / rho) with logits = rho * log p.
    const Vector logits = probabilities.unaryExpr([&](double x) {
        return x > 0.0 ? config.temperature * std::log(x) : -std::numeric_limits<double>::infinity();
    });
    return guard_logits(logits, config.temperature, config.epsilon_kl);
}

Vector markov_adjusted(const Vector& probabilities, std::optional<std::size_t> last, const Vector& query_cos,
                       double mu) {
    if (!last || mu == 0.0) return probabilities;
    Vector out = (1.0 - mu) * probabilities;
    for (Eigen::Index k = 0; k < out.size(); ++k)
        if (adjacent(static_cast<std::size_t>(k), last)) out(k) += mu * std::max(query_cos(k), 0.0);
    const double total = out.sum();
    if (!(total > 0.0)) return probabilities;
    return out / total;
}

std::vector<std::size_t> RetrievalResult::selected() const {
    std::vector<std::size_t> out;
    for (const auto& s : steps) out.push_back(s.index);
    return out;
}

RetrievalResult greedy_select(const Matrix& embeddings, const Vector& query_embedding, const RetrievalConfig& config) {
    config.validate();
    const auto k_count = static_cast<std::size_t>(embeddings.rows());
    if (k_count == 0) throw Error(Errc::empty_index, "index has no segments");
    const Matrix unit = normalized_rows(embeddings);
    const Vector query_cos = query_cosines(embeddings, query_embedding);
    const std::size_t m = std::min(static_cast<std::size_t>(config.top_m), k_count);

    RetrievalResult result;
    result.temperature_used = config.temperature;
    std::vector<std::size_t> selected;
    std::vector<bool> taken(k_count, false);
    std::optional<std::size_t> last;
    // max_{j in S} cos(e_k, e_j), updated with each pick.
    Vector max_cos = Vector::Constant(static_cast<Eigen::Index>(k_count), -std::numeric_limits<double>::infinity());
    Matrix workspace;

    for (std::size_t step = 0; step < m; ++step) {
        const Vector phi = selected.empty()
                               ? Vector((query_cos.array() * (1.0 + config.eta)).matrix())
                               : Vector((query_cos.array() * (1.0 + config.eta * (1.0 - max_cos.array()))).matrix());
        // The temperature never drops between steps.
        const KlGuardResult guarded = guard_logits(phi, result.temperature_used, config.epsilon_kl);
        if (std::isfinite(guarded.temperature)) result.temperature_used = guarded.temperature;
        result.kl_value = std::max(result.kl_value, guarded.kl);
        const Vector adjusted = markov_adjusted(guarded.probabilities, last, query_cos, config.mu);

        const bool final_step = step + 1 == m;
        const bool use_kernel = config.nu != 0.0 || final_step;
        LowRankKernel kernel;
        IncrementalCholesky chol;
        if (use_kernel) {
            kernel = LowRankKernel::build(guarded.probabilities, unit, config.omega, config.psd_ridge, &workspace);
            result.kernel_repaired = result.kernel_repaired || kernel.repaired();
            result.min_kernel_eigenvalue = std::min(result.min_kernel_eigenvalue, kernel.min_eigenvalue());
            if (!selected.empty()) chol.reset(selected, kernel_submatrix(kernel, selected));
        }

        std::size_t best = k_count;
        bool best_finite = false;
        double best_score = 0.0, best_rank = 0.0, best_delta = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            if (taken[k]) continue;
            const auto ki = static_cast<Eigen::Index>(k);
            const double p = adjusted(ki);
            const double base = p + (adjacent(k, last) ? config.xi * p : 0.0);
            double delta = 0.0;
            if (config.nu != 0.0) delta = delta_logdet(chol, kernel, k);
            const bool finite = delta != kNegInf;
            const double score = finite ? base + config.nu * delta : kNegInf;
            // Among -inf candidates the relevance part still orders them.
            const double rank = finite ? score : base;
            if (best == k_count || (finite && !best_finite) || (finite == best_finite && rank > best_rank)) {
                best = k;
                best_finite = finite;
                best_score = score;
                best_rank = rank;
                best_delta = delta;
            }
        }

        SelectionStep s;
        s.index = best;
        s.score = best_score;
        s.probability = adjusted(static_cast<Eigen::Index>(best));
        s.delta_logdet = best_delta;
        s.temperature = result.temperature_used;
        s.kl = guarded.kl;
        s.probabilities = adjusted;
        result.steps.push_back(std::move(s));

        if (final_step) {
            const double gain = config.nu != 0.0 ? best_delta : delta_logdet(chol, kernel, best);
            result.logdet = gain == kNegInf ? kNegInf : chol.logdet() + gain;
        }
        taken[best] = true;
        selected.push_back(best);
        max_cos = max_cos.cwiseMax(unit * unit.row(static_cast<Eigen::Index>(best)).transpose());
        last = best;
    }
    return result;
}

RetrievalResult greedy_select(const SegmentIndex& index, const Vector& query_embedding, const RetrievalConfig& config) {
    return greedy_select(index.enhanced, query_embedding, config);
}

RetrievalResult retrieve(const SegmentIndex& index, std::string_view query, const EncoderWeights& encoder,
                         const RetrievalConfig& config) {
    if (encoder.fingerprint() != index.encoder_fingerprint)
        throw Error(Errc::version_mismatch, "encoder " + fingerprint_hex(encoder.fingerprint()) +
                                                " does not match the index encoder " +
                                                fingerprint_hex(index.encoder_fingerprint));
    if (index.size() == 0) throw Error(Errc::empty_index, "index has no segments");
    const PooledEmbedding q = encode_query(query, encoder, config.theta_q);
    return greedy_select(index, q.vector, config);
}

nlohmann::json to_json(const RetrievalResult& result, bool with_probabilities) {
    using nlohmann::json;
    const auto num = [](double x) -> json {
        if (std::isfinite(x)) return x;
        return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
    };
    json steps = json::array();
    for (const auto& s : result.steps) {
        json j = {{"index", s.index},
                  {"score", num(s.score)},
                  {"probability", s.probability},
                  {"delta_logdet", num(s.delta_logdet)},
                  {"temperature", num(s.temperature)},
                  {"kl", s.kl}};
        if (with_probabilities) j["probabilities"] = std::vector<double>(s.probabilities.data(), s.probabilities.data() + s.probabilities.size());
        steps.push_back(std::move(j));
    }
    return {{"selected", result.selected()},
            {"steps", steps},
            {"logdet", num(result.logdet)},
            {"kl_value", result.kl_value},
            {"temperature_used", num(result.temperature_used)},
            {"kernel_repaired", result.kernel_repaired},
            {"min_kernel_eigenvalue", result.min_kernel_eigenvalue}};
}

} // namespace tvrag
