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

#include "tvrag/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>

#include "tvrag/error.hpp"
#include "tvrag/retriever.hpp"
#include "tvrag/rng.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

namespace {

using nlohmann::json;

std::optional<std::vector<std::size_t>> read_indices(const json& j, std::string& why) {
    if (!j.is_object() || !j.contains("relevant_segment_indices")) {
        why = "missing relevant_segment_indices";
        return std::nullopt;
    }
    const auto& arr = j.at("relevant_segment_indices");
    if (!arr.is_array()) {
        why = "relevant_segment_indices must be an array";
        return std::nullopt;
    }
    std::vector<std::size_t> out;
    for (const auto& v : arr) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            why = "relevant_segment_indices must hold non-negative integers";
            return std::nullopt;
        }
        out.push_back(v.get<std::size_t>());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::uint64_t query_seed(std::uint64_t seed, std::size_t query) {
    return splitmix64(seed ^ splitmix64(0x5eed0000ULL + query));
}

} // namespace

std::string_view to_string(Selector selector) {
    switch (selector) {
    case Selector::dpp: return "dpp";
    case Selector::greedy: return "greedy";
    case Selector::temporal: return "temporal";
    case Selector::random: return "random";
    }
    return "unknown";
}

Selector parse_selector(std::string_view name) {
    for (const auto s : kAllSelectors)
        if (to_string(s) == name) return s;
    throw Error(Errc::invalid_config, "unknown selector '" + std::string(name) + "'");
}

RetrievalConfig selector_config(RetrievalConfig base, Selector selector) {
    if (selector == Selector::greedy) base.nu = base.xi = base.mu = base.eta = 0.0;
    return base;
}

std::vector<std::size_t> select_segments(const Matrix& embeddings, const Vector& query_embedding,
                                         const RetrievalConfig& config, Selector selector, std::uint64_t seed) {
    const auto k = static_cast<std::size_t>(embeddings.rows());
    if (k == 0) throw Error(Errc::empty_index, "index has no segments");
    const std::size_t m = std::min(static_cast<std::size_t>(config.top_m), k);
    switch (selector) {
    case Selector::dpp:
    case Selector::greedy:
        return greedy_select(embeddings, query_embedding, selector_config(config, selector)).selected();
    case Selector::temporal: {
        std::vector<std::size_t> out(m);
        std::iota(out.begin(), out.end(), std::size_t{0});
        return out;
    }
    case Selector::random: {
        std::vector<std::size_t> all(k);
        std::iota(all.begin(), all.end(), std::size_t{0});
        Rng rng(seed);
        rng.shuffle(all);
        all.resize(m);
        return all;
    }
    }
    return {};
}

QueryFile parse_queries(std::istream& queries, std::istream* answers) {
    QueryFile out;
    std::string line, answer_line;
    std::size_t line_no = 0;
    while (std::getline(queries, line)) {
        ++line_no;
        std::optional<json> answer;
        if (answers) {
            if (std::getline(*answers, answer_line)) {
                try {
                    answer = json::parse(answer_line);
                } catch (const json::exception&) {
                    answer = json();
                }
            } else {
                answer = json();
            }
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto warn = [&](const std::string& why) {
            out.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
            ++out.skipped;
        };
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            warn("not valid JSON");
            continue;
        }
        if (!j.is_object() || !j.contains("question") || !j.at("question").is_string()) {
            warn("missing question");
            continue;
        }
        if (tokenize(normalize_text(j.at("question").get<std::string>())).empty()) {
            warn("empty question");
            continue;
        }
        std::string why;
        const auto relevant = read_indices(answer ? *answer : j, why);
        if (!relevant) {
            warn(why);
            continue;
        }
        out.queries.push_back({j.at("question").get<std::string>(), *relevant});
    }
    return out;
}

QueryFile parse_queries(const std::filesystem::path& queries, const std::optional<std::filesystem::path>& answers) {
    std::ifstream q(queries);
    if (!q) throw Error(Errc::io_error, "cannot open " + queries.string());
    if (!answers) return parse_queries(q);
    std::ifstream a(*answers);
    if (!a) throw Error(Errc::io_error, "cannot open " + answers->string());
    return parse_queries(q, &a);
}

double recall_at(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& relevant) {
    if (relevant.empty()) return 0.0;
    std::size_t hit = 0;
    for (const auto r : relevant)
        if (std::find(selected.begin(), selected.end(), r) != selected.end()) ++hit;
    return static_cast<double>(hit) / static_cast<double>(relevant.size());
}

double reciprocal_rank(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& relevant) {
    for (std::size_t i = 0; i < selected.size(); ++i)
        if (std::find(relevant.begin(), relevant.end(), selected[i]) != relevant.end())
            return 1.0 / static_cast<double>(i + 1);
    return 0.0;
}

EvalReport evaluate_embeddings(const Matrix& embeddings, const std::vector<Vector>& query_embeddings,
                               const std::vector<std::vector<std::size_t>>& relevant, const RetrievalConfig& config,
                               std::uint64_t seed) {
    if (query_embeddings.size() != relevant.size())
        throw Error(Errc::length_mismatch, "one relevance list per query is required");
    EvalReport report;
    const auto k = static_cast<std::size_t>(embeddings.rows());
    report.top_m = std::min(static_cast<std::size_t>(config.top_m), k);
    for (std::size_t q = 0; q < query_embeddings.size(); ++q) {
        const auto& rel = relevant[q];
        if (rel.empty() || std::any_of(rel.begin(), rel.end(), [&](std::size_t r) { return r >= k; })) {
            report.warnings.push_back("query " + std::to_string(q) + ": relevant indices empty or out of range");
            ++report.skipped;
            continue;
        }
        for (const auto s : kAllSelectors) {
            const auto picked = select_segments(embeddings, query_embeddings[q], config, s, query_seed(seed, q));
            auto& m = report.metrics[static_cast<std::size_t>(s)];
            m.recall += recall_at(picked, rel);
            m.mrr += reciprocal_rank(picked, rel);
        }
        ++report.queries;
    }
    if (report.queries > 0)
        for (auto& m : report.metrics) {
            m.recall /= static_cast<double>(report.queries);
            m.mrr /= static_cast<double>(report.queries);
        }
    return report;
}

EvalReport evaluate(const SegmentIndex& index, const EncoderWeights& encoder, const QueryFile& queries,
                    const RetrievalConfig& config, std::uint64_t seed) {
    if (encoder.fingerprint() != index.encoder_fingerprint)
        throw Error(Errc::version_mismatch, "encoder does not match the index encoder");
    std::vector<Vector> embedded;
    std::vector<std::vector<std::size_t>> relevant;
    std::vector<std::string> warnings = queries.warnings;
    std::size_t skipped = queries.skipped;
    for (std::size_t q = 0; q < queries.queries.size(); ++q) {
        try {
            embedded.push_back(encode_query(queries.queries[q].question, encoder, config.theta_q).vector);
            relevant.push_back(queries.queries[q].relevant);
        } catch (const Error& e) {
            if (e.code() != Errc::empty_query) throw;
            warnings.push_back("query " + std::to_string(q) + ": " + e.what());
            ++skipped;
        }
    }
    EvalReport report = evaluate_embeddings(index.enhanced, embedded, relevant, config, seed);
    report.skipped += skipped;
    warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
    report.warnings = std::move(warnings);
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    json selectors = json::object();
    for (const auto s : kAllSelectors)
        selectors[std::string(to_string(s))] = {{"recall_at_m", report.at(s).recall}, {"mrr", report.at(s).mrr}};
    return {{"queries", report.queries},
            {"skipped", report.skipped},
            {"top_m", report.top_m},
            {"selectors", selectors},
            {"warnings", report.warnings}};
}

} // namespace tvrag
