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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tvrag {

/// Caption redundancy removal. The per-caption trigger is
/// alpha + beta * H(c) / |c|, clamped to [0, 1].
struct DedupConfig {
    double alpha = 0.6;
    double beta = 0.2;

    void validate() const;
};

/// Segment graph construction and graph-attention enhancement.
struct GraphConfig {
    double alpha = 0.7;  // temporal vs. semantic mix
    double beta = 0.2;   // temporal decay
    int delta = 5;       // hop window
    double tau = 0.8;    // cosine gate
    double lambda = 1.0; // residual weight of the local embedding
    int num_layers = 2;

    void validate() const;
};

struct EncoderConfig {
    int token_dim = 128;
    int hidden_dim = 64;

    void validate() const;
};

struct RetrievalConfig {
    double temperature = 0.1;
    double eta = 0.5;     // novelty weight
    double omega = 0.8;   // kernel diversity weight
    double mu = 0.4;      // Markov strength
    double nu = 0.6;      // log-determinant weight
    double xi = 0.3;      // adjacency transition weight
    int top_m = 8;
    double epsilon_kl = 0.5;
    double psd_ridge = 1e-10;
    double theta_q = 0.6; // sparse query attention threshold

    void validate() const;
};

struct PipelineConfig {
    double segment_size = 30.0;
    bool auto_segment = false;
    std::vector<double> segment_candidates{10, 20, 30, 40, 50, 60};
    double overlap_slack = 0.0;
    DedupConfig dedup;
    GraphConfig graph;
    EncoderConfig encoder;
    RetrievalConfig retrieval;
    std::uint64_t seed = 0;
    int token_budget = 4096;

    void validate() const;
};

/// Applies one `key = value` assignment. Throws Error(invalid_config) on an
/// unknown key or an unparseable value.
void apply_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// Reads a key-value config file: one `key = value` per line, `#` comments.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

std::vector<std::string> config_keys();

nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

} // namespace tvrag
