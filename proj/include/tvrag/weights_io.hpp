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

// Weight files: one JSON object
//   {"format": "tvrag-weights", "version": 1, "token_dim", "hidden_dim",
//    "seed", "gat_seed", "gat_layers", "arrays": {name: {"shape": [r, c], "data": [...]}}}
// Arrays are row-major. Names: encoder.{forward,backward}.{w_update,u_update,
// b_update,w_cand,u_cand,b_cand}, encoder.{segment,query}_attention.{w,b,v},
// gat.<l>.{w,a}.

#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "tvrag/context_graph.hpp"
#include "tvrag/embedder.hpp"

namespace tvrag {

inline constexpr std::uint32_t kWeightsFormatVersion = 1;

struct ModelWeights {
    EncoderWeights encoder;
    GatWeights gat;

    /// Deterministic weights for one seed.
    static ModelWeights random(int token_dim, int hidden_dim, int gat_layers, std::uint64_t seed);
};

nlohmann::json weights_to_json(const ModelWeights& weights);
ModelWeights weights_from_json(const nlohmann::json& j);

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path);

} // namespace tvrag
