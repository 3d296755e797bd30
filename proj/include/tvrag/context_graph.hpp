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

// Segment graph and graph-attention enhancement.
//
// Edge weights mix temporal decay and embedding cosine:
//   A_ij = alpha * exp(-beta |i - j|) + (1 - alpha) * cos(e_i, e_j)
// for |i - j| <= delta or cos >= tau, and 0 otherwise. A_ii = 1.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tvrag/config.hpp"
#include "tvrag/linalg.hpp"

namespace tvrag {

struct Edge {
    std::size_t target = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Symmetric sparse adjacency in compressed-row form. Rows hold every pair
/// that passes the gate (self-loop included), sorted by target.
class ContextGraph {
public:
    ContextGraph() = default;
    ContextGraph(std::vector<std::size_t> row_offsets, std::vector<Edge> edges);

    /// Keeps every non-zero entry of a square matrix.
    static ContextGraph from_dense(const Matrix& adjacency);

    std::size_t size() const { return row_offsets_.empty() ? 0 : row_offsets_.size() - 1; }
    std::size_t edge_count() const { return edges_.size(); }

    std::span<const Edge> row(std::size_t i) const;

    /// A_ij, or 0 when the pair is gated out.
    double weight(std::size_t i, std::size_t j) const;

    /// Attention neighborhood: targets with A_kj > 0.
    std::vector<std::size_t> neighborhood(std::size_t k) const;

    Matrix dense() const;

    const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
    const std::vector<Edge>& edges() const { return edges_; }

    friend bool operator==(const ContextGraph&, const ContextGraph&) = default;

private:
    std::vector<std::size_t> row_offsets_;
    std::vector<Edge> edges_;
};

ContextGraph build_adjacency(const Matrix& local_embeddings, const GraphConfig& config);

struct GatLayer {
    Matrix w; // D x D
    Vector a; // 2D: [self half | neighbor half]
};

struct GatWeights {
    std::uint64_t seed = 0;
    std::vector<GatLayer> layers;

    /// W and a drawn from uniform(-1/sqrt(D), 1/sqrt(D)).
    static GatWeights random(int dim, int num_layers, std::uint64_t seed);

    void validate(int dim) const;
    std::uint64_t fingerprint() const;
};

/// gamma_kj per layer and vertex, aligned with `neighborhood(k)`.
struct GatAttention {
    std::vector<std::vector<std::vector<double>>> coefficients; // [layer][vertex][neighbor]
};

inline constexpr double kLeakySlope = 0.2;

/// Applies every layer of `weights`:
///   e_k <- ELU(sum_{j in N(k)} gamma_kj W e_j),
///   gamma_kj = softmax_j LeakyReLU(a . [W e_k || W e_j]).
Matrix gat_forward(const Matrix& embeddings, const ContextGraph& graph, const GatWeights& weights,
                   GatAttention* trace = nullptr);

/// gat_forward(local) + lambda * local.
Matrix enhance(const Matrix& local_embeddings, const ContextGraph& graph, const GatWeights& weights, double lambda,
               GatAttention* trace = nullptr);

} // namespace tvrag
