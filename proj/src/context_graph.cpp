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

#include "tvrag/context_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "tvrag/error.hpp"
#include "tvrag/rng.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

namespace {

// Rows of the cosine matrix computed per GEMM block.
constexpr Eigen::Index kCosineBlockRows = 512;

double leaky_relu(double x) { return x > 0.0 ? x : kLeakySlope * x; }

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

} // namespace

ContextGraph::ContextGraph(std::vector<std::size_t> row_offsets, std::vector<Edge> edges)
    : row_offsets_(std::move(row_offsets)), edges_(std::move(edges)) {
    if (row_offsets_.empty() || row_offsets_.front() != 0 || row_offsets_.back() != edges_.size())
        throw Error(Errc::corrupt_file, "context graph: inconsistent row offsets");
    for (std::size_t i = 0; i + 1 < row_offsets_.size(); ++i) {
        if (row_offsets_[i] > row_offsets_[i + 1])
            throw Error(Errc::corrupt_file, "context graph: row offsets must be non-decreasing");
        for (std::size_t e = row_offsets_[i]; e < row_offsets_[i + 1]; ++e) {
            if (edges_[e].target >= row_offsets_.size() - 1)
                throw Error(Errc::corrupt_file, "context graph: edge target out of range");
            if (e > row_offsets_[i] && edges_[e - 1].target >= edges_[e].target)
                throw Error(Errc::corrupt_file, "context graph: row targets must be strictly increasing");
        }
    }
}

ContextGraph ContextGraph::from_dense(const Matrix& adjacency) {
    if (adjacency.rows() != adjacency.cols())
        throw Error(Errc::dimension_mismatch, "adjacency must be square");
    std::vector<std::size_t> offsets{0};
    std::vector<Edge> edges;
    for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
        for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != 0.0) edges.push_back({static_cast<std::size_t>(j), adjacency(i, j)});
        offsets.push_back(edges.size());
    }
    return ContextGraph(std::move(offsets), std::move(edges));
}

std::span<const Edge> ContextGraph::row(std::size_t i) const {
    return std::span<const Edge>(edges_).subspan(row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]);
}

double ContextGraph::weight(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.begin(), r.end(), j, [](const Edge& e, std::size_t t) { return e.target < t; });
    return it != r.end() && it->target == j ? it->weight : 0.0;
}

std::vector<std::size_t> ContextGraph::neighborhood(std::size_t k) const {
    std::vector<std::size_t> out;
    for (const auto& e : row(k))
        if (e.weight > 0.0) out.push_back(e.target);
    return out;
}

Matrix ContextGraph::dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Matrix m = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < size(); ++i)
        for (const auto& e : row(i)) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e.target)) = e.weight;
    return m;
}

ContextGraph build_adjacency(const Matrix& local_embeddings, const GraphConfig& config) {
    config.validate();
    const Eigen::Index k_count = local_embeddings.rows();
    if (k_count == 0) return ContextGraph({0}, {});
    if (!local_embeddings.allFinite())
        throw Error(Errc::dimension_mismatch, "local embeddings must be finite");

    const Matrix unit = normalized_rows(local_embeddings);
    const auto delta = static_cast<Eigen::Index>(config.delta);

    // Upper-triangle pairs only; the lower triangle mirrors them so that
    // A_ij and A_ji are the same double.
    std::vector<std::vector<Edge>> rows(static_cast<std::size_t>(k_count));
    for (Eigen::Index r0 = 0; r0 < k_count; r0 += kCosineBlockRows) {
        const Eigen::Index block = std::min(kCosineBlockRows, k_count - r0);
        const Matrix cos_block = unit.middleRows(r0, block) * unit.transpose();
        for (Eigen::Index bi = 0; bi < block; ++bi) {
            const Eigen::Index i = r0 + bi;
            for (Eigen::Index j = i + 1; j < k_count; ++j) {
                const Eigen::Index gap = j - i;
                const double c = cos_block(bi, j);
                if (gap > delta && !(c >= config.tau)) continue;
                const double w = config.alpha * std::exp(-config.beta * static_cast<double>(gap)) + (1.0 - config.alpha) * c;
                rows[static_cast<std::size_t>(i)].push_back({static_cast<std::size_t>(j), w});
                rows[static_cast<std::size_t>(j)].push_back({static_cast<std::size_t>(i), w});
            }
        }
    }

    std::vector<std::size_t> offsets{0};
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& r = rows[i];
        r.push_back({i, 1.0});
        std::sort(r.begin(), r.end(), [](const Edge& a, const Edge& b) { return a.target < b.target; });
        edges.insert(edges.end(), r.begin(), r.end());
        offsets.push_back(edges.size());
        std::vector<Edge>().swap(r);
    }
    return ContextGraph(std::move(offsets), std::move(edges));
}

GatWeights GatWeights::random(int dim, int num_layers, std::uint64_t seed) {
    if (dim <= 0 || num_layers < 0) throw Error(Errc::dimension_mismatch, "invalid GAT dimensions");
    Rng rng(seed ^ 0x6a09e667f3bcc909ULL);
    const double s = 1.0 / std::sqrt(static_cast<double>(dim));
    GatWeights w;
    w.seed = seed;
    for (int l = 0; l < num_layers; ++l) {
        GatLayer layer;
        layer.w.resize(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) layer.w(i, j) = rng.uniform(-s, s);
        layer.a.resize(2 * dim);
        for (Eigen::Index i = 0; i < 2 * dim; ++i) layer.a(i) = rng.uniform(-s, s);
        w.layers.push_back(std::move(layer));
    }
    return w;
}

void GatWeights::validate(int dim) const {
    for (const auto& layer : layers) {
        if (layer.w.rows() != dim || layer.w.cols() != dim || layer.a.size() != 2 * dim)
            throw Error(Errc::dimension_mismatch, "GAT layer does not match embedding dimension " + std::to_string(dim));
        if (!layer.w.allFinite() || !layer.a.allFinite())
            throw Error(Errc::dimension_mismatch, "GAT weights must be finite");
    }
}

std::uint64_t GatWeights::fingerprint() const {
    std::uint64_t h = fnv1a64("tvrag-gat");
    h = fnv1a64(std::to_string(layers.size()), h);
    const auto mix = [&h](double x) {
        char bytes[sizeof x];
        std::memcpy(bytes, &x, sizeof x);
        h = fnv1a64(std::string_view(bytes, sizeof bytes), h);
    };
    for (const auto& layer : layers) {
        for (Eigen::Index i = 0; i < layer.w.size(); ++i) mix(layer.w.data()[i]);
        for (Eigen::Index i = 0; i < layer.a.size(); ++i) mix(layer.a(i));
    }
    return h;
}

Matrix gat_forward(const Matrix& embeddings, const ContextGraph& graph, const GatWeights& weights,
                   GatAttention* trace) {
    const Eigen::Index k_count = embeddings.rows();
    const Eigen::Index dim = embeddings.cols();
    if (static_cast<std::size_t>(k_count) != graph.size())
        throw Error(Errc::dimension_mismatch, "graph has " + std::to_string(graph.size()) + " vertices, embeddings " +
                                                  std::to_string(k_count));
    weights.validate(static_cast<int>(dim));
    if (trace) trace->coefficients.clear();

    Matrix current = embeddings;
    std::vector<std::size_t> nbrs;
    std::vector<double> logits;
    for (const auto& layer : weights.layers) {
        const Matrix projected = current * layer.w.transpose();
        const Vector self_score = projected * layer.a.head(dim);
        const Vector nbr_score = projected * layer.a.tail(dim);

        Matrix next(k_count, dim);
        std::vector<std::vector<double>> layer_trace;
        if (trace) layer_trace.resize(static_cast<std::size_t>(k_count));
        for (Eigen::Index k = 0; k < k_count; ++k) {
            nbrs.clear();
            for (const auto& e : graph.row(static_cast<std::size_t>(k)))
                if (e.weight > 0.0) nbrs.push_back(e.target);

            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim);
            if (!nbrs.empty()) {
                logits.resize(nbrs.size());
                double top = -std::numeric_limits<double>::infinity();
                for (std::size_t n = 0; n < nbrs.size(); ++n) {
                    logits[n] = leaky_relu(self_score(k) + nbr_score(static_cast<Eigen::Index>(nbrs[n])));
                    top = std::max(top, logits[n]);
                }
                double total = 0.0;
                for (auto& l : logits) {
                    l = std::exp(l - top);
                    total += l;
                }
                for (std::size_t n = 0; n < nbrs.size(); ++n) {
                    logits[n] /= total;
                    acc.noalias() += logits[n] * projected.row(static_cast<Eigen::Index>(nbrs[n]));
                }
                if (trace) layer_trace[static_cast<std::size_t>(k)] = logits;
            }
            next.row(k) = acc.unaryExpr([](double x) { return elu(x); });
        }
        current = std::move(next);
        if (trace) trace->coefficients.push_back(std::move(layer_trace));
    }
    return current;
}

Matrix enhance(const Matrix& local_embeddings, const ContextGraph& graph, const GatWeights& weights, double lambda,
               GatAttention* trace) {
    return gat_forward(local_embeddings, graph, weights, trace) + lambda * local_embeddings;
}

} // namespace tvrag
