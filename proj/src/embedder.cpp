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

#include "tvrag/embedder.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>

#include "tvrag/error.hpp"
#include "tvrag/rng.hpp"

namespace tvrag {

namespace {

constexpr int kHashProbes = 4;

Matrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
    return m;
}

Vector uniform_vector(Rng& rng, Eigen::Index n, double scale) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(-scale, scale);
    return v;
}

GruDirection random_direction(Rng& rng, int d, int h) {
    const double s = 1.0 / std::sqrt(static_cast<double>(h));
    GruDirection g;
    g.w_update = uniform_matrix(rng, h, d, s);
    g.u_update = uniform_matrix(rng, h, h, s);
    g.b_update = Vector::Zero(h);
    g.w_cand = uniform_matrix(rng, h, d, s);
    g.u_cand = uniform_matrix(rng, h, h, s);
    g.b_cand = Vector::Zero(h);
    return g;
}

AttentionParams random_attention(Rng& rng, int h) {
    const double s = 1.0 / std::sqrt(static_cast<double>(h));
    AttentionParams a;
    a.w = uniform_matrix(rng, h, 2 * h, s);
    a.b = Vector::Zero(h);
    a.v = uniform_vector(rng, h, s);
    return a;
}

void expect_shape(bool ok, const char* what) {
    if (!ok) throw Error(Errc::dimension_mismatch, std::string("encoder weights: ") + what);
}

template <typename M>
void expect_finite(const M& m, const char* what) {
    if (!m.allFinite()) throw Error(Errc::dimension_mismatch, std::string("encoder weights: non-finite ") + what);
}

void check_direction(const GruDirection& g, int d, int h) {
    expect_shape(g.w_update.rows() == h && g.w_update.cols() == d, "w_update shape");
    expect_shape(g.u_update.rows() == h && g.u_update.cols() == h, "u_update shape");
    expect_shape(g.b_update.size() == h, "b_update shape");
    expect_shape(g.w_cand.rows() == h && g.w_cand.cols() == d, "w_cand shape");
    expect_shape(g.u_cand.rows() == h && g.u_cand.cols() == h, "u_cand shape");
    expect_shape(g.b_cand.size() == h, "b_cand shape");
    expect_finite(g.w_update, "w_update");
    expect_finite(g.u_update, "u_update");
    expect_finite(g.b_update, "b_update");
    expect_finite(g.w_cand, "w_cand");
    expect_finite(g.u_cand, "u_cand");
    expect_finite(g.b_cand, "b_cand");
}

void check_attention(const AttentionParams& a, int h) {
    expect_shape(a.w.rows() == h && a.w.cols() == 2 * h, "attention w shape");
    expect_shape(a.b.size() == h && a.v.size() == h, "attention b/v shape");
    expect_finite(a.w, "attention w");
    expect_finite(a.b, "attention b");
    expect_finite(a.v, "attention v");
}

template <typename M>
std::uint64_t hash_values(std::uint64_t h, const M& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double x = m(i, j);
            char bytes[sizeof x];
            std::memcpy(bytes, &x, sizeof x);
            h = fnv1a64(std::string_view(bytes, sizeof bytes), h);
        }
    }
    return h;
}

std::uint64_t hash_direction(std::uint64_t h, const GruDirection& g) {
    h = hash_values(h, g.w_update);
    h = hash_values(h, g.u_update);
    h = hash_values(h, g.b_update);
    h = hash_values(h, g.w_cand);
    h = hash_values(h, g.u_cand);
    return hash_values(h, g.b_cand);
}

std::uint64_t hash_attention(std::uint64_t h, const AttentionParams& a) {
    h = hash_values(h, a.w);
    h = hash_values(h, a.b);
    return hash_values(h, a.v);
}

// Runs one direction over the precomputed input projections, writing the
// states into columns [offset, offset + h) of `out`.
void run_direction(const GruDirection& g, const Matrix& x_update, const Matrix& x_cand, bool reverse,
                   Eigen::Index offset, Matrix& out) {
    const Eigen::Index n = x_update.rows();
    const Eigen::Index h = g.u_update.rows();
    Vector state = Vector::Zero(h);
    Vector z(h), c(h);
    for (Eigen::Index step = 0; step < n; ++step) {
        const Eigen::Index t = reverse ? n - 1 - step : step;
        z.noalias() = g.u_update * state;
        z += x_update.row(t).transpose() + g.b_update;
        z = (1.0 + (-z.array()).exp()).inverse().matrix();
        c.noalias() = g.u_cand * state;
        c += x_cand.row(t).transpose() + g.b_cand;
        c = c.array().tanh().matrix();
        state = ((1.0 - z.array()) * state.array() + z.array() * c.array()).matrix();
        out.block(t, offset, 1, h) = state.transpose();
    }
}

Vector softmax_masked(const Vector& scores, const Eigen::Array<bool, Eigen::Dynamic, 1>& keep) {
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        if (keep(i)) top = std::max(top, scores(i));
    Vector w = Vector::Zero(scores.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (!keep(i)) continue;
        w(i) = std::exp(scores(i) - top);
        total += w(i);
    }
    return w / total;
}

} // namespace

Matrix normalized_rows(const Matrix& m) {
    Matrix out = m;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double n = out.row(i).norm();
        if (n > 0.0) out.row(i) /= n;
    }
    return out;
}

EncoderWeights EncoderWeights::random(int token_dim, int hidden_dim, std::uint64_t seed) {
    if (token_dim <= 0 || hidden_dim <= 0)
        throw Error(Errc::dimension_mismatch, "encoder dimensions must be positive");
    Rng rng(seed);
    EncoderWeights w;
    w.token_dim = token_dim;
    w.hidden_dim = hidden_dim;
    w.seed = seed;
    w.forward = random_direction(rng, token_dim, hidden_dim);
    w.backward = random_direction(rng, token_dim, hidden_dim);
    w.segment_attention = random_attention(rng, hidden_dim);
    w.query_attention = random_attention(rng, hidden_dim);
    return w;
}

void EncoderWeights::validate() const {
    expect_shape(token_dim > 0 && hidden_dim > 0, "dimensions must be positive");
    check_direction(forward, token_dim, hidden_dim);
    check_direction(backward, token_dim, hidden_dim);
    check_attention(segment_attention, hidden_dim);
    check_attention(query_attention, hidden_dim);
}

std::uint64_t EncoderWeights::fingerprint() const {
    std::uint64_t h = fnv1a64("tvrag-encoder");
    // The seed also keys the token hashing, so it is part of the identity.
    h = fnv1a64(std::to_string(token_dim) + "x" + std::to_string(hidden_dim) + "/" + std::to_string(seed), h);
    h = hash_direction(h, forward);
    h = hash_direction(h, backward);
    h = hash_attention(h, segment_attention);
    return hash_attention(h, query_attention);
}

Matrix embed_tokens(std::span<const std::string> tokens, int dim, std::uint64_t seed) {
    if (dim <= 0) throw Error(Errc::dimension_mismatch, "token dimension must be positive");
    const auto d = static_cast<std::uint64_t>(dim);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(tokens.size()), dim);
    for (std::size_t r = 0; r < tokens.size(); ++r) {
        const std::uint64_t base = fnv1a64(tokens[r]);
        auto row = out.row(static_cast<Eigen::Index>(r));
        Eigen::Index first_index = 0;
        double first_sign = 1.0;
        for (int p = 0; p < kHashProbes; ++p) {
            const std::uint64_t h = splitmix64(base ^ splitmix64(seed + static_cast<std::uint64_t>(p)));
            const auto index = static_cast<Eigen::Index>(h % d);
            const double sign = (h >> 63) ? -1.0 : 1.0;
            if (p == 0) {
                first_index = index;
                first_sign = sign;
            }
            row(index) += sign;
        }
        const double norm = row.norm();
        if (norm > 0.0) {
            row /= norm;
        } else {
            // Every probe cancelled; fall back to the first bucket alone.
            row(first_index) = first_sign;
        }
    }
    return out;
}

Matrix encode_sequence(const Matrix& token_vectors, const EncoderWeights& weights) {
    if (token_vectors.cols() != weights.token_dim)
        throw Error(Errc::dimension_mismatch, "token vectors have dimension " + std::to_string(token_vectors.cols()) +
                                                  ", encoder expects " + std::to_string(weights.token_dim));
    const Eigen::Index n = token_vectors.rows();
    const Eigen::Index h = weights.hidden_dim;
    Matrix out(n, 2 * h);
    if (n == 0) return out;

    const Matrix fz = token_vectors * weights.forward.w_update.transpose();
    const Matrix fc = token_vectors * weights.forward.w_cand.transpose();
    run_direction(weights.forward, fz, fc, false, 0, out);
    const Matrix bz = token_vectors * weights.backward.w_update.transpose();
    const Matrix bc = token_vectors * weights.backward.w_cand.transpose();
    run_direction(weights.backward, bz, bc, true, h, out);
    return out;
}

Vector attention_scores(const Matrix& hidden, const AttentionParams& params) {
    if (hidden.cols() != params.w.cols())
        throw Error(Errc::dimension_mismatch, "hidden states do not match attention parameters");
    Matrix projected = hidden * params.w.transpose();
    projected.rowwise() += params.b.transpose();
    return projected.array().tanh().matrix() * params.v;
}

PooledEmbedding attention_pool(const Matrix& hidden, const AttentionParams& params) {
    if (hidden.rows() == 0) throw Error(Errc::empty_sequence, "attention pooling over an empty sequence");
    const Vector scores = attention_scores(hidden, params);
    PooledEmbedding out;
    out.weights = softmax_masked(scores, Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(scores.size(), true));
    out.vector = hidden.transpose() * out.weights;
    return out;
}

PooledEmbedding sparse_attention_pool(const Matrix& hidden, const AttentionParams& params, double threshold) {
    if (hidden.rows() == 0) throw Error(Errc::empty_sequence, "attention pooling over an empty sequence");
    const Vector scores = attention_scores(hidden, params);
    Eigen::Array<bool, Eigen::Dynamic, 1> keep = (scores.array() > threshold);
    if (!keep.any()) {
        Eigen::Index top = 0;
        scores.maxCoeff(&top);
        keep.setConstant(false);
        keep(top) = true;
    }
    PooledEmbedding out;
    out.weights = softmax_masked(scores, keep);
    out.vector = hidden.transpose() * out.weights;
    return out;
}

Vector embed_text_tokens(std::span<const std::string> tokens, const EncoderWeights& weights) {
    if (tokens.empty()) return Vector::Zero(weights.output_dim());
    const Matrix hidden = encode_sequence(embed_tokens(tokens, weights.token_dim, weights.seed), weights);
    return attention_pool(hidden, weights.segment_attention).vector;
}

PooledEmbedding encode_query(std::string_view query, const EncoderWeights& weights, double theta_q) {
    const Tokens tokens = tokenize(normalize_text(query));
    if (tokens.empty()) throw Error(Errc::empty_query, "query has no tokens");
    const Matrix hidden = encode_sequence(embed_tokens(tokens, weights.token_dim, weights.seed), weights);
    return sparse_attention_pool(hidden, weights.query_attention, theta_q);
}

} // namespace tvrag
