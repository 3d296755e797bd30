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

// Text encoder: hashed token vectors -> bidirectional gated recurrent pass
// -> additive attention pooling. Segments use dense attention; queries use a
// thresholded (sparse) variant of the same pooling.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tvrag/linalg.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

/// One direction of the recurrent cell:
///   z  = sigmoid(Wz x + Uz h + bz)
///   c  = tanh(Wc x + Uc h + bc)
///   h' = (1 - z) * h + z * c
struct GruDirection {
    Matrix w_update; // h x d
    Matrix u_update; // h x h
    Vector b_update; // h
    Matrix w_cand;
    Matrix u_cand;
    Vector b_cand;
};

/// score_i = v . tanh(W h_i + b), W: a x 2h with a = h.
struct AttentionParams {
    Matrix w;
    Vector b;
    Vector v;
};

struct EncoderWeights {
    int token_dim = 0;
    int hidden_dim = 0;
    std::uint64_t seed = 0;
    GruDirection forward;
    GruDirection backward;
    AttentionParams segment_attention;
    AttentionParams query_attention;

    /// Matrices drawn from uniform(-1/sqrt(h), 1/sqrt(h)); biases zero.
    static EncoderWeights random(int token_dim, int hidden_dim, std::uint64_t seed);

    /// Throws Error(dimension_mismatch) on inconsistent shapes or non-finite values.
    void validate() const;

    /// Stable hash of dims and every parameter value.
    std::uint64_t fingerprint() const;

    int output_dim() const { return 2 * hidden_dim; }
};

/// Feature-hashed token vectors (n x d): each token hashes into a few signed
/// buckets, then the row is L2-normalized. Equal tokens give equal rows.
Matrix embed_tokens(std::span<const std::string> tokens, int dim, std::uint64_t seed);

/// Per-position [forward state | backward state], n x 2h, zero initial states.
Matrix encode_sequence(const Matrix& token_vectors, const EncoderWeights& weights);

struct PooledEmbedding {
    Vector vector;  // 2h
    Vector weights; // attention weight per position; sums to 1
};

PooledEmbedding attention_pool(const Matrix& hidden, const AttentionParams& params);

/// Raw additive-attention scores v . tanh(W h_i + b).
Vector attention_scores(const Matrix& hidden, const AttentionParams& params);

/// Softmax restricted to scores above `threshold`. When none exceeds it, all
/// weight goes to the first top-scoring position.
PooledEmbedding sparse_attention_pool(const Matrix& hidden, const AttentionParams& params, double threshold);

/// Local embedding of a token sequence; the zero vector for no tokens.
Vector embed_text_tokens(std::span<const std::string> tokens, const EncoderWeights& weights);

/// Normalizes and tokenizes the query, then sparse-pools with query attention.
/// Throws Error(empty_query) when the query has no tokens.
PooledEmbedding encode_query(std::string_view query, const EncoderWeights& weights, double theta_q);

} // namespace tvrag
