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

#include "tvrag/pipeline.hpp"

#include <algorithm>
#include <limits>

#include "tvrag/dedup.hpp"
#include "tvrag/error.hpp"
#include "tvrag/segmenter.hpp"

namespace tvrag {

Matrix local_embeddings(const SegmentSet& segments, const EncoderWeights& encoder) {
    encoder.validate();
    Matrix out(static_cast<Eigen::Index>(segments.count()), encoder.output_dim());
    for (std::size_t i = 0; i < segments.count(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = embed_text_tokens(segment_tokens(segments.segments[i]), encoder).transpose();
    return out;
}

SegmentIndex build_index(const Track& captions, const Track& transcripts, const PipelineConfig& config,
                         const ModelWeights& weights) {
    config.validate();
    if (weights.encoder.token_dim != config.encoder.token_dim || weights.encoder.hidden_dim != config.encoder.hidden_dim)
        throw Error(Errc::dimension_mismatch, "weights do not match the configured encoder dimensions");
    if (static_cast<int>(weights.gat.layers.size()) != config.graph.num_layers)
        throw Error(Errc::dimension_mismatch, "weights carry " + std::to_string(weights.gat.layers.size()) +
                                                  " graph layers, config asks for " +
                                                  std::to_string(config.graph.num_layers));
    weights.encoder.validate();
    weights.gat.validate(weights.encoder.output_dim());

    const TrackPair pair = validate_pair(captions, transcripts);

    double segment_size = config.segment_size;
    if (config.auto_segment) segment_size = optimal_segment_size(pair.captions, pair.transcripts, config.segment_candidates);

    SegmentIndex index;
    index.config = config;
    index.config.segment_size = segment_size;
    index.segment_size = segment_size;
    index.silent = pair.silent;

    Track deduped = dedup_track(pair.captions, config.dedup, &index.dedup);
    deduped.duration = pair.duration;
    Track audio = pair.transcripts;
    audio.duration = pair.duration;
    SegmentSet set = segment_tracks(deduped, audio, segment_size);
    index.total_duration = set.total_duration;

    index.local = local_embeddings(set, weights.encoder);
    index.graph = build_adjacency(index.local, config.graph);
    index.enhanced = enhance(index.local, index.graph, weights.gat, config.graph.lambda);
    index.segments = std::move(set.segments);
    index.encoder_fingerprint = weights.encoder.fingerprint();
    index.gat_fingerprint = weights.gat.fingerprint();
    index.validate();
    return index;
}

SegmentIndex build_index(const Track& captions, const Track& transcripts, const PipelineConfig& config) {
    config.validate();
    return build_index(captions, transcripts, config,
                       ModelWeights::random(config.encoder.token_dim, config.encoder.hidden_dim,
                                            config.graph.num_layers, config.seed));
}

nlohmann::json index_summary(const SegmentIndex& index) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
    std::size_t non_empty = 0;
    for (const auto& s : index.segments) {
        if (s.empty()) continue;
        const double d = information_density(s);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        sum += d;
        ++non_empty;
    }
    if (non_empty == 0) lo = 0.0;
    return {{"segments", index.size()},
            {"segment_size", index.segment_size},
            {"total_duration", index.total_duration},
            {"empty_segments", index.size() - non_empty},
            {"silent", index.silent},
            {"kappa", index.dedup.kappa},
            {"iota_proxy", index.dedup.iota_proxy},
            {"dedup", to_json(index.dedup)},
            {"density", {{"min", lo}, {"max", hi}, {"mean", non_empty ? sum / static_cast<double>(non_empty) : 0.0}}},
            {"graph_edges", index.graph.edge_count()},
            {"embedding_dim", index.dim()},
            {"encoder_fingerprint", fingerprint_hex(index.encoder_fingerprint)},
            {"gat_fingerprint", fingerprint_hex(index.gat_fingerprint)},
            {"seed", index.config.seed}};
}

} // namespace tvrag
