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

// Index construction: segment size -> caption dedup -> tiling -> local
// embeddings -> segment graph -> enhanced embeddings.

#pragma once

#include <json.hpp>

#include "tvrag/config.hpp"
#include "tvrag/corpus.hpp"
#include "tvrag/index.hpp"
#include "tvrag/weights_io.hpp"

namespace tvrag {

/// Local embeddings (K x 2h) of a tiling, one row per segment.
Matrix local_embeddings(const SegmentSet& segments, const EncoderWeights& encoder);

/// `weights` must match config.encoder and config.graph.num_layers.
SegmentIndex build_index(const Track& captions, const Track& transcripts, const PipelineConfig& config,
                         const ModelWeights& weights);

/// Same, with ModelWeights::random for config.seed.
SegmentIndex build_index(const Track& captions, const Track& transcripts, const PipelineConfig& config);

/// K, segment size, dedup figures, density and graph statistics.
nlohmann::json index_summary(const SegmentIndex& index);

} // namespace tvrag
