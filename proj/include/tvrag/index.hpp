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

// Segment index and its on-disk container. Layout (little endian):
//
//   magic        8 bytes  "TVRAGIDX"
//   version      u32
//   reserved     u32      0
//   header_size  u64
//   header       JSON, header_size bytes
//   local        f64[K][D]
//   enhanced     f64[K][D]
//   row_offsets  u64[K + 1]
//   targets      u64[E]
//   weights      f64[E]
//   checksum     u64      FNV-1a of every preceding byte
//
// docs/index_format.md describes the header keys.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvrag/config.hpp"
#include "tvrag/context_graph.hpp"
#include "tvrag/dedup.hpp"
#include "tvrag/linalg.hpp"
#include "tvrag/segmenter.hpp"

namespace tvrag {

inline constexpr std::uint32_t kIndexFormatVersion = 1;
inline constexpr char kIndexMagic[8] = {'T', 'V', 'R', 'A', 'G', 'I', 'D', 'X'};

struct SegmentIndex {
    std::uint32_t format_version = kIndexFormatVersion;
    PipelineConfig config;             // snapshot used for the build
    std::uint64_t encoder_fingerprint = 0;
    std::uint64_t gat_fingerprint = 0;
    double segment_size = 0.0;
    double total_duration = 0.0;
    bool silent = false;
    DedupReport dedup;
    std::vector<Segment> segments;
    Matrix local;    // K x 2h
    Matrix enhanced; // K x 2h
    ContextGraph graph;

    std::size_t size() const { return segments.size(); }
    Eigen::Index dim() const { return enhanced.cols(); }

    /// Throws Error(corrupt_file) when shapes disagree or values are not finite.
    void validate() const;
};

void write_index(const SegmentIndex& index, const std::filesystem::path& path);
SegmentIndex read_index(const std::filesystem::path& path);

std::string serialize_index(const SegmentIndex& index);
SegmentIndex deserialize_index(const std::string& bytes);

/// Lossless JSON mirror of the binary container.
nlohmann::json index_to_json(const SegmentIndex& index);
SegmentIndex index_from_json(const nlohmann::json& j);

std::string fingerprint_hex(std::uint64_t value);
std::uint64_t parse_fingerprint_hex(const std::string& text);

nlohmann::json to_json(const DedupReport& report);
DedupReport dedup_report_from_json(const nlohmann::json& j);

} // namespace tvrag
