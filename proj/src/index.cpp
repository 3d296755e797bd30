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

#include "tvrag/index.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

#include "tvrag/error.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

static_assert(std::endian::native == std::endian::little, "index container assumes a little-endian host");

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "tvrag-index";

json timed_to_json(const std::vector<TimedText>& entries) {
    json out = json::array();
    for (const auto& e : entries) out.push_back({{"start", e.start}, {"end", e.end}, {"text", e.text}});
    return out;
}

std::vector<TimedText> timed_from_json(const json& j) {
    std::vector<TimedText> out;
    for (const auto& e : j) out.push_back({e.at("start").get<double>(), e.at("end").get<double>(), e.at("text").get<std::string>()});
    return out;
}

json header_json(const SegmentIndex& index) {
    json segments = json::array();
    for (const auto& s : index.segments) {
        segments.push_back({{"index", s.index},
                            {"t_start", s.t_start},
                            {"t_end", s.t_end},
                            {"captions", timed_to_json(s.captions)},
                            {"transcripts", timed_to_json(s.transcripts)},
                            {"fused_text", s.fused_text}});
    }
    return {{"format", kFormatName},
            {"version", index.format_version},
            {"segment_count", index.size()},
            {"embedding_dim", index.dim()},
            {"edge_count", index.graph.edge_count()},
            {"token_dim", index.config.encoder.token_dim},
            {"hidden_dim", index.config.encoder.hidden_dim},
            {"encoder_fingerprint", fingerprint_hex(index.encoder_fingerprint)},
            {"gat_fingerprint", fingerprint_hex(index.gat_fingerprint)},
            {"segment_size", index.segment_size},
            {"total_duration", index.total_duration},
            {"silent", index.silent},
            {"dedup", to_json(index.dedup)},
            {"config", to_json(index.config)},
            {"segments", segments}};
}

void check_version(const json& header) {
    if (header.value("format", std::string()) != kFormatName)
        throw Error(Errc::corrupt_file, "not a tvrag index");
    const auto version = header.at("version").get<std::uint32_t>();
    if (version != kIndexFormatVersion)
        throw Error(Errc::version_mismatch, "index format version " + std::to_string(version) + ", expected " +
                                                std::to_string(kIndexFormatVersion));
}

// Fills everything except the arrays; returns (K, D, E).
std::tuple<std::size_t, std::size_t, std::size_t> apply_header(const json& header, SegmentIndex& index) {
    check_version(header);
    index.format_version = header.at("version").get<std::uint32_t>();
    index.config = pipeline_config_from_json(header.at("config"));
    index.encoder_fingerprint = parse_fingerprint_hex(header.at("encoder_fingerprint").get<std::string>());
    index.gat_fingerprint = parse_fingerprint_hex(header.at("gat_fingerprint").get<std::string>());
    index.segment_size = header.at("segment_size").get<double>();
    index.total_duration = header.at("total_duration").get<double>();
    index.silent = header.at("silent").get<bool>();
    index.dedup = dedup_report_from_json(header.at("dedup"));
    index.segments.clear();
    for (const auto& s : header.at("segments")) {
        Segment seg;
        seg.index = s.at("index").get<std::size_t>();
        seg.t_start = s.at("t_start").get<double>();
        seg.t_end = s.at("t_end").get<double>();
        seg.captions = timed_from_json(s.at("captions"));
        seg.transcripts = timed_from_json(s.at("transcripts"));
        seg.fused_text = s.at("fused_text").get<std::string>();
        index.segments.push_back(std::move(seg));
    }
    const auto k = header.at("segment_count").get<std::size_t>();
    if (k != index.segments.size()) throw Error(Errc::corrupt_file, "segment count does not match segment list");
    return {k, header.at("embedding_dim").get<std::size_t>(), header.at("edge_count").get<std::size_t>()};
}

template <typename T>
void append_raw(std::string& out, const T* data, std::size_t count) {
    out.append(reinterpret_cast<const char*>(data), count * sizeof(T));
}

template <typename T>
void append_value(std::string& out, T value) {
    append_raw(out, &value, 1);
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    void read(T* data, std::size_t count) {
        if (count > (bytes_.size() - pos_) / sizeof(T)) throw Error(Errc::corrupt_file, "index file is truncated");
        std::memcpy(data, bytes_.data() + pos_, count * sizeof(T));
        pos_ += count * sizeof(T);
    }

    template <typename T>
    T value() {
        T v{};
        read(&v, 1);
        return v;
    }

    std::string_view take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw Error(Errc::corrupt_file, "index file is truncated");
        const auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

void SegmentIndex::validate() const {
    const auto k = static_cast<Eigen::Index>(segments.size());
    if (local.rows() != k || enhanced.rows() != k || local.cols() != enhanced.cols())
        throw Error(Errc::corrupt_file, "index embedding shapes do not match the segment count");
    if (graph.size() != segments.size()) throw Error(Errc::corrupt_file, "index graph size does not match");
    if (!local.allFinite() || !enhanced.allFinite()) throw Error(Errc::corrupt_file, "index embeddings are not finite");
}

std::string serialize_index(const SegmentIndex& index) {
    index.validate();
    const std::string header = header_json(index).dump();
    std::string out;
    out.append(kIndexMagic, sizeof kIndexMagic);
    append_value<std::uint32_t>(out, index.format_version);
    append_value<std::uint32_t>(out, 0);
    append_value<std::uint64_t>(out, header.size());
    out += header;
    append_raw(out, index.local.data(), static_cast<std::size_t>(index.local.size()));
    append_raw(out, index.enhanced.data(), static_cast<std::size_t>(index.enhanced.size()));
    for (const auto o : index.graph.row_offsets()) append_value<std::uint64_t>(out, o);
    for (const auto& e : index.graph.edges()) append_value<std::uint64_t>(out, e.target);
    for (const auto& e : index.graph.edges()) append_value<double>(out, e.weight);
    append_value<std::uint64_t>(out, fnv1a64(out));
    return out;
}

SegmentIndex deserialize_index(const std::string& bytes) {
    if (bytes.size() < sizeof kIndexMagic + 16 + sizeof(std::uint64_t) ||
        std::memcmp(bytes.data(), kIndexMagic, sizeof kIndexMagic) != 0)
        throw Error(Errc::corrupt_file, "not a tvrag index");

    Reader in(bytes);
    in.take(sizeof kIndexMagic);
    const auto version = in.value<std::uint32_t>();
    if (version != kIndexFormatVersion)
        throw Error(Errc::version_mismatch, "index format version " + std::to_string(version) + ", expected " +
                                                std::to_string(kIndexFormatVersion));
    in.value<std::uint32_t>();

    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + bytes.size() - sizeof stored, sizeof stored);
    if (fnv1a64(std::string_view(bytes).substr(0, bytes.size() - sizeof stored)) != stored)
        throw Error(Errc::corrupt_file, "index checksum mismatch");

    const auto header_size = in.value<std::uint64_t>();
    json header;
    try {
        header = json::parse(in.take(header_size));
    } catch (const json::exception& ex) {
        throw Error(Errc::corrupt_file, std::string("index header: ") + ex.what());
    }

    SegmentIndex index;
    std::size_t k = 0, d = 0, e = 0;
    try {
        std::tie(k, d, e) = apply_header(header, index);
    } catch (const json::exception& ex) {
        throw Error(Errc::corrupt_file, std::string("index header: ") + ex.what());
    }
    const auto rows = static_cast<Eigen::Index>(k), cols = static_cast<Eigen::Index>(d);
    index.local.resize(rows, cols);
    index.enhanced.resize(rows, cols);
    in.read(index.local.data(), k * d);
    in.read(index.enhanced.data(), k * d);
    std::vector<std::uint64_t> offsets(k + 1), targets(e);
    std::vector<double> weights(e);
    in.read(offsets.data(), offsets.size());
    in.read(targets.data(), targets.size());
    in.read(weights.data(), weights.size());
    if (in.remaining() != sizeof(std::uint64_t)) throw Error(Errc::corrupt_file, "index file has trailing bytes");

    std::vector<std::size_t> row_offsets(offsets.begin(), offsets.end());
    std::vector<Edge> edges(e);
    for (std::size_t i = 0; i < e; ++i) edges[i] = {static_cast<std::size_t>(targets[i]), weights[i]};
    index.graph = ContextGraph(std::move(row_offsets), std::move(edges));
    index.validate();
    return index;
}

void write_index(const SegmentIndex& index, const std::filesystem::path& path) {
    const std::string bytes = serialize_index(index);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

SegmentIndex read_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_index(buf.str());
}

nlohmann::json index_to_json(const SegmentIndex& index) {
    index.validate();
    json j = header_json(index);
    const auto rows = [](const Matrix& m) {
        json out = json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            out.push_back(std::vector<double>(m.row(r).data(), m.row(r).data() + m.cols()));
        return out;
    };
    j["local"] = rows(index.local);
    j["enhanced"] = rows(index.enhanced);
    json targets = json::array(), weights = json::array();
    for (const auto& e : index.graph.edges()) {
        targets.push_back(e.target);
        weights.push_back(e.weight);
    }
    j["graph"] = {{"row_offsets", index.graph.row_offsets()}, {"targets", targets}, {"weights", weights}};
    return j;
}

SegmentIndex index_from_json(const nlohmann::json& j) {
    SegmentIndex index;
    try {
        const auto [k, d, e] = apply_header(j, index);
        const auto fill = [&](const json& src, Matrix& m) {
            m.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
            if (src.size() != k) throw Error(Errc::corrupt_file, "embedding row count mismatch");
            for (std::size_t r = 0; r < k; ++r) {
                const auto row = src[r].get<std::vector<double>>();
                if (row.size() != d) throw Error(Errc::corrupt_file, "embedding width mismatch");
                for (std::size_t c = 0; c < d; ++c)
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
        };
        fill(j.at("local"), index.local);
        fill(j.at("enhanced"), index.enhanced);
        const auto& g = j.at("graph");
        auto offsets = g.at("row_offsets").get<std::vector<std::size_t>>();
        const auto targets = g.at("targets").get<std::vector<std::size_t>>();
        const auto weights = g.at("weights").get<std::vector<double>>();
        if (targets.size() != e || weights.size() != e) throw Error(Errc::corrupt_file, "edge count mismatch");
        std::vector<Edge> edges(e);
        for (std::size_t i = 0; i < e; ++i) edges[i] = {targets[i], weights[i]};
        index.graph = ContextGraph(std::move(offsets), std::move(edges));
    } catch (const json::exception& ex) {
        throw Error(Errc::corrupt_file, std::string("index json: ") + ex.what());
    }
    index.validate();
    return index;
}

std::string fingerprint_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, value);
    return buf;
}

std::uint64_t parse_fingerprint_hex(const std::string& text) {
    if (text.size() != 16 || text.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw Error(Errc::corrupt_file, "bad fingerprint '" + text + "'");
    return std::stoull(text, nullptr, 16);
}

nlohmann::json to_json(const DedupReport& r) {
    return {{"kappa", r.kappa},
            {"iota_proxy", r.iota_proxy},
            {"removed_tokens", r.removed_tokens},
            {"deduplicated_captions", r.deduplicated_captions},
            {"caption_count", r.caption_count},
            {"condition_violations", r.condition_violations},
            {"min_unique_fraction", r.min_unique_fraction}};
}

DedupReport dedup_report_from_json(const nlohmann::json& j) {
    DedupReport r;
    r.kappa = j.at("kappa").get<double>();
    r.iota_proxy = j.at("iota_proxy").get<double>();
    r.removed_tokens = j.at("removed_tokens").get<std::size_t>();
    r.deduplicated_captions = j.at("deduplicated_captions").get<std::size_t>();
    r.caption_count = j.at("caption_count").get<std::size_t>();
    r.condition_violations = j.at("condition_violations").get<std::size_t>();
    r.min_unique_fraction = j.at("min_unique_fraction").get<double>();
    return r;
}

} // namespace tvrag
