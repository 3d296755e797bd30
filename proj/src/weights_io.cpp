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

#include "tvrag/weights_io.hpp"

#include <fstream>
#include <string>

#include "tvrag/error.hpp"
#include "tvrag/index.hpp"

namespace tvrag {

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "tvrag-weights";

template <typename M>
json array_json(const M& m) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return {{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

Matrix read_matrix(const json& arrays, const std::string& name) {
    if (!arrays.contains(name)) throw Error(Errc::corrupt_file, "weights: missing array " + name);
    const auto& a = arrays.at(name);
    const auto shape = a.at("shape").get<std::vector<Eigen::Index>>();
    const auto data = a.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0 ||
        data.size() != static_cast<std::size_t>(shape[0] * shape[1]))
        throw Error(Errc::corrupt_file, "weights: bad shape for " + name);
    Matrix m(shape[0], shape[1]);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

Vector read_vector(const json& arrays, const std::string& name) {
    const Matrix m = read_matrix(arrays, name);
    if (m.cols() != 1) throw Error(Errc::corrupt_file, "weights: " + name + " must be a column");
    return m.col(0);
}

void put_direction(json& arrays, const std::string& p, const GruDirection& g) {
    arrays[p + ".w_update"] = array_json(g.w_update);
    arrays[p + ".u_update"] = array_json(g.u_update);
    arrays[p + ".b_update"] = array_json(g.b_update);
    arrays[p + ".w_cand"] = array_json(g.w_cand);
    arrays[p + ".u_cand"] = array_json(g.u_cand);
    arrays[p + ".b_cand"] = array_json(g.b_cand);
}

GruDirection get_direction(const json& arrays, const std::string& p) {
    GruDirection g;
    g.w_update = read_matrix(arrays, p + ".w_update");
    g.u_update = read_matrix(arrays, p + ".u_update");
    g.b_update = read_vector(arrays, p + ".b_update");
    g.w_cand = read_matrix(arrays, p + ".w_cand");
    g.u_cand = read_matrix(arrays, p + ".u_cand");
    g.b_cand = read_vector(arrays, p + ".b_cand");
    return g;
}

void put_attention(json& arrays, const std::string& p, const AttentionParams& a) {
    arrays[p + ".w"] = array_json(a.w);
    arrays[p + ".b"] = array_json(a.b);
    arrays[p + ".v"] = array_json(a.v);
}

AttentionParams get_attention(const json& arrays, const std::string& p) {
    return {read_matrix(arrays, p + ".w"), read_vector(arrays, p + ".b"), read_vector(arrays, p + ".v")};
}

} // namespace

ModelWeights ModelWeights::random(int token_dim, int hidden_dim, int gat_layers, std::uint64_t seed) {
    ModelWeights w;
    w.encoder = EncoderWeights::random(token_dim, hidden_dim, seed);
    w.gat = GatWeights::random(2 * hidden_dim, gat_layers, seed);
    return w;
}

nlohmann::json weights_to_json(const ModelWeights& weights) {
    weights.encoder.validate();
    weights.gat.validate(weights.encoder.output_dim());
    json arrays = json::object();
    put_direction(arrays, "encoder.forward", weights.encoder.forward);
    put_direction(arrays, "encoder.backward", weights.encoder.backward);
    put_attention(arrays, "encoder.segment_attention", weights.encoder.segment_attention);
    put_attention(arrays, "encoder.query_attention", weights.encoder.query_attention);
    for (std::size_t l = 0; l < weights.gat.layers.size(); ++l) {
        arrays["gat." + std::to_string(l) + ".w"] = array_json(weights.gat.layers[l].w);
        arrays["gat." + std::to_string(l) + ".a"] = array_json(weights.gat.layers[l].a);
    }
    return {{"format", kFormatName},
            {"version", kWeightsFormatVersion},
            {"token_dim", weights.encoder.token_dim},
            {"hidden_dim", weights.encoder.hidden_dim},
            {"seed", fingerprint_hex(weights.encoder.seed)},
            {"gat_seed", fingerprint_hex(weights.gat.seed)},
            {"gat_layers", weights.gat.layers.size()},
            {"arrays", arrays}};
}

ModelWeights weights_from_json(const nlohmann::json& j) {
    ModelWeights w;
    try {
        if (j.value("format", std::string()) != kFormatName) throw Error(Errc::corrupt_file, "not a tvrag weight file");
        const auto version = j.at("version").get<std::uint32_t>();
        if (version != kWeightsFormatVersion)
            throw Error(Errc::version_mismatch, "weight format version " + std::to_string(version) + ", expected " +
                                                    std::to_string(kWeightsFormatVersion));
        const auto& arrays = j.at("arrays");
        w.encoder.token_dim = j.at("token_dim").get<int>();
        w.encoder.hidden_dim = j.at("hidden_dim").get<int>();
        w.encoder.seed = parse_fingerprint_hex(j.at("seed").get<std::string>());
        w.encoder.forward = get_direction(arrays, "encoder.forward");
        w.encoder.backward = get_direction(arrays, "encoder.backward");
        w.encoder.segment_attention = get_attention(arrays, "encoder.segment_attention");
        w.encoder.query_attention = get_attention(arrays, "encoder.query_attention");
        w.gat.seed = parse_fingerprint_hex(j.at("gat_seed").get<std::string>());
        const auto layers = j.at("gat_layers").get<std::size_t>();
        for (std::size_t l = 0; l < layers; ++l)
            w.gat.layers.push_back({read_matrix(arrays, "gat." + std::to_string(l) + ".w"),
                                    read_vector(arrays, "gat." + std::to_string(l) + ".a")});
    } catch (const json::exception& ex) {
        throw Error(Errc::corrupt_file, std::string("weights: ") + ex.what());
    }
    w.encoder.validate();
    w.gat.validate(w.encoder.output_dim());
    return w;
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out << weights_to_json(weights).dump() << '\n';
    if (!out) throw Error(Errc::io_error, "failed writing " + path.string());
}

ModelWeights load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& ex) {
        throw Error(Errc::corrupt_file, path.string() + ": " + ex.what());
    }
    return weights_from_json(j);
}

} // namespace tvrag
