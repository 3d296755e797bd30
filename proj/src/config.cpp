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

#include "tvrag/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "tvrag/error.hpp"

namespace tvrag {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::invalid_config, what);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view v) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc{} && ptr == v.data() + v.size() && std::isfinite(out),
            "config key '" + std::string(key) + "': expected a number, got '" + std::string(v) + "'");
    return out;
}

long long parse_int(std::string_view key, std::string_view v) {
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc{} && ptr == v.data() + v.size(),
            "config key '" + std::string(key) + "': expected an integer, got '" + std::string(v) + "'");
    return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(Errc::invalid_config,
                "config key '" + std::string(key) + "': expected a boolean, got '" + std::string(v) + "'");
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
    std::vector<double> out;
    while (!v.empty()) {
        const auto comma = v.find(',');
        out.push_back(parse_double(key, trim(v.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = [] {
        std::map<std::string, Setter, std::less<>> t;
        auto real = [&t](const char* name, double PipelineConfig::*field) {
            t[name] = [field](PipelineConfig& c, std::string_view k, std::string_view v) { c.*field = parse_double(k, v); };
        };
        auto nested = [&t](const char* name, auto member, auto field) {
            t[name] = [member, field](PipelineConfig& c, std::string_view k, std::string_view v) {
                using T = std::remove_reference_t<decltype((c.*member).*field)>;
                if constexpr (std::is_same_v<T, double>)
                    (c.*member).*field = parse_double(k, v);
                else
                    (c.*member).*field = static_cast<T>(parse_int(k, v));
            };
        };
        real("segment_size", &PipelineConfig::segment_size);
        real("overlap_slack", &PipelineConfig::overlap_slack);
        t["auto_segment"] = [](PipelineConfig& c, std::string_view k, std::string_view v) { c.auto_segment = parse_bool(k, v); };
        t["segment_candidates"] = [](PipelineConfig& c, std::string_view k, std::string_view v) { c.segment_candidates = parse_list(k, v); };
        t["seed"] = [](PipelineConfig& c, std::string_view k, std::string_view v) {
            const auto s = parse_int(k, v);
            require(s >= 0, "config key 'seed' must be non-negative");
            c.seed = static_cast<std::uint64_t>(s);
        };
        t["token_budget"] = [](PipelineConfig& c, std::string_view k, std::string_view v) { c.token_budget = static_cast<int>(parse_int(k, v)); };

        nested("dedup_alpha", &PipelineConfig::dedup, &DedupConfig::alpha);
        nested("dedup_beta", &PipelineConfig::dedup, &DedupConfig::beta);

        nested("graph_alpha", &PipelineConfig::graph, &GraphConfig::alpha);
        nested("graph_beta", &PipelineConfig::graph, &GraphConfig::beta);
        nested("graph_delta", &PipelineConfig::graph, &GraphConfig::delta);
        nested("graph_tau", &PipelineConfig::graph, &GraphConfig::tau);
        nested("graph_lambda", &PipelineConfig::graph, &GraphConfig::lambda);
        nested("gat_layers", &PipelineConfig::graph, &GraphConfig::num_layers);

        nested("token_dim", &PipelineConfig::encoder, &EncoderConfig::token_dim);
        nested("hidden_dim", &PipelineConfig::encoder, &EncoderConfig::hidden_dim);

        nested("temperature", &PipelineConfig::retrieval, &RetrievalConfig::temperature);
        nested("eta", &PipelineConfig::retrieval, &RetrievalConfig::eta);
        nested("omega", &PipelineConfig::retrieval, &RetrievalConfig::omega);
        nested("mu", &PipelineConfig::retrieval, &RetrievalConfig::mu);
        nested("nu", &PipelineConfig::retrieval, &RetrievalConfig::nu);
        nested("xi", &PipelineConfig::retrieval, &RetrievalConfig::xi);
        nested("top_m", &PipelineConfig::retrieval, &RetrievalConfig::top_m);
        nested("epsilon_kl", &PipelineConfig::retrieval, &RetrievalConfig::epsilon_kl);
        nested("psd_ridge", &PipelineConfig::retrieval, &RetrievalConfig::psd_ridge);
        nested("theta_q", &PipelineConfig::retrieval, &RetrievalConfig::theta_q);
        return t;
    }();
    return table;
}

} // namespace

void DedupConfig::validate() const {
    require(alpha >= 0.0 && alpha <= 1.0, "dedup alpha must lie in [0, 1]");
    require(beta >= 0.0, "dedup beta must be non-negative");
}

void GraphConfig::validate() const {
    require(alpha >= 0.0 && alpha <= 1.0, "graph alpha must lie in [0, 1]");
    require(beta >= 0.0, "graph beta must be non-negative");
    require(delta >= 0, "graph delta must be non-negative");
    // tau > 1 is accepted and disables the semantic gate entirely.
    require(tau >= -1.0, "graph tau must be at least -1");
    require(num_layers >= 0, "gat layer count must be non-negative");
    require(std::isfinite(lambda), "graph lambda must be finite");
}

void EncoderConfig::validate() const {
    require(token_dim > 0, "token_dim must be positive");
    require(hidden_dim > 0, "hidden_dim must be positive");
}

void RetrievalConfig::validate() const {
    require(temperature > 0.0, "temperature must be positive");
    require(mu >= 0.0 && mu <= 1.0, "mu must lie in [0, 1]");
    require(omega >= 0.0 && omega <= 1.0, "omega must lie in [0, 1]");
    require(top_m >= 1, "top_m must be at least 1");
    require(epsilon_kl > 0.0, "epsilon_kl must be positive");
    require(psd_ridge >= 0.0, "psd_ridge must be non-negative");
    require(eta >= 0.0 && nu >= 0.0 && xi >= 0.0, "objective weights must be non-negative");
}

void PipelineConfig::validate() const {
    require(segment_size > 0.0, "segment_size must be positive");
    require(!segment_candidates.empty(), "segment_candidates must not be empty");
    for (double c : segment_candidates) require(c > 0.0, "segment candidates must be positive");
    require(overlap_slack >= 0.0, "overlap_slack must be non-negative");
    require(token_budget > 0, "token_budget must be positive");
    dedup.validate();
    graph.validate();
    encoder.validate();
    retrieval.validate();
}

void apply_config_value(PipelineConfig& config, std::string_view key, std::string_view value) {
    const auto& table = setters();
    auto it = table.find(key);
    require(it != table.end(), "unknown config key '" + std::string(key) + "'");
    it->second(config, key, trim(value));
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = line;
        if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        require(eq != std::string_view::npos,
                path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        apply_config_value(base, trim(view.substr(0, eq)), view.substr(eq + 1));
    }
    base.validate();
    return base;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : setters()) keys.push_back(k);
    return keys;
}

nlohmann::json to_json(const PipelineConfig& c) {
    return nlohmann::json{
        {"segment_size", c.segment_size},
        {"auto_segment", c.auto_segment},
        {"segment_candidates", c.segment_candidates},
        {"overlap_slack", c.overlap_slack},
        {"dedup", {{"alpha", c.dedup.alpha}, {"beta", c.dedup.beta}}},
        {"graph",
         {{"alpha", c.graph.alpha},
          {"beta", c.graph.beta},
          {"delta", c.graph.delta},
          {"tau", c.graph.tau},
          {"lambda", c.graph.lambda},
          {"num_layers", c.graph.num_layers}}},
        {"encoder", {{"token_dim", c.encoder.token_dim}, {"hidden_dim", c.encoder.hidden_dim}}},
        {"retrieval",
         {{"temperature", c.retrieval.temperature},
          {"eta", c.retrieval.eta},
          {"omega", c.retrieval.omega},
          {"mu", c.retrieval.mu},
          {"nu", c.retrieval.nu},
          {"xi", c.retrieval.xi},
          {"top_m", c.retrieval.top_m},
          {"epsilon_kl", c.retrieval.epsilon_kl},
          {"psd_ridge", c.retrieval.psd_ridge},
          {"theta_q", c.retrieval.theta_q}}},
        {"seed", c.seed},
        {"token_budget", c.token_budget},
    };
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    try {
        c.segment_size = j.at("segment_size").get<double>();
        c.auto_segment = j.at("auto_segment").get<bool>();
        c.segment_candidates = j.at("segment_candidates").get<std::vector<double>>();
        c.overlap_slack = j.at("overlap_slack").get<double>();
        const auto& d = j.at("dedup");
        c.dedup.alpha = d.at("alpha").get<double>();
        c.dedup.beta = d.at("beta").get<double>();
        const auto& g = j.at("graph");
        c.graph.alpha = g.at("alpha").get<double>();
        c.graph.beta = g.at("beta").get<double>();
        c.graph.delta = g.at("delta").get<int>();
        c.graph.tau = g.at("tau").get<double>();
        c.graph.lambda = g.at("lambda").get<double>();
        c.graph.num_layers = g.at("num_layers").get<int>();
        const auto& e = j.at("encoder");
        c.encoder.token_dim = e.at("token_dim").get<int>();
        c.encoder.hidden_dim = e.at("hidden_dim").get<int>();
        const auto& r = j.at("retrieval");
        c.retrieval.temperature = r.at("temperature").get<double>();
        c.retrieval.eta = r.at("eta").get<double>();
        c.retrieval.omega = r.at("omega").get<double>();
        c.retrieval.mu = r.at("mu").get<double>();
        c.retrieval.nu = r.at("nu").get<double>();
        c.retrieval.xi = r.at("xi").get<double>();
        c.retrieval.top_m = r.at("top_m").get<int>();
        c.retrieval.epsilon_kl = r.at("epsilon_kl").get<double>();
        c.retrieval.psd_ridge = r.at("psd_ridge").get<double>();
        c.retrieval.theta_q = r.at("theta_q").get<double>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.token_budget = j.at("token_budget").get<int>();
    } catch (const nlohmann::json::exception& ex) {
        throw Error(Errc::corrupt_file, std::string("config snapshot: ") + ex.what());
    }
    return c;
}

} // namespace tvrag
