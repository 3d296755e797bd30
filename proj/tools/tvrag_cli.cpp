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

// tvrag: build a segment index from caption and transcript tracks, query it,
// and evaluate selectors. Every command prints JSON on stdout; failures print
// {"error": ..., "kind": ...} and exit 2 (input), 3 (version) or 4 (internal).

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvrag/config.hpp"
#include "tvrag/corpus.hpp"
#include "tvrag/dedup.hpp"
#include "tvrag/error.hpp"
#include "tvrag/evaluation.hpp"
#include "tvrag/index.hpp"
#include "tvrag/pipeline.hpp"
#include "tvrag/prompt.hpp"
#include "tvrag/retriever.hpp"
#include "tvrag/segmenter.hpp"
#include "tvrag/weights_io.hpp"

namespace {

using nlohmann::json;
using namespace tvrag;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitVersion = 3;
constexpr int kExitInternal = 4;

struct Options {
    std::string captions;
    std::string transcripts;
    std::string config;
    std::string out;
    std::string index;
    std::string question;
    std::string queries;
    std::string answers;
    std::string weights;
    std::string save_weights;
    std::string export_json;
    std::string prompt_out;
    std::string selector = "dpp";
    std::optional<std::uint64_t> seed;
    std::optional<double> segment_size;
    bool auto_segment = false;
    std::optional<int> top_m;
    std::optional<int> token_budget;
};

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path);
    out << text;
    if (!out) throw Error(Errc::io_error, "write failed: " + path);
}

// Config file first, then command-line overrides.
PipelineConfig resolve_config(const Options& o, PipelineConfig base = {}) {
    PipelineConfig c = o.config.empty() ? base : load_config(o.config, base);
    if (o.seed) c.seed = *o.seed;
    if (o.segment_size) c.segment_size = *o.segment_size;
    if (o.auto_segment) c.auto_segment = true;
    if (o.top_m) c.retrieval.top_m = *o.top_m;
    if (o.token_budget) c.token_budget = *o.token_budget;
    c.validate();
    return c;
}

TrackPair load_pair(const Options& o, const PipelineConfig& c) {
    ParseOptions caption_opts;
    caption_opts.overlap_slack = c.overlap_slack;
    ParseOptions transcript_opts = caption_opts;
    transcript_opts.allow_empty = true; // a silent video is legal
    Track captions = parse_track(o.captions, TrackKind::caption, caption_opts);
    Track transcripts = parse_track(o.transcripts, TrackKind::transcript, transcript_opts);
    return validate_pair(std::move(captions), std::move(transcripts));
}

double chosen_segment_size(const TrackPair& pair, const PipelineConfig& c) {
    if (!c.auto_segment) return c.segment_size;
    return optimal_segment_size(pair.captions, pair.transcripts, c.segment_candidates);
}

ModelWeights weights_for(const Options& o, const PipelineConfig& c) {
    if (!o.weights.empty()) return load_weights(o.weights);
    return ModelWeights::random(c.encoder.token_dim, c.encoder.hidden_dim, c.graph.num_layers, c.seed);
}

json track_summary(const Track& t) {
    return {{"entries", t.entries.size()}, {"duration", t.duration}};
}

int cmd_ingest(const Options& o) {
    const PipelineConfig c = resolve_config(o);
    const TrackPair pair = load_pair(o, c);
    print({{"captions", track_summary(pair.captions)},
           {"transcripts", track_summary(pair.transcripts)},
           {"duration", pair.duration},
           {"silent", pair.silent}});
    return kExitOk;
}

int cmd_segment(const Options& o) {
    const PipelineConfig c = resolve_config(o);
    const TrackPair pair = load_pair(o, c);
    const double size = chosen_segment_size(pair, c);
    const SegmentSet set = segment_tracks(pair, size);
    json segments = json::array();
    for (const auto& s : set.segments) {
        segments.push_back({{"index", s.index},
                            {"t_start", s.t_start},
                            {"t_end", s.t_end},
                            {"captions", s.captions.size()},
                            {"transcripts", s.transcripts.size()},
                            {"density", information_density(s)},
                            {"text", s.fused_text}});
    }
    print({{"segment_size", set.segment_size},
           {"total_duration", set.total_duration},
           {"min_density", min_information_density(set)},
           {"segments", segments}});
    return kExitOk;
}

int cmd_dedup(const Options& o) {
    const PipelineConfig c = resolve_config(o);
    ParseOptions opts;
    opts.overlap_slack = c.overlap_slack;
    const Track captions = parse_track(o.captions, TrackKind::caption, opts);
    DedupReport report;
    const Track deduped = dedup_track(captions, c.dedup, &report);
    if (!o.out.empty()) write_text(o.out, serialize_track(deduped));
    print(to_json(report));
    return kExitOk;
}

int cmd_index(const Options& o) {
    const PipelineConfig c = resolve_config(o);
    const TrackPair pair = load_pair(o, c);
    const ModelWeights weights = weights_for(o, c);
    const SegmentIndex index = build_index(pair.captions, pair.transcripts, c, weights);
    write_index(index, o.out);
    if (!o.save_weights.empty()) save_weights(weights, o.save_weights);
    if (!o.export_json.empty()) write_text(o.export_json, index_to_json(index).dump(1) + "\n");
    print(index_summary(index));
    return kExitOk;
}

// Wraps a plain index list (temporal / random selectors) so the prompt and
// diagnostics code paths stay the same. The score is the query cosine.
RetrievalResult listed_result(const std::vector<std::size_t>& picks, const Vector& query_cos) {
    RetrievalResult r;
    for (const auto k : picks) {
        SelectionStep s;
        s.index = k;
        s.score = query_cos(static_cast<Eigen::Index>(k));
        r.steps.push_back(std::move(s));
    }
    return r;
}

int cmd_query(const Options& o) {
    const SegmentIndex index = read_index(o.index);
    const PipelineConfig c = resolve_config(o, index.config);
    const Selector selector = parse_selector(o.selector);
    const ModelWeights weights = weights_for(o, index.config);
    if (weights.encoder.fingerprint() != index.encoder_fingerprint)
        throw Error(Errc::version_mismatch, "encoder weights do not match the index (fingerprint " +
                                                fingerprint_hex(weights.encoder.fingerprint()) + " vs " +
                                                fingerprint_hex(index.encoder_fingerprint) + ")");

    RetrievalResult result;
    if (selector == Selector::dpp) {
        result = retrieve(index, o.question, weights.encoder, c.retrieval);
    } else {
        const Vector q = encode_query(o.question, weights.encoder, c.retrieval.theta_q).vector;
        if (selector == Selector::greedy) {
            result = greedy_select(index, q, selector_config(c.retrieval, selector));
        } else {
            const auto picks = select_segments(index.enhanced, q, c.retrieval, selector, c.seed);
            result = listed_result(picks, query_cosines(index.enhanced, q));
        }
    }
    const PromptBundle prompt =
        assemble_prompt(index, result, o.question, static_cast<std::size_t>(c.token_budget));
    if (!o.prompt_out.empty()) write_text(o.prompt_out, prompt.render());
    json out = {{"question", o.question},
                {"selector", std::string(to_string(selector))},
                {"retrieval", to_json(result)},
                {"prompt", to_json(prompt)}};
    print(out);
    return kExitOk;
}

int cmd_eval(const Options& o) {
    const SegmentIndex index = read_index(o.index);
    const PipelineConfig c = resolve_config(o, index.config);
    const ModelWeights weights = weights_for(o, index.config);
    std::optional<std::filesystem::path> answers;
    if (!o.answers.empty()) answers = o.answers;
    const QueryFile queries = parse_queries(o.queries, answers);
    for (const auto& w : queries.warnings) std::cerr << "warning: " << w << '\n';
    print(to_json(evaluate(index, weights.encoder, queries, c.retrieval, c.seed)));
    return kExitOk;
}

int exit_code(Errc code) {
    switch (classify(code)) {
    case ErrorClass::input:
        return kExitInput;
    case ErrorClass::version:
        return kExitVersion;
    case ErrorClass::internal:
        return kExitInternal;
    }
    return kExitInternal;
}

int fail(const std::string& message, std::string_view kind, int code) {
    print({{"error", message}, {"kind", std::string(kind)}});
    return code;
}

void add_config_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "seed for weights and the random selector");
}

void add_track_flags(CLI::App* cmd, Options& o, bool transcripts) {
    cmd->add_option("--captions", o.captions, "caption track (JSON lines)")->required();
    if (transcripts) cmd->add_option("--transcripts", o.transcripts, "transcript track (JSON lines)")->required();
}

void add_segment_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--segment-size", o.segment_size, "segment length in seconds");
    cmd->add_flag("--auto-segment", o.auto_segment, "pick the segment size maximizing minimum density");
}

void add_retrieval_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--top-m", o.top_m, "segments to select");
    cmd->add_option("--weights", o.weights, "model weights file (default: derived from the index seed)");
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"Temporal video retrieval over caption and transcript tracks"};
    app.require_subcommand(1);

    auto* ingest = app.add_subcommand("ingest", "validate a caption/transcript pair");
    add_track_flags(ingest, o, true);
    add_config_flags(ingest, o);

    auto* segment = app.add_subcommand("segment", "dump fixed-length segments");
    add_track_flags(segment, o, true);
    add_config_flags(segment, o);
    add_segment_flags(segment, o);

    auto* dedup = app.add_subcommand("dedup", "deduplicate a caption track and report compression");
    add_track_flags(dedup, o, false);
    add_config_flags(dedup, o);
    dedup->add_option("--out", o.out, "write the deduplicated track here");

    auto* index = app.add_subcommand("index", "build a segment index");
    add_track_flags(index, o, true);
    add_config_flags(index, o);
    add_segment_flags(index, o);
    index->add_option("--out", o.out, "index file")->required();
    index->add_option("--weights", o.weights, "model weights file (default: random from --seed)");
    index->add_option("--save-weights", o.save_weights, "write the weights used");
    index->add_option("--export-json", o.export_json, "also write the index as JSON");

    auto* query = app.add_subcommand("query", "select segments for a question and assemble a prompt");
    query->add_option("--index", o.index, "index file")->required();
    query->add_option("--question", o.question, "question text")->required();
    add_config_flags(query, o);
    add_retrieval_flags(query, o);
    query->add_option("--selector", o.selector, "dpp, greedy, temporal or random");
    query->add_option("--token-budget", o.token_budget, "prompt token budget");
    query->add_option("--prompt-out", o.prompt_out, "write the rendered prompt here");

    auto* eval = app.add_subcommand("eval", "recall@M and MRR for every selector");
    eval->add_option("--index", o.index, "index file")->required();
    eval->add_option("--queries", o.queries, "queries (JSON lines)")->required();
    eval->add_option("--answers", o.answers, "relevant segments per query line (JSON lines)");
    add_config_flags(eval, o);
    add_retrieval_flags(eval, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(e.what(), "UsageError", kExitInput);
    }

    try {
        if (*ingest) return cmd_ingest(o);
        if (*segment) return cmd_segment(o);
        if (*dedup) return cmd_dedup(o);
        if (*index) return cmd_index(o);
        if (*query) return cmd_query(o);
        if (*eval) return cmd_eval(o);
    } catch (const Error& e) {
        return fail(e.what(), errc_name(e.code()), exit_code(e.code()));
    } catch (const json::exception& e) {
        return fail(e.what(), "MalformedInput", kExitInput);
    } catch (const std::exception& e) {
        return fail(e.what(), "Internal", kExitInternal);
    }
    return kExitInternal;
}
