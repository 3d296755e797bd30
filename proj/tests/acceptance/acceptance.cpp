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

// Release checks. One PASS/FAIL line per check; exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "tvrag/context_graph.hpp"
#include "tvrag/dedup.hpp"
#include "tvrag/dpp.hpp"
#include "tvrag/embedder.hpp"
#include "tvrag/evaluation.hpp"
#include "tvrag/pipeline.hpp"
#include "tvrag/retriever.hpp"
#include "tvrag/segmenter.hpp"
#include "tvrag/weights_io.hpp"

namespace {

using namespace tvrag;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(2) << x;
    return s.str();
}

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << x;
    return s.str();
}

Outcome lcs_matches_reference() {
    Rng rng(1001);
    std::size_t mismatches = 0;
    const auto t0 = Clock::now();
    for (int i = 0; i < 5000; ++i) {
        const Tokens a = synth::random_tokens(rng, rng.below(13), 1 + rng.below(8));
        const Tokens b = synth::random_tokens(rng, rng.below(13), 1 + rng.below(8));
        if (token_lcs(a, b).size() != oracle::lcs_reference(a, b)) ++mismatches;
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < 10.0, "5000 pairs, " + std::to_string(mismatches) + " mismatches, " + fmt(secs, 2) + " s"};
}

Outcome unique_tokens_preserved() {
    Rng rng(1002);
    std::size_t failures = 0;
    std::string first;
    for (int i = 0; i < 10000; ++i) {
        const auto [prev, cur] = synth::caption_pair(rng);
        const std::vector<std::string> pair{prev, cur};
        // The configured adaptive threshold, and the most aggressive one.
        for (const auto& out : {dedup_stream(pair, DedupConfig{}).captions, dedup_stream_with_threshold(pair, 0.0).captions}) {
            if (!oracle::retention_audit(pair, out).invariant_holds) {
                if (failures++ == 0) first = " (first: '" + prev + "' -> '" + cur + "' gave '" + out[1] + "')";
            }
        }
    }
    return {failures == 0, "10000 pairs x 2 thresholds, " + std::to_string(failures) + " violations" + first};
}

Outcome dedup_tradeoff() {
    const auto stream = synth::redundancy_stream(500, 10, 1003);
    const DedupResult r = dedup_stream_with_threshold(stream, 0.4);
    const auto audit = oracle::retention_audit(stream, r.captions);
    const bool pass = r.report.kappa <= 0.8 && r.report.iota_proxy == 1.0 && audit.iota_proxy == 1.0;
    return {pass, "kappa " + fmt(r.report.kappa) + ", iota " + fmt(r.report.iota_proxy) + " (oracle " +
                      fmt(audit.kappa) + ", " + fmt(audit.iota_proxy) + ")"};
}

Outcome coverage_greedy_bound() {
    Rng rng(1004);
    const double bound = 1.0 - std::exp(-1.0);
    double worst = 1.0, sum = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto cmp = oracle::greedy_vs_optimal_coverage(synth::random_coverage(rng));
        worst = std::min(worst, cmp.ratio);
        sum += cmp.ratio;
    }
    return {worst >= bound, "200 instances, mean ratio " + fmt(sum / 200) + ", min " + fmt(worst) + " (bound " + fmt(bound) + ")"};
}

Outcome dpp_greedy_quality(const fs::path& dump) {
    Rng rng(1005);
    int m1_total = 0, m1_exact = 0, multi_total = 0, multi_good = 0;
    std::ofstream failures(dump);
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = 3 + rng.below(8);
        const Matrix kernel = synth::random_psd(rng, k, k);
        for (std::size_t m = 1; m <= 3; ++m) {
            const GreedyMapResult g = greedy_map(DenseKernel{kernel}, m);
            const auto best = oracle::brute_force_subset_logdet(kernel, m);
            const double ratio = std::exp(g.logdet - best.logdet);
            if (m == 1) {
                ++m1_total;
                if (std::abs(g.logdet - best.logdet) <= 1e-9 * std::max(1.0, std::abs(best.logdet))) ++m1_exact;
                continue;
            }
            ++multi_total;
            if (ratio >= 0.9) {
                ++multi_good;
            } else {
                failures << "kernel " << i << " K=" << k << " M=" << m << " ratio " << ratio << "\n" << kernel << "\n\n";
            }
        }
    }
    const double share = static_cast<double>(multi_good) / multi_total;
    return {m1_exact == m1_total && share >= 0.95,
            "M=1 exact " + std::to_string(m1_exact) + "/" + std::to_string(m1_total) + ", M in {2,3} det ratio >= 0.9 on " +
                std::to_string(multi_good) + "/" + std::to_string(multi_total) + " (" + fmt(100 * share, 1) + "%)"};
}

Outcome distributions_normalized() {
    Rng rng(1006);
    double worst = 0.0;
    std::size_t vectors = 0;
    const auto check = [&](const Vector& v) {
        worst = std::max(worst, std::abs(v.sum() - 1.0));
        ++vectors;
    };
    const EncoderWeights enc = EncoderWeights::random(32, 16, 6);
    for (int trial = 0; trial < 100; ++trial) {
        const Tokens t = synth::random_tokens(rng, 1 + rng.below(30), 40);
        const Matrix h = encode_sequence(embed_tokens(t, 32, 6), enc);
        check(attention_pool(h, enc.segment_attention).weights);
        check(sparse_attention_pool(h, enc.query_attention, 0.6).weights);
        check(encode_query(join_tokens(t), enc, 0.6).weights);

        const std::size_t k = 1 + rng.below(60);
        const Matrix e = synth::random_matrix(rng, k, 16);
        const ContextGraph g = build_adjacency(e, GraphConfig{});
        GatAttention trace;
        enhance(e, g, GatWeights::random(16, 2, trial), 1.0, &trace);
        for (const auto& layer : trace.coefficients)
            for (const auto& row : layer) check(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));

        RetrievalConfig rc;
        rc.top_m = 1 + static_cast<int>(rng.below(12));
        const Vector q = synth::random_matrix(rng, 16, 1).col(0);
        for (const auto& step : greedy_select(e, q, rc).steps) check(step.probabilities);
    }
    return {worst <= 1e-9, std::to_string(vectors) + " vectors, max |sum - 1| = " + sci(worst)};
}

Outcome graph_contracts() {
    Rng rng(1007);
    const GraphConfig cfg;
    std::size_t violations = 0, gated_open = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.below(60);
        Matrix e = synth::random_matrix(rng, k, 8);
        // Near-copies of a few rows so the cosine gate opens for far pairs.
        for (std::size_t i = 7; i < k; i += 7)
            e.row(static_cast<Eigen::Index>(i)) = e.row(static_cast<Eigen::Index>(i % 3)) + 0.01 * synth::random_matrix(rng, 1, 8);
        const ContextGraph g = build_adjacency(e, cfg);
        const Matrix unit = normalized_rows(e);
        for (std::size_t i = 0; i < k; ++i) {
            if (std::abs(g.weight(i, i) - 1.0) > 1e-9) ++violations;
            for (std::size_t j = 0; j < k; ++j) {
                if (g.weight(i, j) != g.weight(j, i)) ++violations;
                if (i == j) continue;
                const std::size_t gap = i > j ? i - j : j - i;
                const double c = unit.row(static_cast<Eigen::Index>(i)).dot(unit.row(static_cast<Eigen::Index>(j)));
                const bool gated = gap > static_cast<std::size_t>(cfg.delta) && c < cfg.tau;
                const double expected = cfg.alpha * std::exp(-cfg.beta * static_cast<double>(gap)) + (1 - cfg.alpha) * c;
                if (gated && g.weight(i, j) != 0.0) ++violations;
                if (!gated && std::abs(g.weight(i, j) - expected) > 1e-12) ++violations;
                if (!gated && gap > static_cast<std::size_t>(cfg.delta)) ++gated_open;
            }
        }
    }
    return {violations == 0, "100 sets, " + std::to_string(violations) + " violations, " + std::to_string(gated_open) +
                                 " far pairs admitted by the cosine gate"};
}

Outcome kl_guard_terminates() {
    Rng rng(1008);
    RetrievalConfig rc;
    rc.epsilon_kl = 0.1;
    double worst_kl = 0.0;
    int worst_adjustments = 0, fallbacks = 0;
    for (int i = 0; i < 100; ++i) {
        const std::size_t k = 2 + rng.below(500);
        const double sharpness = rng.uniform(0.5, 20.0);
        Vector p(static_cast<Eigen::Index>(k));
        for (Eigen::Index j = 0; j < p.size(); ++j) p(j) = std::exp(sharpness * rng.normal());
        p /= p.sum();
        const KlGuardResult r = kl_guard(p, rc);
        worst_kl = std::max(worst_kl, r.kl);
        worst_adjustments = std::max(worst_adjustments, r.adjustments);
        fallbacks += r.uniform_fallback ? 1 : 0;
    }
    return {worst_kl <= 0.1 && worst_adjustments <= kMaxTemperatureAdjustments,
            "max KL " + fmt(worst_kl) + " bits, max adjustments " + std::to_string(worst_adjustments) + ", uniform fallbacks " +
                std::to_string(fallbacks)};
}

Outcome retrieval_separation() {
    const auto corpus = synth::planted_relevance_corpus(1);
    PipelineConfig pc;
    pc.seed = 1;
    const ModelWeights w = ModelWeights::random(pc.encoder.token_dim, pc.encoder.hidden_dim, pc.graph.num_layers, pc.seed);
    const SegmentIndex idx = build_index(corpus.captions, corpus.transcripts, pc, w);
    QueryFile q;
    q.queries = corpus.queries;
    RetrievalConfig rc = pc.retrieval;
    rc.top_m = 8;
    const EvalReport r = evaluate(idx, w.encoder, q, rc, 1);
    const double dpp = r.at(Selector::dpp).recall, greedy = r.at(Selector::greedy).recall;
    const double temporal = r.at(Selector::temporal).recall, random = r.at(Selector::random).recall;
    const bool pass = dpp >= greedy && greedy >= temporal && temporal >= random && dpp - random >= 0.25;
    return {pass, "K=" + std::to_string(idx.size()) + ", " + std::to_string(r.queries) + " queries, recall@8 dpp " + fmt(dpp) +
                      " greedy " + fmt(greedy) + " temporal " + fmt(temporal) + " random " + fmt(random)};
}

Outcome segment_size_sweep() {
    const Track c = synth::planted_event_captions(12);
    Track silent;
    silent.kind = TrackKind::transcript;
    silent.duration = c.duration;
    const double best = optimal_segment_size(c, silent, default_segment_candidates());
    return {best == 30.0, "optimal size " + fmt(best, 0) + " s"};
}

struct CliRun {
    int status = -1;
    std::string out;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(TVRAG_CLI_PATH) + " " + args + " 2>/dev/null";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome end_to_end_determinism(const fs::path& work) {
    const fs::path data(TVRAG_TEST_DATA);
    std::vector<std::string> artifacts[2];
    for (int round = 0; round < 2; ++round) {
        const fs::path idx = work / ("run" + std::to_string(round) + ".idx");
        const fs::path prompt = work / ("run" + std::to_string(round) + ".prompt");
        const CliRun built = run_cli("index --seed 7 --captions " + (data / "captions_90s.jsonl").string() + " --transcripts " +
                                     (data / "transcripts_90s.jsonl").string() + " --out " + idx.string());
        const CliRun asked = run_cli("query --seed 7 --index " + idx.string() +
                                     " --question 'what is the cyclist doing' --top-m 2 --prompt-out " + prompt.string());
        if (built.status != 0 || asked.status != 0)
            return {false, "cli exited with " + std::to_string(built.status) + "/" + std::to_string(asked.status)};
        artifacts[round] = {built.out, slurp(idx), asked.out, slurp(prompt)};
    }
    const char* names[] = {"summary", "index file", "query output", "prompt"};
    std::string differing;
    for (std::size_t i = 0; i < 4; ++i)
        if (artifacts[0][i] != artifacts[1][i]) differing += std::string(" ") + names[i];
    return {differing.empty(), differing.empty() ? "summary, index bytes, query output and prompt identical"
                                                 : "differs:" + differing};
}

Outcome performance() {
    const auto corpus = synth::scaled_corpus(10000, 12);
    PipelineConfig pc; // token_dim 128, hidden_dim 64
    pc.seed = 12;
    const auto t0 = Clock::now();
    const SegmentIndex idx = build_index(corpus.captions, corpus.transcripts, pc);
    const double build = seconds_since(t0);
    const ModelWeights w = ModelWeights::random(pc.encoder.token_dim, pc.encoder.hidden_dim, pc.graph.num_layers, pc.seed);

    RetrievalConfig rc = pc.retrieval;
    rc.top_m = 16;
    std::vector<double> times;
    for (int i = 0; i < 5; ++i) {
        const auto t1 = Clock::now();
        const RetrievalResult r = retrieve(idx, corpus.queries[static_cast<std::size_t>(i)].question, w.encoder, rc);
        times.push_back(seconds_since(t1) * 1e3);
        if (r.steps.size() != 16) return {false, "retrieve returned " + std::to_string(r.steps.size()) + " segments"};
    }
    std::sort(times.begin(), times.end());
    const double median = times[times.size() / 2];
    return {idx.size() == 10000 && build < 120.0 && median < 200.0,
            "K=" + std::to_string(idx.size()) + ", build " + fmt(build, 1) + " s, retrieve M=16 median " + fmt(median, 1) +
                " ms (min " + fmt(times.front(), 1) + ", max " + fmt(times.back(), 1) + ")"};
}

} // namespace

int main() {
    const fs::path work = fs::temp_directory_path() / ("tvrag_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(work);
    const fs::path dpp_dump = fs::current_path() / "acceptance_dpp_failures.txt";

    const std::vector<std::pair<std::string, std::function<Outcome()>>> checks{
        {"01 lcs-vs-reference", lcs_matches_reference},
        {"02 unique-token-preservation", unique_tokens_preserved},
        {"03 dedup-tradeoff", dedup_tradeoff},
        {"04 coverage-greedy-bound", coverage_greedy_bound},
        {"05 dpp-greedy-quality", [&] { return dpp_greedy_quality(dpp_dump); }},
        {"06 distributions-normalized", distributions_normalized},
        {"07 graph-contracts", graph_contracts},
        {"08 kl-guard", kl_guard_terminates},
        {"09 retrieval-separation", retrieval_separation},
        {"10 segment-size-sweep", segment_size_sweep},
        {"11 end-to-end-determinism", [&] { return end_to_end_determinism(work); }},
        {"12 performance", performance},
    };

    int failed = 0;
    for (const auto& [name, check] : checks) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << "  " << o.detail << std::endl;
    }
    fs::remove_all(work);
    std::cout << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " checks passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
