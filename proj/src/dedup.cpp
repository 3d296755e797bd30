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

#include "tvrag/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tvrag/error.hpp"

namespace tvrag {

namespace {

// suffix[i * (m + 1) + j] = |LCS(a[i:], b[j:])|
std::vector<std::size_t> suffix_table(std::span<const std::string> a, std::span<const std::string> b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> s((n + 1) * (m + 1), 0);
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m; j-- > 0;) {
            const std::size_t here = i * (m + 1) + j;
            if (a[i] == b[j])
                s[here] = s[(i + 1) * (m + 1) + j + 1] + 1;
            else
                s[here] = std::max(s[(i + 1) * (m + 1) + j], s[i * (m + 1) + j + 1]);
        }
    }
    return s;
}

struct PairOutcome {
    std::string text;
    std::vector<bool> removed; // per token of cur
    bool deduplicated = false;
};

PairOutcome dedup_tokens(const Tokens& prev, const Tokens& cur, double threshold) {
    PairOutcome out;
    out.removed.assign(cur.size(), false);
    if (cur.empty() || similarity(prev, cur) <= threshold) {
        out.text = join_tokens(cur);
        return out;
    }
    out.deduplicated = true;
    for (std::size_t pos : token_lcs(prev, cur)) out.removed[pos] = true;

    Tokens kept;
    for (std::size_t i = 0; i < cur.size(); ++i)
        if (!out.removed[i]) kept.push_back(cur[i]);
    out.text = kept.empty() ? std::string(kSameAsPrevious) : join_tokens(kept);
    return out;
}

double token_threshold(const Tokens& tokens, const DedupConfig& config) {
    if (tokens.empty()) throw Error(Errc::empty_caption, "adaptive threshold of an empty caption");
    const double t = config.alpha + config.beta * shannon_entropy(tokens) / static_cast<double>(tokens.size());
    return std::clamp(t, 0.0, 1.0);
}

template <typename ThresholdFn>
DedupResult run_stream(std::span<const std::string> captions, ThresholdFn threshold_of) {
    DedupResult result;
    auto& report = result.report;
    report.caption_count = captions.size();
    result.captions.reserve(captions.size());

    std::size_t chars_before = 0, chars_after = 0;
    std::size_t unique_total = 0, unique_kept = 0;
    Tokens prev;
    for (std::size_t i = 0; i < captions.size(); ++i) {
        Tokens cur = tokenize(captions[i]);
        chars_before += utf8_length(captions[i]);

        if (i == 0 || cur.empty()) {
            result.captions.emplace_back(captions[i]);
            chars_after += utf8_length(captions[i]);
            prev = std::move(cur);
            continue;
        }

        const double threshold = threshold_of(cur);
        PairOutcome outcome = dedup_tokens(prev, cur, threshold);

        const std::set<std::string_view> seen(prev.begin(), prev.end());
        for (std::size_t t = 0; t < cur.size(); ++t) {
            if (seen.contains(cur[t])) continue;
            ++unique_total;
            unique_kept += !outcome.removed[t];
        }
        report.removed_tokens += static_cast<std::size_t>(std::count(outcome.removed.begin(), outcome.removed.end(), true));
        report.deduplicated_captions += outcome.deduplicated;

        const double fraction = unique_information_fraction(prev, cur);
        report.min_unique_fraction = std::min(report.min_unique_fraction, fraction);
        if (!(threshold < 1.0 - fraction)) ++report.condition_violations;

        chars_after += utf8_length(outcome.text);
        result.captions.push_back(std::move(outcome.text));
        prev = std::move(cur);
    }

    report.kappa = chars_before == 0 ? 1.0 : static_cast<double>(chars_after) / static_cast<double>(chars_before);
    report.iota_proxy = unique_total == 0 ? 1.0 : static_cast<double>(unique_kept) / static_cast<double>(unique_total);
    return result;
}

} // namespace

std::vector<std::size_t> token_lcs(std::span<const std::string> a, std::span<const std::string> b) {
    const std::size_t n = a.size(), m = b.size();
    const auto s = suffix_table(a, b);
    std::vector<std::size_t> positions;
    std::size_t need = s[0];
    std::size_t ai = 0, bj = 0;
    while (need > 0) {
        bool taken = false;
        for (std::size_t j = bj; j < m && !taken; ++j) {
            for (std::size_t i = ai; i < n; ++i) {
                if (a[i] == b[j] && s[(i + 1) * (m + 1) + j + 1] + 1 == need) {
                    positions.push_back(j);
                    ai = i + 1;
                    bj = j + 1;
                    --need;
                    taken = true;
                    break;
                }
            }
        }
    }
    return positions;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    // Two-row forward DP; the full table is only needed for the backtrace.
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j)
            cur[j + 1] = a[i] == b[j] ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double similarity(std::span<const std::string> prev, std::span<const std::string> cur) {
    const std::size_t total = prev.size() + cur.size();
    if (total == 0) return 0.0;
    return 2.0 * static_cast<double>(lcs_length(prev, cur)) / static_cast<double>(total);
}

double similarity(std::string_view prev, std::string_view cur) {
    return similarity(tokenize(prev), tokenize(cur));
}

double shannon_entropy(std::span<const std::string> tokens) {
    if (tokens.empty()) return 0.0;
    std::map<std::string_view, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    const double n = static_cast<double>(tokens.size());
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double shannon_entropy(std::string_view text) {
    return shannon_entropy(tokenize(text));
}

double adaptive_threshold(std::string_view caption, const DedupConfig& config) {
    return token_threshold(tokenize(caption), config);
}

std::string dedup_pair_with_threshold(std::string_view prev, std::string_view cur, double threshold) {
    return dedup_tokens(tokenize(prev), tokenize(cur), threshold).text;
}

std::string dedup_pair(std::string_view prev, std::string_view cur, const DedupConfig& config) {
    const Tokens cur_tokens = tokenize(cur);
    if (cur_tokens.empty()) return std::string(cur);
    return dedup_tokens(tokenize(prev), cur_tokens, token_threshold(cur_tokens, config)).text;
}

double unique_information_fraction(std::span<const std::string> prev, std::span<const std::string> cur) {
    if (cur.empty()) return 0.0;
    const std::set<std::string_view> seen(prev.begin(), prev.end());
    std::map<std::string_view, std::size_t> counts;
    for (const auto& t : cur) ++counts[t];
    const double n = static_cast<double>(cur.size());
    double total = 0.0, unique = 0.0;
    for (const auto& [token, c] : counts) {
        const double p = static_cast<double>(c) / n;
        const double term = -p * std::log2(p);
        total += term;
        if (!seen.contains(token)) unique += term;
    }
    if (total == 0.0) return seen.contains(cur.front()) ? 0.0 : 1.0;
    return unique / total;
}

DedupResult dedup_stream(std::span<const std::string> captions, const DedupConfig& config) {
    config.validate();
    return run_stream(captions, [&](const Tokens& cur) { return token_threshold(cur, config); });
}

DedupResult dedup_stream_with_threshold(std::span<const std::string> captions, double threshold) {
    return run_stream(captions, [threshold](const Tokens&) { return threshold; });
}

Track dedup_track(const Track& captions, const DedupConfig& config, DedupReport* report) {
    std::vector<std::string> texts;
    texts.reserve(captions.entries.size());
    for (const auto& e : captions.entries) texts.push_back(e.text);
    DedupResult result = dedup_stream(texts, config);

    Track out = captions;
    for (std::size_t i = 0; i < out.entries.size(); ++i) out.entries[i].text = std::move(result.captions[i]);
    if (report) *report = result.report;
    return out;
}

} // namespace tvrag
