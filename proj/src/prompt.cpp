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

#include "tvrag/prompt.hpp"

#include <algorithm>
#include <cstdio>

#include "tvrag/error.hpp"
#include "tvrag/text.hpp"

namespace tvrag {

namespace {

std::string block_header(const ContextBlock& b) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "[segment %zu | %.1f-%.1f s]", b.segment, b.t_start, b.t_end);
    return buf;
}

} // namespace

std::size_t estimate_tokens(std::string_view text) { return (utf8_length(text) + 3) / 4; }

std::string PromptBundle::render() const {
    std::string out = system;
    out += "\n\nContext:\n";
    for (const auto& b : blocks) {
        out += block_header(b);
        out += '\n';
        out += b.text;
        out += "\n\n";
    }
    out += "Question: ";
    out += question;
    out += '\n';
    return out;
}

PromptBundle assemble_prompt(const SegmentIndex& index, const RetrievalResult& result, std::string_view question,
                             std::size_t token_budget) {
    PromptBundle p;
    p.system = std::string(kSystemPreamble);
    p.question = normalize_text(question);

    // Selection rank breaks score ties: later picks go first.
    std::vector<std::pair<ContextBlock, std::size_t>> picked;
    for (std::size_t rank = 0; rank < result.steps.size(); ++rank) {
        const auto& step = result.steps[rank];
        if (step.index >= index.size()) throw Error(Errc::length_mismatch, "selection refers to a missing segment");
        const auto& seg = index.segments[step.index];
        picked.push_back({{seg.index, seg.t_start, seg.t_end, step.score, seg.fused_text}, rank});
    }

    const auto sync = [&] {
        std::vector<std::pair<ContextBlock, std::size_t>> ordered = picked;
        std::sort(ordered.begin(), ordered.end(),
                  [](const auto& a, const auto& b) { return a.first.segment < b.first.segment; });
        p.blocks.clear();
        for (auto& o : ordered) p.blocks.push_back(o.first);
        p.token_estimate = estimate_tokens(p.render());
    };
    sync();
    while (p.token_estimate > token_budget && !picked.empty()) {
        const auto worst = std::min_element(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
            if (a.first.score != b.first.score) return a.first.score < b.first.score;
            return a.second > b.second;
        });
        p.dropped.push_back(worst->first.segment);
        picked.erase(worst);
        sync();
    }
    if (p.token_estimate > token_budget)
        throw Error(Errc::invalid_config, "token budget " + std::to_string(token_budget) +
                                              " cannot hold the prompt without context (" +
                                              std::to_string(p.token_estimate) + " tokens)");
    return p;
}

nlohmann::json to_json(const PromptBundle& prompt) {
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : prompt.blocks)
        blocks.push_back({{"segment", b.segment}, {"t_start", b.t_start}, {"t_end", b.t_end}, {"text", b.text}});
    return {{"system", prompt.system},
            {"blocks", blocks},
            {"question", prompt.question},
            {"token_estimate", prompt.token_estimate},
            {"dropped", prompt.dropped}};
}

} // namespace tvrag
