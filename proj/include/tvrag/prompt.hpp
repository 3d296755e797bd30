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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tvrag/index.hpp"
#include "tvrag/retriever.hpp"

namespace tvrag {

inline constexpr std::string_view kSystemPreamble =
    "You answer questions about a video. The context below lists time-stamped visual captions (VISUAL) and "
    "speech transcript lines (AUDIO) from the video, in chronological order. Use only this context.";

struct ContextBlock {
    std::size_t segment = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    double score = 0.0; // selection score, used for truncation
    std::string text;
};

struct PromptBundle {
    std::string system;
    std::vector<ContextBlock> blocks; // ascending segment index
    std::string question;
    std::size_t token_estimate = 0;
    std::vector<std::size_t> dropped; // segments removed to meet the budget

    std::string render() const;
};

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

/// Blocks for the selected segments in temporal order. While the rendered
/// prompt is over `token_budget`, the lowest-scoring block is dropped (the
/// later pick on ties). Throws Error(invalid_config) when even the prompt
/// without context exceeds the budget.
PromptBundle assemble_prompt(const SegmentIndex& index, const RetrievalResult& result, std::string_view question,
                             std::size_t token_budget);

nlohmann::json to_json(const PromptBundle& prompt);

} // namespace tvrag
