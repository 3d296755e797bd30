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
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tvrag {

using Tokens = std::vector<std::string>;

// NFC normalization, then every run of Unicode whitespace collapsed to one
// ASCII space, leading/trailing whitespace removed. Invalid UTF-8 sequences
// become U+FFFD.
std::string normalize_text(std::string_view text);

// Splits on ASCII whitespace. Callers normalize first.
Tokens tokenize(std::string_view text);

std::string join_tokens(const Tokens& tokens);

// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

} // namespace tvrag
