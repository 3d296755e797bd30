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

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvrag {

enum class Errc {
    malformed_line,
    invalid_interval,
    empty_track,
    overlap_exceeded,
    kind_mismatch,
    invalid_segment_size,
    empty_caption,
    dimension_mismatch,
    empty_sequence,
    empty_query,
    empty_index,
    version_mismatch,
    size_exceeded,
    length_mismatch,
    invalid_config,
    io_error,
    corrupt_file,
    numerical_failure,
};

std::string_view errc_name(Errc code);

// Error category used by the CLI to pick an exit code.
enum class ErrorClass { input, version, internal };

ErrorClass classify(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Raised by parse_track; carries the 1-based line number of the offending line.
class LineError : public Error {
public:
    LineError(Errc code, std::size_t line, const std::string& message)
        : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace tvrag
