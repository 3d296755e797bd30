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

#include "tvrag/error.hpp"

namespace tvrag {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::malformed_line: return "MalformedLine";
    case Errc::invalid_interval: return "InvalidInterval";
    case Errc::empty_track: return "EmptyTrack";
    case Errc::overlap_exceeded: return "OverlapExceeded";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::invalid_segment_size: return "InvalidSegmentSize";
    case Errc::empty_caption: return "EmptyCaption";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::empty_sequence: return "EmptySequence";
    case Errc::empty_query: return "EmptyQuery";
    case Errc::empty_index: return "EmptyIndex";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::size_exceeded: return "SizeExceeded";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::io_error: return "IoError";
    case Errc::corrupt_file: return "CorruptFile";
    case Errc::numerical_failure: return "NumericalFailure";
    }
    return "Unknown";
}

ErrorClass classify(Errc code) {
    switch (code) {
    case Errc::version_mismatch:
        return ErrorClass::version;
    case Errc::dimension_mismatch:
    case Errc::size_exceeded:
    case Errc::length_mismatch:
    case Errc::numerical_failure:
        return ErrorClass::internal;
    default:
        return ErrorClass::input;
    }
}

} // namespace tvrag
