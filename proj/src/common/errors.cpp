/*
   Copyright 2026 The Blockbox Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <blockbox/common/errors.hpp>

namespace blockbox {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_parameter:
            return "invalid-parameter";
        case ErrorCode::rejected:
            return "rejected";
        case ErrorCode::framing:
            return "framing";
        case ErrorCode::protocol:
            return "protocol";
        case ErrorCode::oversize:
            return "oversize";
        case ErrorCode::incompatible_peer:
            return "incompatible-peer";
        case ErrorCode::unreachable:
            return "unreachable";
        case ErrorCode::not_found:
            return "not-found";
        case ErrorCode::invalid_input:
            return "invalid-input";
        case ErrorCode::log_corruption:
            return "log-corruption";
        case ErrorCode::io:
            return "io";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error{std::string{to_string(code)} + ": " + message}, code_{code} {}

void raise(ErrorCode code, const std::string& message) { throw Error{code, message}; }

}  // namespace blockbox
