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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace blockbox {

enum class ErrorCode {
    invalid_parameter,
    rejected,
    framing,
    protocol,
    oversize,
    incompatible_peer,
    unreachable,
    not_found,
    invalid_input,
    log_corruption,
    io,
};

std::string_view to_string(ErrorCode code) noexcept;

//! Every recoverable failure in the project is reported as an Error carrying a code,
//! so callers can branch on the category without parsing messages.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace blockbox
