/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srnet {

enum class ErrorCode {
    InvalidArgument,
    RegionUnreachable,
    YieldTooLow,
    Parse,
    Schema,
    SingularGeometry,
    DegenerateGeometry,
    GeometryViolated,
    DegenerateScale,
    DegenerateGradient,
    Infeasible,
    Diverged,
    NoConvergence,
    Internal,
};

inline std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::RegionUnreachable: return "region-unreachable";
    case ErrorCode::YieldTooLow: return "yield-too-low";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Schema: return "schema-error";
    case ErrorCode::SingularGeometry: return "singular-geometry";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::GeometryViolated: return "geometry-violated";
    case ErrorCode::DegenerateScale: return "degenerate-scale";
    case ErrorCode::DegenerateGradient: return "degenerate-gradient";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::Diverged: return "diverged";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::Internal: return "internal";
    }
    return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        fail(ErrorCode::InvalidArgument, what);
}

} // namespace srnet
