// Copyright 2026 The optscale Authors
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

namespace optscale {

enum class ErrorKind {
    InvalidInput,
    NumericFailure,
    DegenerateSpectrum,
    DegenerateTarget,
    Divergence,
    InsufficientData,
    InvalidLoss,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind drives
/// how callers (the CLI in particular) classify the failure.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DivergenceError : public Error {
public:
    DivergenceError(int step, const std::string& what)
        : Error(ErrorKind::Divergence, what), step_(step) {}

    /// Zero-based index of the update that produced a non-finite weight.
    int step() const noexcept { return step_; }

private:
    int step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

inline void require(bool condition, const std::string& what) {
    if (!condition) fail(ErrorKind::InvalidInput, what);
}

}  // namespace optscale
