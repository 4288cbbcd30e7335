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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace optscale {

/// Shortest representation that parses back to the same double.
std::string format_double(double x);
/// Fixed notation with `digits` decimals, for rendered tables.
std::string format_fixed(double x, int digits);

/// Strict parse of a whole field; throws InvalidInput.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Incremental 64-bit FNV-1a.
class Fnv1a {
public:
    void update(const void* data, std::size_t size);
    /// 16 lowercase hex digits.
    std::string hex() const;

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace optscale
