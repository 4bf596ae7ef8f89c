// Copyright (c) 2026 The esfd Authors. All Rights Reserved.
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

// Long-format CSV: one metric per row under a single header shared by every
// command. Doubles are written with 17 significant digits through
// std::to_chars, which round-trips exactly and ignores the C locale.

#include <charconv>
#include <cmath>
#include <ostream>
#include <span>
#include <string>

#include "esfd/experiments.hpp"

namespace esfd {

inline constexpr const char* kCsvHeader = "experiment,n,sigma,lambda,trials,seed,metric,value";

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os, std::span<const ExperimentRecord> records) {
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        const std::string prefix = r.experiment + ',' + std::to_string(r.n) + ',' +
                                   format_double(r.sigma) + ',' + std::to_string(r.lambda) + ',' +
                                   std::to_string(r.trials) + ',' + std::to_string(r.seed) + ',';
        for (const auto& [name, value] : r.metrics) {
            os << prefix << name << ',' << format_double(value) << '\n';
        }
    }
}

}  // namespace esfd
