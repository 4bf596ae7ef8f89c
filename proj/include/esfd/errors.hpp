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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace esfd {

/// Argument outside the mathematical domain of a function (e.g. Gamma at a
/// non-positive point).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller misuse: bad flag, unknown objective, mismatched dimensions, or an
/// experiment plan that violates its precondition.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The objective returned a non-finite value.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(const std::string& what, std::size_t sample_index)
        : std::runtime_error(what), sample_index_(sample_index) {}

    /// Index of the offending perturbation, or npos for R(theta) itself.
    std::size_t sample_index() const noexcept { return sample_index_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t sample_index_;
};

/// Two algebraically identical routes disagreed beyond tolerance.
class NumericalConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace esfd
