// Copyright 2026 The gaitcov Authors
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

#ifndef GAITCOV_ERRORS_HPP_
#define GAITCOV_ERRORS_HPP_

#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaitcov {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its admissible range (bad weights, bad config keys).
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: empty sets, length mismatches, bad files.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Requested operation is not defined for this model (e.g. field sampling in 3-D shape space).
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// The drag matrix of a model is (numerically) singular at a shape.
///
/// Carries the offending shape and, when raised from inside a cycle
/// integration, the gait phase at which it happened.
class SingularConfiguration : public Error {
 public:
  SingularConfiguration(std::vector<double> shape, double condition, double phase = -1.0)
      : Error(format(shape, condition, phase)), shape_(std::move(shape)), condition_(condition), phase_(phase) {}

  const std::vector<double>& shape() const { return shape_; }
  double condition() const { return condition_; }
  /// Negative when the error was not raised during a cycle integration.
  double phase() const { return phase_; }

  SingularConfiguration at_phase(double phase) const { return SingularConfiguration(shape_, condition_, phase); }

 private:
  static std::string format(const std::vector<double>& shape, double condition, double phase) {
    std::ostringstream os;
    os << "singular drag matrix (condition " << condition << ") at r = (";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
    os << ")";
    if (phase >= 0.0) os << " at phase " << phase;
    return os.str();
  }

  std::vector<double> shape_;
  double condition_;
  double phase_;
};

/// Optimization could not make progress (line-search stall, too many discarded rollouts).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Print a warning to stderr once per distinct message.
inline void warn_once(const std::string& message) {
  static std::mutex mutex;
  static std::set<std::string> seen;
  std::lock_guard<std::mutex> lock(mutex);
  if (seen.insert(message).second) std::cerr << "gaitcov: warning: " << message << '\n';
}

}  // namespace gaitcov

#endif  // GAITCOV_ERRORS_HPP_
