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


// Minimal library use: simulate the three-branch preset gaits, build the
// six-letter library and score it against the standard goal grid.

#include <iostream>

#include "gaitcov/coverage.hpp"
#include "gaitcov/dynamics.hpp"

int main() {
  using namespace gaitcov;
  const ConnectionModel model{ThreeBranch{}};
  Library lib;
  lib.include_inverses = true;
  for (int k = 1; k <= 3; ++k) {
    const Pose2 d = integrate_cycle(model, three_branch_preset_gait(k), kDefaultCycleSteps).displacement;
    lib.letters.push_back(d);
    lib.labels.push_back("G" + std::to_string(k));
    std::cout << "G" << k << " displacement " << d << "\n";
  }
  const GoalSet goals = standard_grid();
  for (int k = 1; k <= 4; ++k)
    std::cout << "h_" << k << " = " << coverage_cost_k(lib, k, goals).h << "\n";
}
