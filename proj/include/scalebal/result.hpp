// Copyright 2026 The scalebal Authors
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

#ifndef SCALEBAL_RESULT_HPP_
#define SCALEBAL_RESULT_HPP_

#include <string>
#include <vector>

#include "scalebal/matrix.hpp"

namespace scalebal {

struct TraceRecord {
  long iteration = 0;
  double value = 0;         // objective value
  double grad_norm = 0;     // l2 norm of the gradient
  double metric = 0;        // problem-specific error metric
  double step_inf = 0;      // l-infinity norm of the step taken
  double oracle_value = 0;  // oracle model value (newton) / decrement (ipm)
  double k = 0;             // oracle quality in force (newton only)
};

struct IterationTrace {
  std::vector<TraceRecord> records;
  // max_t ||x_t - x_final||_inf over the run; a proxy for the level-set
  // diameter, not the diameter itself.
  double r_inf_observed = 0;
};

enum class SolveStatus {
  kConverged,
  kCapExceeded,  // iteration/sweep/B cap hit; best factors reported
  kInfeasible,
};

struct DiagonalFactorsResult {
  DiagonalFactors factors;
  SolveStatus status = SolveStatus::kConverged;
  double error = 0;        // achieved problem metric
  double kappa = 1;        // exp(max log factor - min log factor)
  double objective = 0;    // final objective value
  long iterations = 0;
  double box_bound = 0;    // final B (0 where not applicable)
  std::string note;        // e.g. SCC suppression summary
  IterationTrace trace;
};

}  // namespace scalebal

#endif  // SCALEBAL_RESULT_HPP_
