// Copyright 2026 The diarkit Authors
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

#ifndef DIARKIT_HUNGARIAN_H_
#define DIARKIT_HUNGARIAN_H_

#include <Eigen/Dense>
#include <vector>

namespace diarkit {

// Maximum-weight one-to-one assignment of rows to columns (Hungarian method,
// O(n^3)). result[i] is the column assigned to row i, or -1 when the matrix
// is wider than tall and row i got a padding column.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd &weights);

}  // namespace diarkit

#endif  // DIARKIT_HUNGARIAN_H_
