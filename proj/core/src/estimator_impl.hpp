//
// Copyright 2026 The uldp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef ULDP_SRC_ESTIMATOR_IMPL_HPP_
#define ULDP_SRC_ESTIMATOR_IMPL_HPP_

#include <memory>

#include "uldp/estimators.hpp"

namespace uldp::internal {

std::unique_ptr<Estimator> MakeFullEstimator(const EstimatorConfig& config,
                                             const EstimatorOptions& options);

}  // namespace uldp::internal

#endif  // ULDP_SRC_ESTIMATOR_IMPL_HPP_
