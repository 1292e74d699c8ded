// Copyright 2026 The ptf Authors. All Rights Reserved.
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

#ifndef PTF_SPECIAL_HPP_
#define PTF_SPECIAL_HPP_

namespace ptf {

// Digamma function for x > 0. Uses the upward recurrence
// psi(x) = psi(x + 1) - 1/x until x >= 10, then the asymptotic
// Bernoulli series. Absolute error below 1e-13 for x >= 1e-8.
double digamma(double x);

// exp(digamma(x)), the geometric mean of a unit-rate Gamma(x) variable.
double exp_digamma(double x);

}  // namespace ptf

#endif  // PTF_SPECIAL_HPP_
