/*
 * Copyright 2026 The gibbs-ibp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GIBBS_IBP_ERROR_HPP_
#define GIBBS_IBP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gibbs_ibp {

/// A parameter or argument lies outside the domain of the operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A table was asked for an entry beyond the depth it was built to.
class TableDepthError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Normalization failures, NaNs and Monte-Carlo degeneracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gibbs_ibp

#endif  // GIBBS_IBP_ERROR_HPP_
