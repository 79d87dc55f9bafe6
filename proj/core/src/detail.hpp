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


// Internal helpers shared by the core sources. Not installed.

#ifndef GIBBS_IBP_SRC_DETAIL_HPP_
#define GIBBS_IBP_SRC_DETAIL_HPP_

#include <string>
#include <string_view>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace gibbs_ibp::detail {

/// SHA-1 of "blob <size>\0<content>", as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view content);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

// Adaptive 61-point Gauss-Kronrod on [a, b] with relative tolerance tol.
// Boost's recursion compares the error of the unit-interval rule against
// the scaled estimate, so the interval is mapped onto [-1, 1] first.
template <typename F>
double integrate_gk(F&& f, double a, double b, unsigned max_depth, double tol) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto g = [&](double x) { return f(mid + half * x); };
  return half * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, max_depth, tol);
}

}  // namespace gibbs_ibp::detail

#endif  // GIBBS_IBP_SRC_DETAIL_HPP_
