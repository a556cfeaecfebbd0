// Copyright 2026 The privgraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef PRIVGRAPH_ERROR_HPP_
#define PRIVGRAPH_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace privgraph {

// Bad input: malformed files, invalid configuration, out-of-range ids.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite values, solver non-convergence.
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when the linear propagation iterate blows up, or when the
// iteration cannot converge because the homophily residual violates the
// spectral-radius bound.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace privgraph

#endif  // PRIVGRAPH_ERROR_HPP_
