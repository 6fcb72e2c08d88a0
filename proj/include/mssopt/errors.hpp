// Copyright 2026 The mssopt Authors
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

#ifndef MSSOPT_ERRORS_HPP_
#define MSSOPT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace mssopt {

// Base class for every recoverable failure raised by this library.
// Solver outcomes (infeasible, iteration limit, ...) are reported as status
// codes instead; exceptions are reserved for violated preconditions and
// model-domain breaches.
class MssError : public std::runtime_error {
 public:
  explicit MssError(const std::string& what) : std::runtime_error(what) {}
};

// Polynomial boundary fit has no solution within the requested degree.
class SingularFit : public MssError {
 public:
  using MssError::MssError;
};

// Tendon force inversion requires a strictly positive force.
class NonPositiveForce : public MssError {
 public:
  using MssError::MssError;
};

// Argument left the admissible domain of a model map (force-velocity branch,
// contraction-rate range, non-finite state, ...).
class DomainError : public MssError {
 public:
  using MssError::MssError;
};

// Activation below the floor makes the contraction-rate factor undefined.
class ZeroActivation : public MssError {
 public:
  using MssError::MssError;
};

// Neural input recovery found no root in [0, 1].
class NoRootInUnitInterval : public MssError {
 public:
  using MssError::MssError;
};

// Stacked output map [A; E] is numerically singular.
class SingularC : public MssError {
 public:
  using MssError::MssError;
};

// A co-contraction row of E does not sum to one.
class RowSumViolation : public MssError {
 public:
  using MssError::MssError;
};

// The positivity condition on 1 - C_tau * sigma_tau fails.
class FeasibilityConditionViolation : public MssError {
 public:
  using MssError::MssError;
};

// A tendon force implied by the flat outputs is non-positive.
class SlackViolation : public MssError {
 public:
  using MssError::MssError;
};

// Recovered activation left [a_min, 1].
class ActivationOutOfRange : public MssError {
 public:
  using MssError::MssError;
};

// Sum-of-squares encoding requires an even polynomial degree.
class OddDegree : public MssError {
 public:
  using MssError::MssError;
};

// Equality constraints over-determine a polynomial of the requested degree.
class DegreeTooLow : public MssError {
 public:
  using MssError::MssError;
};

// Feasible-point construction requires C_Y * 1 > 0 componentwise.
class NonPositiveSigma : public MssError {
 public:
  using MssError::MssError;
};

// Adaptive integration could not meet the tolerance above the minimum step.
class StepFailure : public MssError {
 public:
  using MssError::MssError;
};

// Malformed or inconsistent configuration input.
class ConfigError : public MssError {
 public:
  using MssError::MssError;
};

}  // namespace mssopt

#endif  // MSSOPT_ERRORS_HPP_
