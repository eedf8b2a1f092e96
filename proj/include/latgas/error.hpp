/*
 *   Copyright 2026 The latgas Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace latgas {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A velocity set violates reflection/permutation symmetry or a moment identity.
class SymmetryError : public Error {
public:
  using Error::Error;
};

/// Newton inversion of the (rho, p) map failed; the target is outside or too
/// close to the boundary of the admissible region.
class InversionError : public Error {
public:
  using Error::Error;
};

/// A jump kernel would carry a negative rate for the requested (N, a, M).
class NegativeRateError : public Error {
public:
  using Error::Error;
};

/// Scaling exponents or other model parameters rejected in strict mode.
class InvalidParameters : public Error {
public:
  using Error::Error;
};

/// The requested conserved-quantity sector has no configuration.
class InfeasibleSector : public Error {
public:
  using Error::Error;
};

class CflViolation : public Error {
public:
  using Error::Error;
};

/// Spectral divergence of initial data too large for the incompressible solver.
class NonSolenoidalInput : public Error {
public:
  using Error::Error;
};

class EigenSolverError : public Error {
public:
  using Error::Error;
};

/// Event tables disagree with a from-scratch recomputation.
class AuditFailure : public Error {
public:
  using Error::Error;
};

/// Experiment configuration is malformed; `field` names the offending key.
class ConfigError : public Error {
public:
  ConfigError(std::string field, const std::string& what)
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace latgas
