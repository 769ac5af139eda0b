// Copyright 2026 The qsync Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qsync {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration document or flag is malformed or inconsistent.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A state does not fit into the requested Fock truncation.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// The integrator produced a state that violates the density-matrix
/// invariants, or could not make progress.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Step size fell below the representable minimum.
class StiffnessError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

/// One of the two signals is constant over a correlation window.
class DegenerateSignal : public Error {
 public:
  using Error::Error;
};

}  // namespace qsync
