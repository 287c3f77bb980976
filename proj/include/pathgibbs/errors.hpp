// Copyright 2026 The pathgibbs Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PATHGIBBS_ERRORS_HPP
#define PATHGIBBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pathgibbs {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A site was looked up in a configuration that does not cover it.
class MissingSiteError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (geometry, sizes, ranges).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A simulation or estimator produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown entries in an experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathgibbs

#endif  // PATHGIBBS_ERRORS_HPP
