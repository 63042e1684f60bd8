/* Copyright 2026 The Dagcache Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DAGCACHE_ERRORS_HPP_
#define DAGCACHE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dagcache {

// Structural or argument errors: invalid DAGs, bad ids, infeasible inputs.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Cross-record contradictions: same fingerprint registered with a different
// cost or size, placements referencing unknown fingerprints, and the like.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed trace/config/placement files. Carries a line number when the
// format is line-delimited (0 when not applicable).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Numerical failure inside an iterative solver (e.g. sustained objective
// decrease signalling a bad step size).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dagcache

#endif  // DAGCACHE_ERRORS_HPP_
