/*
 * Copyright 2026 The catinfluence Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace catinf {

// Root of the library's exception hierarchy. The CLI maps each subclass to a
// distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or contradictory configuration (flags, query labels, options).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input files that fail to parse or validate against the schema.
class DataError : public Error {
 public:
  using Error::Error;
};

// A size bound was exceeded: assignment-space cap, Shapley player cap,
// exhaustive-enumeration budget with sampling disabled.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The subsample selected by a query is empty, so the query cannot be
// answered from the training sample.
class EmptySubsampleError : public Error {
 public:
  using Error::Error;
};

// A zero-smoothing frequency classifier was queried on an assignment that
// never occurs in its training data.
class UnseenAssignmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace catinf
