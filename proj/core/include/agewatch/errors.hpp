/*
 * Copyright (C) 2026 The AgeWatch Project
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
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

namespace agewatch {

// Base class for all recoverable input/usage errors. The CLI maps these to
// exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (bad JSON/CSV, wrong types, negative integers).
class ParseError : public Error {
 public:
  using Error::Error;
};

// An object reference or GC root points at an id absent from the snapshot.
class DanglingReference : public Error {
 public:
  using Error::Error;
};

// Two object records in one snapshot share an id.
class DuplicateId : public Error {
 public:
  using Error::Error;
};

// Snapshot timestamps in a series do not strictly increase.
class NonMonotonicTimestamps : public Error {
 public:
  using Error::Error;
};

// Fewer snapshots than the configured minimum for candidacy analysis.
class SeriesTooShort : public Error {
 public:
  using Error::Error;
};

// Trend statistics need more samples than were supplied.
class TooFewSamples : public Error {
 public:
  using Error::Error;
};

// Dominator query for an object that is not reachable from any GC root.
class UnreachableObject : public Error {
 public:
  using Error::Error;
};

// Rejuvenation requested on a service that is not registered as rejuvenable.
class NotRejuvenable : public Error {
 public:
  using Error::Error;
};

// Gain computation over a pair of traces where the treated trace lacks an
// activity present in the baseline.
class MissingActivity : public Error {
 public:
  using Error::Error;
};

// Comparison requested without a no-rejuvenation baseline experiment.
class MissingBaseline : public Error {
 public:
  using Error::Error;
};

// Invalid simulation or detector configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Broken internal invariant. The CLI maps these to exit code 3.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace agewatch
