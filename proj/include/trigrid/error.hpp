/*
 * Copyright 2026 The trigrid Authors
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

namespace trigrid {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid construction parameters (patch sizes, selectors, bench flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Index outside the padded bounds of a storage; `axis` names the dimension.
class BoundsError : public Error {
 public:
  BoundsError(const std::string& axis, long value, long lo, long hi)
      : Error("index out of bounds on axis '" + axis + "': " +
              std::to_string(value) + " not in [" + std::to_string(lo) + ", " +
              std::to_string(hi) + ")"),
        axis_(axis) {}
  const std::string& axis() const { return axis_; }

 private:
  std::string axis_;
};

// Access to a memory space that holds stale data.
class StalenessError : public Error {
 public:
  using Error::Error;
};

// Both memory spaces of a field were written without an intervening sync.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Requested (numbering, location) or (numbering, access) pair is not defined.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A file could not be read or written; the message names the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace trigrid
