/**
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_ERRORS_HPP
#define FEDSIM_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace fedsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file (IDX, CSV, checkpoint, JSONL).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A distributor cannot satisfy its demand with the available records.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// A checkpoint was produced by a different run configuration.
class DigestMismatchError : public Error {
 public:
  using Error::Error;
};

/// One or more clients failed during a training dispatch.
class DispatchError : public Error {
 public:
  DispatchError(std::vector<int> failed_ids, const std::string& what)
      : Error(what), failed_ids_(std::move(failed_ids)) {}

  const std::vector<int>& failed_ids() const noexcept { return failed_ids_; }

 private:
  std::vector<int> failed_ids_;
};

}  // namespace fedsim

#endif  // FEDSIM_ERRORS_HPP
