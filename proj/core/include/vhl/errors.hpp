/*
 * Copyright 2026 The vhlsim Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vhl {

// Base of every error raised by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or parameter dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied data violates a documented precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

// A non-finite value showed up where finite numbers are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class PartitionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Malformed binary input. `offset` is the byte position at which decoding
// could not continue.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error("byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class AggregationError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

// Local training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  // `context` (e.g. "seed 3, round 17") is prepended to the message.
  DivergenceError(int client, long step, const std::string& what, const std::string& context = "")
      : Error((context.empty() ? "" : context + ", ") + "client " + std::to_string(client) + ", step " +
              std::to_string(step) + ": " + what),
        client_(client),
        step_(step),
        detail_(what) {}
  int client() const { return client_; }
  long step() const { return step_; }
  const std::string& detail() const { return detail_; }

 private:
  int client_;
  long step_;
  std::string detail_;
};

class MarginUndefinedError : public Error {
 public:
  using Error::Error;
};

class UnsupportedInstanceError : public Error {
 public:
  using Error::Error;
};

}  // namespace vhl
