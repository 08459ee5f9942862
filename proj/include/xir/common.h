// Copyright 2026 The XIR Authors.
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

#ifndef XIR_COMMON_H_
#define XIR_COMMON_H_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace xir {

using Index = std::int32_t;

// Row-major so that embedding rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kValidation = 2,  // bad parameters or configuration
  kRuntime = 3,     // numerical abort, data errors discovered mid-run
  kIo = 4,          // unreadable / unwritable files, corrupt checkpoints
  kLogic = 5,       // violated preconditions (programming errors)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::kValidation, what) {}
};

class RuntimeAbort : public Error {
 public:
  explicit RuntimeAbort(const std::string& what)
      : Error(ErrorKind::kRuntime, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

class LogicError : public Error {
 public:
  explicit LogicError(const std::string& what)
      : Error(ErrorKind::kLogic, what) {}
};

#define XIR_CHECK(cond, msg)                                  \
  do {                                                        \
    if (!(cond)) throw ::xir::LogicError(std::string(msg));   \
  } while (0)

}  // namespace xir

#endif  // XIR_COMMON_H_
