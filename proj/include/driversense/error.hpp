// Copyright 2026 The DriverSense Authors
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

#ifndef DRIVERSENSE_ERROR_HPP_
#define DRIVERSENSE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace driversense {

enum class ErrorKind {
  kInvalidArgument,  // precondition or configuration problem
  kData,             // malformed or inconsistent input data
  kIo,               // filesystem failure
  kInvariant,        // internal consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void ThrowInvalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}

[[noreturn]] inline void ThrowData(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}

[[noreturn]] inline void ThrowIo(const std::string& what) {
  throw Error(ErrorKind::kIo, what);
}

[[noreturn]] inline void ThrowInvariant(const std::string& what) {
  throw Error(ErrorKind::kInvariant, what);
}

#define DRIVERSENSE_CHECK(cond, msg)                                   \
  do {                                                                 \
    if (!(cond)) ::driversense::ThrowInvariant(std::string(msg) +      \
                                               " [" #cond "]");        \
  } while (false)

}  // namespace driversense

#endif  // DRIVERSENSE_ERROR_HPP_
