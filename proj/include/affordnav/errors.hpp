// Copyright 2026 The affordnav Authors
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

#ifndef AFFORDNAV_ERRORS_HPP
#define AFFORDNAV_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace affordnav {

/// Malformed or mismatched file contents, token strings, or model layouts.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input tensor shape does not match the model's layout descriptor.
class LayoutError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// A file could not be opened for reading or writing.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affordnav

#endif  // AFFORDNAV_ERRORS_HPP
