// Copyright 2026 The xres Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef XRES_ERRORS_HPP_
#define XRES_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace xres {

// Argument validation failures use std::invalid_argument throughout.

/// A backend was asked for something it cannot do (e.g. an unsupported
/// magnification factor).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// External backend failed: non-zero exit, timeout, malformed response.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Response from an external backend violated the exchange protocol.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Unreadable or malformed input data (images, manifests).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xres

#endif  // XRES_ERRORS_HPP_
