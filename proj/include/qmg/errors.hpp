// Copyright 2026 The qmg Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qmg {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class InvalidConfigError : public Error {
    using Error::Error;
};
class IndexError : public Error {
    using Error::Error;
};
class DimensionError : public Error {
    using Error::Error;
};
/// A dense representation would exceed the configured size cap.
class ResourceLimitError : public Error {
    using Error::Error;
};
/// Qubit circuits exist only for power-of-two game sizes.
class UnsupportedSizeError : public Error {
    using Error::Error;
};
class CircuitValidationError : public Error {
    using Error::Error;
};
class StateIntegrityError : public Error {
    using Error::Error;
};
class EmptyRunError : public Error {
    using Error::Error;
};
class InvalidTopologyError : public Error {
    using Error::Error;
};
class ParseError : public Error {
    using Error::Error;
};

}  // namespace qmg
