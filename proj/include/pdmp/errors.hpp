/*
   Copyright 2026 The pdmpstop Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace pdmp {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration / model registration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The time-grid step cannot satisfy both of its constraints.
class DeltaInfeasible : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: vanishing likelihood, failed root bracketing, ...
class NumericError : public Error {
public:
    using Error::Error;
};

class DegenerateLikelihood : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace pdmp
