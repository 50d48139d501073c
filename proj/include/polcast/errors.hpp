// SPDX-License-Identifier: Apache-2.0
// ----------------------------------------------------------------------------
// Copyright 2026 The polcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not
// use this file except in compliance with the License. You may obtain a copy
// of the License at:
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.
// ----------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace polcast {

/// Precondition violated by a caller (bad shape, out-of-range angle, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Ray runs parallel to the target plane.
class NoIntersection : public DomainError {
public:
    using DomainError::DomainError;
};

/// Intersection lies at t <= 0 along the ray.
class BehindCamera : public DomainError {
public:
    using DomainError::DomainError;
};

/// Missing or unreadable files, schema/version mismatches, bad manifests.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// NaN/Inf where a finite value is required (training divergence etc.).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace polcast
