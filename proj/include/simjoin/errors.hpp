// Copyright 2026 The simjoin Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace simjoin {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dataset ingestion / generation.
class EmptyRecordError : public Error {
public:
    using Error::Error;
};
class DuplicateIdError : public Error {
public:
    using Error::Error;
};
class SchemaError : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};

// Join engines.
class OrderingMissError : public Error {
public:
    using Error::Error;
};
class PreconditionError : public Error {
public:
    using Error::Error;
};
class ParamError : public Error {
public:
    using Error::Error;
};

// Threshold-encryption protocol.
class ThresholdUnmetError : public Error {
public:
    using Error::Error;
};
class ProtocolError : public Error {
public:
    using Error::Error;
};
class AuditFailure : public Error {
public:
    using Error::Error;
};

} // namespace simjoin
