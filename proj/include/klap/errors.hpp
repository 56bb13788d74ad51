// Copyright contributors to the klap project.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace klap {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define KLAP_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                       \
    public:                                                            \
        explicit Name(const std::string& msg) : Error(msg) {}          \
    }

KLAP_DEFINE_ERROR(DimensionError);
KLAP_DEFINE_ERROR(BinningError);
KLAP_DEFINE_ERROR(ShapeError);
KLAP_DEFINE_ERROR(TraceMismatchError);
KLAP_DEFINE_ERROR(LengthError);
KLAP_DEFINE_ERROR(LayoutMismatchError);
KLAP_DEFINE_ERROR(SpecMismatchError);
KLAP_DEFINE_ERROR(FormatError);
KLAP_DEFINE_ERROR(VersionError);
KLAP_DEFINE_ERROR(SingularMatrixError);
KLAP_DEFINE_ERROR(ConfigError);
KLAP_DEFINE_ERROR(EmptyDatasetError);
KLAP_DEFINE_ERROR(IsolationError);
KLAP_DEFINE_ERROR(IoError);

#undef KLAP_DEFINE_ERROR

} // namespace klap
