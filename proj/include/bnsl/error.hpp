// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bnsl {

enum class ErrorKind {
    invalid_shape,
    shape_mismatch,
    invalid_argument,
    not_cached,
    budget_exceeded,
    unsupported,
    config,
    io,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` lets callers (the CLI in
/// particular) map failures to exit codes without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        fail(kind, message);
    }
}

}  // namespace bnsl
