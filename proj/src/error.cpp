// Copyright (C) 2026 The bnsl Authors
// SPDX-License-Identifier: Apache-2.0

#include "bnsl/error.hpp"

namespace bnsl {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::invalid_shape:
        return "invalid shape";
    case ErrorKind::shape_mismatch:
        return "shape mismatch";
    case ErrorKind::invalid_argument:
        return "invalid argument";
    case ErrorKind::not_cached:
        return "resolution not cached";
    case ErrorKind::budget_exceeded:
        return "budget exceeded";
    case ErrorKind::unsupported:
        return "unsupported";
    case ErrorKind::config:
        return "config error";
    case ErrorKind::io:
        return "i/o error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), m_kind(kind) {}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace bnsl
