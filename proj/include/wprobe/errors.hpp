// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "types.hpp"
#include <cstddef>
#include <stdexcept>
#include <string>

namespace wprobe
{
/// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class MalformedBinary : public Error
{
public:
    MalformedBinary(size_t offset, const std::string& reason)
      : Error("malformed binary at offset " + std::to_string(offset) + ": " + reason),
        offset_{offset},
        reason_{reason}
    {}
    size_t offset() const noexcept { return offset_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    size_t offset_;
    std::string reason_;
};

class UnsupportedFeature : public Error
{
public:
    explicit UnsupportedFeature(const std::string& name)
      : Error("unsupported feature: " + name), name_{name}
    {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ValidationError : public Error
{
public:
    ValidationError(const CodeLocation& loc, const std::string& reason)
      : Error("validation error at " + to_string(loc) + ": " + reason),
        location_{loc},
        reason_{reason}
    {}
    const CodeLocation& location() const noexcept { return location_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    CodeLocation location_;
    std::string reason_;
};

/// A trap raised where no Execution can report it, e.g. in a start function.
class TrapError : public Error
{
public:
    explicit TrapError(const Trap& trap)
      : Error("trap: " + std::string(to_string(trap.kind)) + " at " + to_string(trap.location)),
        trap_{trap}
    {}

    const Trap& trap() const noexcept { return trap_; }

private:
    Trap trap_;
};

class LinkError : public Error
{
public:
    using Error::Error;
};

class NoSuchExport : public Error
{
public:
    explicit NoSuchExport(const std::string& name) : Error("no such export: " + name) {}
};

class ArgumentMismatch : public Error
{
public:
    using Error::Error;
};

class InvalidLocation : public Error
{
public:
    explicit InvalidLocation(const CodeLocation& loc)
      : Error("invalid location " + to_string(loc)), location_{loc}
    {}
    const CodeLocation& location() const noexcept { return location_; }

private:
    CodeLocation location_;
};

class DuplicateInsert : public Error
{
public:
    using Error::Error;
};

class NotInstalled : public Error
{
public:
    using Error::Error;
};

class StaleAccessor : public Error
{
public:
    StaleAccessor() : Error("frame accessor refers to a frame that is no longer live") {}
};

class IndexOutOfRange : public Error
{
public:
    using Error::Error;
};

class TypeMismatch : public Error
{
public:
    using Error::Error;
};

/// Instrumentation API used from a thread other than the engine's while the
/// engine is executing.
class WrongContext : public Error
{
public:
    WrongContext() : Error("instrumentation API called outside the engine context") {}
};

/// Probe code raised an exception; the run was aborted before the
/// instruction at `location()` executed.
class MonitorError : public Error
{
public:
    MonitorError(const CodeLocation& loc, const std::string& what)
      : Error("probe failed at " + to_string(loc) + ": " + what), location_{loc}
    {}
    const CodeLocation& location() const noexcept { return location_; }

private:
    CodeLocation location_;
};
}  // namespace wprobe
