// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "debugger.hpp"
#include "monitor.hpp"
#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

namespace wprobe
{
/// Error codes of protocol error responses.
enum class DebugErrorCode : int
{
    parse_error = -32700,
    invalid_request = -32600,
    unknown_method = -32601,
    invalid_params = -32602,
    not_paused = 1,
    invalid_location = 2,
    type_mismatch = 3,
    index_out_of_range = 4,
    program_finished = 5,
    failed = 6,
};

inline constexpr int debug_protocol_version = 1;

/// WebSocket front end for a Debugger, listening on 127.0.0.1 at path
/// /debug. Network I/O runs on an internal thread. Requests are queued and
/// executed on the engine context when the debugger pauses or polls.
///
/// Wire format: one JSON object per message.
///   request   {"id":N,"method":M,"params":{...}}
///   response  {"id":N,"result":{...}} or {"id":N,"error":{"code":C,"message":S}}
///   event     {"event":E,"params":{...}}: hello, paused, report, exited
///
/// One client at a time; a new connection replaces the current one. A
/// client that connects while the engine is paused receives hello followed
/// by the current paused event.
class DebugServer
{
public:
    /// Port 0 picks a free port. Throws Error when binding fails.
    explicit DebugServer(uint16_t port);
    ~DebugServer();
    DebugServer(const DebugServer&) = delete;
    DebugServer& operator=(const DebugServer&) = delete;

    uint16_t port() const noexcept;

    /// The session to attach to the Debugger driving the program.
    std::shared_ptr<DebugSession> session();

    bool client_connected() const;

    /// Emits a report event per report and then exited, answers queued and
    /// later requests with "program finished", and closes the connection.
    void finish(int exit_code, const std::vector<Report>& reports);

    struct Impl;

private:
    std::unique_ptr<Impl> impl_;
};
}  // namespace wprobe
