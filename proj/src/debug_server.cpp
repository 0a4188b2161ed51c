// wprobe: an instrumentable WebAssembly interpreter
// Copyright 2026 The wprobe Authors.
// SPDX-License-Identifier: Apache-2.0

#include "wprobe/debug_server.hpp"
#include "wprobe/errors.hpp"
#include "wprobe/frame_accessor.hpp"
#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <future>
#include <mutex>
#include <thread>

namespace wprobe
{
namespace
{
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json = nlohmann::json;

struct Request
{
    json id;
    std::string method;
    json params;
};

/// Protocol-level failure with its error code.
struct ProtocolError
{
    DebugErrorCode code;
    std::string message;
};

json error_response(const json& id, DebugErrorCode code, const std::string& message)
{
    return {{"id", id}, {"error", {{"code", static_cast<int>(code)}, {"message", message}}}};
}

json event(const char* name, json params)
{
    return {{"event", name}, {"params", std::move(params)}};
}
}  // namespace

class Connection;

struct DebugServer::Impl
{
    net::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::thread thread;
    uint16_t port = 0;

    // IO thread only.
    std::shared_ptr<Connection> client;
    std::optional<std::string> paused_event;
    std::atomic<bool> connected{false};

    std::mutex mu;
    std::condition_variable cv;
    std::deque<Request> queue;
    std::atomic<bool> pending{false};
    bool finished = false;
    bool stopping = false;

    std::promise<void> closed;
    bool closed_set = false;

    std::shared_ptr<DebugSession> session;

    void accept();
    void on_connect(const std::shared_ptr<Connection>& c);
    void on_disconnect(const std::shared_ptr<Connection>& c);
    void on_message(Connection& from, const std::string& text);
    void on_closed()
    {
        if (!closed_set)
        {
            closed_set = true;
            closed.set_value();
        }
    }

    /// Runs `fn` on the IO thread.
    template <typename Fn>
    void post(Fn fn)
    {
        net::post(ioc, std::move(fn));
    }
    void send(std::string text);
    void send(const json& j) { send(j.dump()); }

    std::optional<Request> wait_request()
    {
        std::unique_lock lk{mu};
        cv.wait(lk, [&] { return !queue.empty() || stopping; });
        if (queue.empty())
            return std::nullopt;
        Request r = std::move(queue.front());
        queue.pop_front();
        pending = !queue.empty();
        return r;
    }

    std::optional<Request> try_pop()
    {
        std::lock_guard lk{mu};
        if (queue.empty())
            return std::nullopt;
        Request r = std::move(queue.front());
        queue.pop_front();
        pending = !queue.empty();
        return r;
    }
};

class Connection : public std::enable_shared_from_this<Connection>
{
public:
    Connection(tcp::socket socket, DebugServer::Impl& server) : ws_{std::move(socket)}, server_{server} {}

    void start()
    {
        http::async_read(ws_.next_layer(), buffer_, request_,
            [self = shared_from_this()](beast::error_code ec, size_t) { self->on_request(ec); });
    }

    void send(std::string text)
    {
        if (!open_)
            return;
        outbox_.push_back(std::move(text));
        if (outbox_.size() == 1)
            write_next();
    }

    /// Closes once every queued message is written.
    void close()
    {
        close_pending_ = true;
        if (outbox_.empty())
            do_close();
    }

    void drop()
    {
        open_ = false;
        beast::error_code ignored;
        ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
        ws_.next_layer().close(ignored);
    }

private:
    void on_request(beast::error_code ec)
    {
        if (ec)
            return;
        if (!websocket::is_upgrade(request_) || request_.target() != "/debug")
        {
            auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
            res->set(http::field::content_type, "text/plain");
            res->body() = "not found\n";
            res->prepare_payload();
            http::async_write(ws_.next_layer(), *res, [self = shared_from_this(), res](beast::error_code, size_t) {
                self->drop();
            });
            return;
        }
        ws_.text(true);
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code ec) {
            if (ec)
                return;
            self->open_ = true;
            self->server_.on_connect(self);
            self->read_next();
        });
    }

    void read_next()
    {
        ws_.async_read(read_buffer_, [self = shared_from_this()](beast::error_code ec, size_t) {
            if (ec)
            {
                self->open_ = false;
                self->outbox_.clear();
                self->server_.on_disconnect(self);
                return;
            }
            std::string text = beast::buffers_to_string(self->read_buffer_.data());
            self->read_buffer_.consume(self->read_buffer_.size());
            self->server_.on_message(*self, text);
            self->read_next();
        });
    }

    void write_next()
    {
        ws_.async_write(net::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, size_t) {
            if (ec)
            {
                self->open_ = false;
                self->outbox_.clear();
                if (self->close_pending_)
                    self->server_.on_closed();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty())
                self->write_next();
            else if (self->close_pending_)
                self->do_close();
        });
    }

    void do_close()
    {
        if (!open_)
        {
            server_.on_closed();
            return;
        }
        open_ = false;
        ws_.async_close(websocket::close_code::normal,
            [self = shared_from_this()](beast::error_code) { self->server_.on_closed(); });
    }

    websocket::stream<tcp::socket> ws_;
    DebugServer::Impl& server_;
    beast::flat_buffer buffer_;
    beast::flat_buffer read_buffer_;
    http::request<http::string_body> request_;
    std::deque<std::string> outbox_;
    bool open_ = false;
    bool close_pending_ = false;
};

void DebugServer::Impl::accept()
{
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
        if (ec == net::error::operation_aborted)
            return;
        if (!ec)
            std::make_shared<Connection>(std::move(socket), *this)->start();
        accept();
    });
}

void DebugServer::Impl::on_connect(const std::shared_ptr<Connection>& c)
{
    if (client && client != c)
        client->drop();
    client = c;
    connected = true;
    c->send(event("hello", {{"version", debug_protocol_version}}).dump());
    if (paused_event)
        c->send(*paused_event);
}

void DebugServer::Impl::on_disconnect(const std::shared_ptr<Connection>& c)
{
    if (client != c)
        return;
    client.reset();
    connected = false;
}

void DebugServer::Impl::send(std::string text)
{
    post([this, text = std::move(text)]() mutable {
        if (client)
            client->send(std::move(text));
    });
}

void DebugServer::Impl::on_message(Connection& from, const std::string& text)
{
    size_t start = 0;
    while (start <= text.size())
    {
        size_t end = text.find('\n', start);
        if (end == std::string::npos)
            end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;

        json msg = json::parse(line, nullptr, false);
        if (msg.is_discarded())
        {
            from.send(error_response(nullptr, DebugErrorCode::parse_error, "malformed JSON").dump());
            continue;
        }
        const json id = msg.is_object() && msg.contains("id") ? msg["id"] : json(nullptr);
        if (!msg.is_object() || !id.is_number_unsigned() || !msg.contains("method") || !msg["method"].is_string())
        {
            from.send(error_response(id, DebugErrorCode::invalid_request, "expected {id, method, params}").dump());
            continue;
        }
        json params = msg.value("params", json::object());
        if (!params.is_object())
        {
            from.send(error_response(id, DebugErrorCode::invalid_params, "params must be an object").dump());
            continue;
        }
        std::lock_guard lk{mu};
        if (finished)
        {
            from.send(error_response(id, DebugErrorCode::program_finished, "program finished").dump());
            continue;
        }
        queue.push_back({id, msg["method"].get<std::string>(), std::move(params)});
        pending = true;
        cv.notify_all();
    }
}

namespace
{
json value_json(const Value& v)
{
    json j{{"type", std::string(to_string(v.type))}, {"text", to_string(v)}};
    switch (v.type)
    {
    case ValueType::i32:
        j["value"] = v.as_i32();
        break;
    case ValueType::i64:
        j["value"] = v.as_i64();
        break;
    case ValueType::f32:
    case ValueType::f64:
    {
        const double d = v.type == ValueType::f32 ? double(v.as_f32()) : v.as_f64();
        if (std::isfinite(d))
            j["value"] = d;
        else
            j["value"] = j["text"].get<std::string>().substr(4);
        break;
    }
    }
    return j;
}

json values_json(const std::vector<Value>& values)
{
    json arr = json::array();
    for (const auto& v : values)
        arr.push_back(value_json(v));
    return arr;
}

uint32_t u32_param(const json& params, const char* name, std::optional<uint32_t> fallback = std::nullopt)
{
    if (!params.contains(name))
    {
        if (fallback)
            return *fallback;
        throw ProtocolError{DebugErrorCode::invalid_params, std::string("missing parameter '") + name + "'"};
    }
    const json& v = params[name];
    if (!v.is_number_unsigned() || v.get<uint64_t>() > UINT32_MAX)
        throw ProtocolError{DebugErrorCode::invalid_params, std::string("parameter '") + name + "' must be an unsigned integer"};
    return v.get<uint32_t>();
}

/// Accepts "i32:5", a bare number typed like the slot, or {"type","value"}.
Value value_param(const json& params, ValueType slot_type)
{
    if (!params.contains("value"))
        throw ProtocolError{DebugErrorCode::invalid_params, "missing parameter 'value'"};
    json v = params["value"];
    std::optional<ValueType> type = slot_type;
    if (v.is_object())
    {
        if (!v.contains("type") || !v["type"].is_string() || !v.contains("value"))
            throw ProtocolError{DebugErrorCode::invalid_params, "value object needs type and value"};
        type = parse_value_type(v["type"].get<std::string>());
        if (!type)
            throw ProtocolError{DebugErrorCode::invalid_params, "unknown value type"};
        v = json(v["value"]);
    }
    std::string text;
    if (v.is_string())
        text = v.get<std::string>();
    else if (v.is_number_integer())
        text = v.is_number_unsigned() ? std::to_string(v.get<uint64_t>()) : std::to_string(v.get<int64_t>());
    else if (v.is_number_float() && (*type == ValueType::f32 || *type == ValueType::f64))
        return *type == ValueType::f32 ? Value::f32(static_cast<float>(v.get<double>())) : Value::f64(v.get<double>());
    else
        throw ProtocolError{DebugErrorCode::invalid_params, "value must be a string, number or object"};
    const auto parsed = parse_value(text, type);
    if (!parsed)
        throw ProtocolError{DebugErrorCode::invalid_params, "invalid value '" + text + "'"};
    return *parsed;
}

class ServerSession final : public DebugSession
{
public:
    explicit ServerSession(DebugServer::Impl& server) : server_{server} {}

    void paused(Debugger& dbg, Execution& exec) override
    {
        const auto loc = exec.location();
        std::string ev = event("paused", {{"func", loc.func_index}, {"pc", loc.pc}, {"reason", exec.pause_reason()}}).dump();
        server_.post([s = &server_, ev]() mutable {
            s->paused_event = ev;
            if (s->client)
                s->client->send(std::move(ev));
        });
        while (!dbg.resume_requested())
        {
            auto req = server_.wait_request();
            if (!req)
            {
                dbg.resume();
                break;
            }
            handle(dbg, *req);
        }
        clear_paused();
    }

    void poll(Debugger& dbg) override
    {
        if (!server_.pending.load(std::memory_order_relaxed))
            return;
        while (auto req = server_.try_pop())
            handle(dbg, *req);
    }

private:
    void clear_paused()
    {
        server_.post([s = &server_] { s->paused_event.reset(); });
    }

    void handle(Debugger& dbg, const Request& req)
    {
        json response;
        try
        {
            response = {{"id", req.id}, {"result", dispatch(dbg, req.method, req.params)}};
        }
        catch (const ProtocolError& e)
        {
            response = error_response(req.id, e.code, e.message);
        }
        catch (const NotPaused&)
        {
            response = error_response(req.id, DebugErrorCode::not_paused, "not paused");
        }
        catch (const InvalidLocation&)
        {
            response = error_response(req.id, DebugErrorCode::invalid_location, "invalid location");
        }
        catch (const TypeMismatch& e)
        {
            response = error_response(req.id, DebugErrorCode::type_mismatch, e.what());
        }
        catch (const IndexOutOfRange& e)
        {
            response = error_response(req.id, DebugErrorCode::index_out_of_range, e.what());
        }
        catch (const std::exception& e)
        {
            response = error_response(req.id, DebugErrorCode::failed, e.what());
        }
        if (dbg.resume_requested())
            clear_paused();
        server_.send(response);
    }

    json dispatch(Debugger& dbg, const std::string& method, const json& p)
    {
        if (method == "setBreakpoint")
        {
            const uint32_t func = u32_param(p, "func"), pc = u32_param(p, "pc");
            dbg.set_breakpoint(func, pc);
            return {{"func", func}, {"pc", pc}};
        }
        if (method == "removeBreakpoint")
            return {{"removed", dbg.remove_breakpoint(u32_param(p, "func"), u32_param(p, "pc"))}};
        if (method == "continue")
        {
            dbg.resume();
            return json::object();
        }
        if (method == "step")
        {
            dbg.step();
            return json::object();
        }
        if (method == "stepOver")
        {
            dbg.step_over();
            return json::object();
        }
        if (method == "pause")
        {
            dbg.pause();
            return json::object();
        }
        if (method == "getStack")
        {
            json frames = json::array();
            for (const auto& f : dbg.stack())
                frames.push_back(
                    {{"depth", f.depth}, {"func", f.func}, {"pc", f.pc}, {"instruction", f.instruction}});
            return {{"frames", std::move(frames)}};
        }
        if (method == "getLocals")
            return {{"locals", values_json(dbg.locals(u32_param(p, "frame", 0)))}};
        if (method == "getOperands")
            return {{"operands", values_json(dbg.operands(u32_param(p, "frame", 0)))}};
        if (method == "setLocal" || method == "setOperand")
        {
            const bool local = method == "setLocal";
            const uint32_t level = u32_param(p, "frame", 0);
            const uint32_t index = u32_param(p, "index");
            const auto current = local ? dbg.locals(level) : dbg.operands(level);
            if (index >= current.size())
                throw IndexOutOfRange((local ? "local " : "operand ") + std::to_string(index) + " out of range");
            const Value v = value_param(p, current[index].type);
            if (local)
                dbg.set_local(index, v, level);
            else
                dbg.set_operand(index, v, level);
            return {{"value", value_json(v)}};
        }
        if (method == "disassemble")
        {
            const uint32_t func = u32_param(p, "func");
            json insns = json::array();
            for (const auto& insn : dbg.disassemble(func))
                insns.push_back({{"pc", insn.pc}, {"mnemonic", std::string(insn.mnemonic)},
                    {"text", format_instruction(insn)}});
            return {{"func", func}, {"instructions", std::move(insns)}};
        }
        throw ProtocolError{DebugErrorCode::unknown_method, "unknown method '" + method + "'"};
    }

    DebugServer::Impl& server_;
};
}  // namespace

DebugServer::DebugServer(uint16_t port) : impl_{std::make_unique<Impl>()}
{
    try
    {
        const tcp::endpoint endpoint{net::ip::make_address("127.0.0.1"), port};
        impl_->acceptor.open(endpoint.protocol());
        impl_->acceptor.set_option(net::socket_base::reuse_address(true));
        impl_->acceptor.bind(endpoint);
        impl_->acceptor.listen();
        impl_->port = impl_->acceptor.local_endpoint().port();
    }
    catch (const boost::system::system_error& e)
    {
        throw Error("cannot listen on port " + std::to_string(port) + ": " + e.what());
    }
    impl_->session = std::make_shared<ServerSession>(*impl_);
    impl_->accept();
    impl_->thread = std::thread([impl = impl_.get()] { impl->ioc.run(); });
}

DebugServer::~DebugServer()
{
    {
        std::lock_guard lk{impl_->mu};
        impl_->stopping = true;
    }
    impl_->cv.notify_all();
    impl_->post([impl = impl_.get()] {
        beast::error_code ignored;
        impl->acceptor.close(ignored);
        if (impl->client)
            impl->client->drop();
        impl->client.reset();
    });
    impl_->ioc.stop();
    if (impl_->thread.joinable())
        impl_->thread.join();
}

uint16_t DebugServer::port() const noexcept
{
    return impl_->port;
}

std::shared_ptr<DebugSession> DebugServer::session()
{
    return impl_->session;
}

bool DebugServer::client_connected() const
{
    return impl_->connected;
}

void DebugServer::finish(int exit_code, const std::vector<Report>& reports)
{
    std::deque<Request> leftover;
    {
        std::lock_guard lk{impl_->mu};
        impl_->finished = true;
        leftover.swap(impl_->queue);
        impl_->pending = false;
    }
    for (const auto& req : leftover)
        impl_->send(error_response(req.id, DebugErrorCode::program_finished, "program finished"));
    for (const auto& r : reports)
        impl_->send(event("report", {{"monitor", r.monitor}, {"text", r.text}}));
    impl_->send(event("exited", {{"code", exit_code}}));
    auto done = impl_->closed.get_future();
    impl_->post([impl = impl_.get()] {
        impl->paused_event.reset();
        if (impl->client)
            impl->client->close();
        else
            impl->on_closed();
    });
    done.wait_for(std::chrono::seconds(2));
}
}  // namespace wprobe
