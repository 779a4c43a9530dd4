#include "hilpareto/session/server.hpp"

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "hilpareto/common/errors.hpp"

namespace hilpareto::session {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

// Slow clients lose state frames beyond this backlog; other messages are never dropped.
constexpr std::size_t kMaxBacklog = 256;

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket&& socket, std::shared_ptr<LiveSession> session, ClientRole role)
        : ws_(std::move(socket)), session_(std::move(session)), role_(role) {}

    ~WsConnection() {
        if (handle_) session_->detach(*handle_);
    }

    void run(http::request<http::string_body> req) {
        beast::get_lowest_layer(ws_).expires_never();
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsConnection> weak = weak_from_this();
        auto ex = ws_.get_executor();
        handle_ = session_->attach(role_, [weak, ex](const std::string& text, bool droppable) {
            auto p = std::make_shared<const std::string>(text);
            net::post(ex, [weak, p, droppable] {
                if (auto self = weak.lock()) self->enqueue(p, droppable);
            });
        });
        if (!handle_) {
            closing_ = true;
            enqueue(std::make_shared<const std::string>(
                        msg::error("participant_connected", "this session already has a participant").dump()),
                    false);
            return;
        }
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            if (handle_) session_->detach(*std::exchange(handle_, std::nullopt));
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        try {
            session_->handle_message(*handle_, text);
        } catch (const ProtocolError& e) {
            enqueue(std::make_shared<const std::string>(msg::error(e.code(), e.what()).dump()), false);
        }
        do_read();
    }

    void enqueue(std::shared_ptr<const std::string> text, bool droppable) {
        if (droppable && queue_.size() >= kMaxBacklog) return;
        queue_.push_back(std::move(text));
        if (queue_.size() == 1) do_write();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(net::buffer(*queue_.front()),
                        [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
    }

    void on_write(beast::error_code ec) {
        if (ec) {
            queue_.clear();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) {
            do_write();
        } else if (closing_) {
            ws_.async_close(websocket::close_code::policy_error,
                            [self = shared_from_this()](beast::error_code) {});
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    std::shared_ptr<LiveSession> session_;
    ClientRole role_;
    std::optional<int> handle_;
    bool closing_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket&& socket, SessionRegistry& registry)
        : stream_(std::move(socket)), registry_(registry) {}

    void run() { do_read(); }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, req_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) return;

        const std::string target(req_.target());
        if (websocket::is_upgrade(req_)) {
            try {
                auto t = registry_.socket_target(target);
                std::make_shared<WsConnection>(stream_.release_socket(), std::move(t.session), t.role)
                    ->run(std::move(req_));
                return;
            } catch (const ProtocolError& e) {
                reply({e.code() == "not_found" ? 404 : 400,
                       nlohmann::json{{"error", {{"code", e.code()}, {"message", e.what()}}}}});
                return;
            }
        }
        reply(registry_.route(std::string(req_.method_string()), target, req_.body()));
    }

    void reply(const HttpReply& r) {
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(r.status),
                                                                      req_.version());
        res->set(http::field::content_type, "application/json");
        res->set(http::field::access_control_allow_origin, "*");
        res->keep_alive(req_.keep_alive());
        res->body() = r.body.dump();
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (!res->keep_alive()) {
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
                return;
            }
            self->do_read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    SessionRegistry& registry_;
};

}  // namespace

struct Service::Impl {
    explicit Impl(ServiceOptions o) : opts(std::move(o)), registry(opts.data_dir, opts.live) {}

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (!acceptor.is_open()) return;
            if (!ec) std::make_shared<HttpConnection>(std::move(socket), registry)->run();
            accept();
        });
    }

    void signal_stop() {
        std::lock_guard lock(mu);
        stop_requested = true;
        cv.notify_all();
    }

    ServiceOptions opts;
    SessionRegistry registry;
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::optional<net::signal_set> signals;
    std::thread io_thread;
    unsigned short bound_port = 0;
    std::mutex mu;
    std::condition_variable cv;
    bool stop_requested = false;
    bool stopped = false;
};

Service::Service(ServiceOptions opts) : impl_(std::make_unique<Impl>(std::move(opts))) {}

Service::~Service() { stop(); }

void Service::start() {
    auto& m = *impl_;
    beast::error_code ec;
    const auto address = net::ip::make_address(m.opts.address, ec);
    if (ec) throw ConfigError("invalid listen address '" + m.opts.address + "': " + ec.message());
    const tcp::endpoint ep(address, m.opts.port);
    m.acceptor.open(ep.protocol(), ec);
    if (!ec) m.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) m.acceptor.bind(ep, ec);
    if (!ec) m.acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec)
        throw ConfigError("cannot listen on " + m.opts.address + ":" + std::to_string(m.opts.port) + ": " +
                          ec.message());
    m.bound_port = m.acceptor.local_endpoint().port();
    m.accept();
    if (m.opts.handle_signals) {
        m.signals.emplace(m.ioc, SIGINT, SIGTERM);
        m.signals->async_wait([&m](beast::error_code, int) { m.signal_stop(); });
    }
    m.io_thread = std::thread([&m] { m.ioc.run(); });
}

unsigned short Service::port() const { return impl_->bound_port; }

SessionRegistry& Service::registry() { return impl_->registry; }

void Service::wait() {
    std::unique_lock lock(impl_->mu);
    impl_->cv.wait(lock, [&] { return impl_->stop_requested; });
}

void Service::stop() {
    auto& m = *impl_;
    {
        std::lock_guard lock(m.mu);
        if (m.stopped) return;
        m.stopped = true;
    }
    m.registry.stop_all();
    net::post(m.ioc, [&m] {
        beast::error_code ec;
        m.acceptor.close(ec);
        if (m.signals) m.signals->cancel(ec);
    });
    if (m.io_thread.joinable()) {
        // Give queued frames (such as session_end) a moment to reach clients.
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        m.ioc.stop();
        m.io_thread.join();
    }
    m.signal_stop();
}

}  // namespace hilpareto::session
