#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "hilpareto/session/live.hpp"

namespace hilpareto::session {

struct ServiceOptions {
    std::string address = "127.0.0.1";
    unsigned short port = 8080;  // 0 picks a free port
    std::filesystem::path data_dir = "sessions";
    LiveOptions live;
    bool handle_signals = false;  // SIGINT/SIGTERM end wait()
};

/// HTTP and WebSocket front end over a SessionRegistry. Network I/O runs on
/// one background thread; every session runs on its own executor thread.
class Service {
public:
    explicit Service(ServiceOptions opts);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds and starts serving. Throws ConfigError if the address cannot be bound.
    void start();
    unsigned short port() const;
    SessionRegistry& registry();

    /// Blocks until stop() is called or, with handle_signals, a signal arrives.
    void wait();
    /// Ends every session (live ones are logged as failed) and closes the listener.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hilpareto::session
