#pragma once

// Transport-independent part of the service: a session runs the protocol on
// its own executor thread and talks to connected clients through sinks. The
// HTTP/WebSocket layer only parses requests and forwards frames.

#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "json.hpp"

#include "hilpareto/session/messages.hpp"
#include "hilpareto/session/session_log.hpp"

namespace hilpareto::session {

struct LiveOptions {
    double time_scale = 1.0;  // 1 plays trials in real time, 0 as fast as possible
    double countdown = 3.0;   // s of wall clock before each attempt; input sent now already counts
};

enum class ClientRole { participant, experimenter };

std::optional<ClientRole> parse_role(std::string_view s);

class LiveSession {
public:
    /// Receives serialized server messages. Must be cheap and thread safe.
    /// `droppable` marks state frames a slow client may skip.
    using Sink = std::function<void(const std::string& text, bool droppable)>;

    LiveSession(std::string id, SessionConfig cfg, std::filesystem::path log_path, LiveOptions opts,
                bool auto_advance);
    ~LiveSession();

    LiveSession(const LiveSession&) = delete;
    LiveSession& operator=(const LiveSession&) = delete;

    void start();
    /// Unblocks every wait; the session ends with a failure unless already done.
    void stop();
    void wait_finished();
    bool finished() const;

    const std::string& id() const { return id_; }
    const std::filesystem::path& log_path() const { return log_path_; }

    /// Returns a connection handle, or nothing if a participant is already connected.
    std::optional<int> attach(ClientRole role, Sink sink);
    void detach(int handle);
    /// Handles one text frame from a client. Throws ProtocolError.
    void handle_message(int handle, std::string_view text);

    /// Lets the protocol enter its next phase. Advances may be given early;
    /// each one releases one phase. Returns the unused advances.
    int advance();

    nlohmann::json status() const;
    nlohmann::json models() const;

private:
    class HumanUser;
    friend class HumanUser;

    struct Client {
        ClientRole role;
        Sink sink;
    };
    enum class Pending { none, ordinal, pairwise };

    void execute();
    void broadcast(const nlohmann::json& m);  // caller holds mu_
    void send_locked(const Client& c, const nlohmann::json& m);
    void gate(moo::Phase phase, int total);
    bool has_participant() const;

    const std::string id_;
    const SessionConfig cfg_;
    const std::filesystem::path log_path_;
    const LiveOptions opts_;
    const bool auto_advance_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<int, Client> clients_;
    int next_handle_ = 1;
    bool stop_ = false;
    bool finished_ = false;
    int credits_ = 0;
    std::string state_ = "created";
    std::optional<moo::Phase> phase_;
    int iteration_ = 0;
    int total_ = 0;
    int n_records_ = 0;
    Pending pending_ = Pending::none;
    std::optional<gp::OrdinalLabel> label_answer_;
    std::optional<gp::Preference> pref_answer_;
    double force_ = 0.0;  // participant's latest input, zeroed after each attempt
    nlohmann::json last_phase_update_;
    nlohmann::json last_model_;
    nlohmann::json last_query_;
    nlohmann::json fronts_ = nlohmann::json::object();
    nlohmann::json selection_;
    nlohmann::json end_;
    std::thread worker_;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

/// All sessions of one service, plus the HTTP routing on top of them.
class SessionRegistry {
public:
    SessionRegistry(std::filesystem::path data_dir, LiveOptions opts);
    ~SessionRegistry();

    /// POST /sessions, GET /sessions, GET /sessions/{id},
    /// POST /sessions/{id}/advance, GET /sessions/{id}/models.
    HttpReply route(std::string_view method, std::string_view target, std::string_view body);

    /// Session addressed by a WebSocket target "/sessions/{id}/ws?mode=...".
    struct SocketTarget {
        std::shared_ptr<LiveSession> session;
        ClientRole role = ClientRole::participant;
    };
    /// Throws ProtocolError (not_found or bad_request) when the target is invalid.
    SocketTarget socket_target(std::string_view target);
    static bool is_socket_path(std::string_view target);

    std::shared_ptr<LiveSession> find(const std::string& id) const;
    void stop_all();

private:
    HttpReply create(std::string_view body);

    std::filesystem::path data_dir_;
    LiveOptions opts_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<LiveSession>> sessions_;
    int counter_ = 0;
};

}  // namespace hilpareto::session
