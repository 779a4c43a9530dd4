#include "hilpareto/session/live.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

#include "hilpareto/common/errors.hpp"
#include "hilpareto/session/protocol.hpp"
#include "hilpareto/session/serialization.hpp"
#include "hilpareto/sim/sim_user.hpp"
#include "hilpareto/task/lqr.hpp"

using nlohmann::json;

namespace hilpareto::session {

std::optional<ClientRole> parse_role(std::string_view s) {
    if (s == "participant") return ClientRole::participant;
    if (s == "experimenter") return ClientRole::experimenter;
    return std::nullopt;
}

namespace {

struct Stopped : std::runtime_error {
    Stopped() : std::runtime_error("session stopped by the service") {}
};

}  // namespace

// Plays trials in (scaled) real time with the participant's streamed force
// and asks the feedback questions over the socket.
class LiveSession::HumanUser : public moo::UserPort {
public:
    explicit HumanUser(LiveSession& s) : s_(s), gains_(task::lqr_gains(s.cfg_.plant)) {}

    task::BestOfThree play(double assist, std::span<const std::uint64_t, 3> seeds) override {
        const auto& p = s_.cfg_.plant;
        const long stride = std::max(1L, std::lround(0.02 / p.dt));  // 50 Hz state stream
        task::BestOfThree out;
        std::array<double, 3> scores{};
        for (int k = 0; k < 3; ++k) {
            {
                std::unique_lock lock(s_.mu_);
                s_.cv_.wait(lock, [&] { return s_.stop_ || s_.has_participant(); });
                if (s_.stop_) throw Stopped();
                s_.broadcast(msg::trial_start(k, s_.opts_.countdown));
                pause(lock, s_.opts_.countdown);
            }
            task::TrialRunner run(assist, seeds[static_cast<std::size_t>(k)], p, s_.cfg_.disturbance, gains_);
            const auto t0 = std::chrono::steady_clock::now();
            while (!run.done()) {
                std::unique_lock lock(s_.mu_);
                if (s_.stop_) throw Stopped();
                run.advance(s_.force_);
                if (run.steps() % stride == 0 || run.done())
                    s_.broadcast(msg::state(run.state(), task::normalized_score(run.state().t, p)));
                if (s_.opts_.time_scale > 0.0) {
                    const auto due = t0 + std::chrono::duration<double>(run.state().t * s_.opts_.time_scale);
                    s_.cv_.wait_until(lock, std::chrono::time_point_cast<std::chrono::steady_clock::duration>(due),
                                      [&] { return s_.stop_; });
                }
            }
            out.attempts[static_cast<std::size_t>(k)] = run.result();
            scores[static_cast<std::size_t>(k)] = run.result().score;
            std::unique_lock lock(s_.mu_);
            s_.force_ = 0.0;
            s_.broadcast(msg::trial_end(k, run.result().score, run.result().reason));
        }
        out.best_index = task::best_index(scores);
        return out;
    }

    gp::OrdinalLabel rate(double, std::uint64_t) override {
        std::unique_lock lock(s_.mu_);
        ask(lock, Pending::ordinal, msg::query_ordinal(), [&] { return s_.label_answer_.has_value(); });
        return *std::exchange(s_.label_answer_, std::nullopt);
    }

    gp::Preference compare(double, double, std::uint64_t) override {
        std::unique_lock lock(s_.mu_);
        ask(lock, Pending::pairwise, msg::query_pairwise(), [&] { return s_.pref_answer_.has_value(); });
        return *std::exchange(s_.pref_answer_, std::nullopt);
    }

private:
    void pause(std::unique_lock<std::mutex>& lock, double seconds) {
        if (seconds <= 0.0) return;
        s_.cv_.wait_for(lock, std::chrono::duration<double>(seconds), [&] { return s_.stop_; });
        if (s_.stop_) throw Stopped();
    }

    template <typename Answered>
    void ask(std::unique_lock<std::mutex>& lock, Pending what, json query, Answered answered) {
        s_.pending_ = what;
        s_.state_ = "awaiting_answer";
        s_.last_query_ = std::move(query);
        s_.broadcast(s_.last_query_);
        s_.cv_.wait(lock, [&] { return s_.stop_ || answered(); });
        s_.pending_ = Pending::none;
        s_.last_query_ = nullptr;
        if (s_.stop_) throw Stopped();
        s_.state_ = "running";
    }

    LiveSession& s_;
    task::Vec4 gains_;
};

LiveSession::LiveSession(std::string id, SessionConfig cfg, std::filesystem::path log_path, LiveOptions opts,
                         bool auto_advance)
    : id_(std::move(id)),
      cfg_(std::move(cfg)),
      log_path_(std::move(log_path)),
      opts_(opts),
      auto_advance_(auto_advance) {
    cfg_.validate();
}

LiveSession::~LiveSession() {
    stop();
    if (worker_.joinable()) worker_.join();
}

void LiveSession::start() {
    std::lock_guard lock(mu_);
    if (worker_.joinable()) return;
    state_ = "running";
    worker_ = std::thread([this] { execute(); });
}

void LiveSession::stop() {
    std::lock_guard lock(mu_);
    stop_ = true;
    cv_.notify_all();
}

void LiveSession::wait_finished() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return finished_; });
}

bool LiveSession::finished() const {
    std::lock_guard lock(mu_);
    return finished_;
}

bool LiveSession::has_participant() const {
    return std::any_of(clients_.begin(), clients_.end(),
                       [](const auto& kv) { return kv.second.role == ClientRole::participant; });
}

void LiveSession::send_locked(const Client& c, const json& m) {
    if (c.role == ClientRole::participant && msg::experimenter_only(m)) return;
    c.sink(m.dump(), m.value("type", "") == "state");
}

void LiveSession::broadcast(const json& m) {
    for (const auto& [h, c] : clients_) send_locked(c, m);
}

std::optional<int> LiveSession::attach(ClientRole role, Sink sink) {
    std::lock_guard lock(mu_);
    if (role == ClientRole::participant && has_participant()) return std::nullopt;
    const int h = next_handle_++;
    const Client& c = clients_.emplace(h, Client{role, std::move(sink)}).first->second;
    // Catch the newcomer up on where the session is.
    if (!last_phase_update_.is_null()) send_locked(c, last_phase_update_);
    if (!selection_.is_null()) send_locked(c, selection_);
    if (!last_model_.is_null()) send_locked(c, last_model_);
    if (!last_query_.is_null()) send_locked(c, last_query_);
    if (!end_.is_null()) send_locked(c, end_);
    cv_.notify_all();
    return h;
}

void LiveSession::detach(int handle) {
    std::lock_guard lock(mu_);
    const auto it = clients_.find(handle);
    if (it == clients_.end()) return;
    if (it->second.role == ClientRole::participant) force_ = 0.0;
    clients_.erase(it);
}

void LiveSession::handle_message(int handle, std::string_view text) {
    const msg::ClientMessage m = msg::parse_client(text);
    std::lock_guard lock(mu_);
    const auto it = clients_.find(handle);
    if (it == clients_.end()) return;
    if (it->second.role != ClientRole::participant)
        throw ProtocolError("not_participant", "only the participant connection sends input and answers");
    if (const auto* in = std::get_if<msg::Input>(&m)) {
        const double limit = cfg_.plant.max_force;
        force_ = std::clamp(in->force, -limit, limit);
    } else if (const auto* a = std::get_if<msg::AnswerOrdinal>(&m)) {
        if (pending_ != Pending::ordinal || label_answer_)
            throw ProtocolError("unexpected_answer", "no challenge rating was asked for");
        label_answer_ = a->label;
    } else if (const auto* b = std::get_if<msg::AnswerPairwise>(&m)) {
        if (pending_ != Pending::pairwise || pref_answer_)
            throw ProtocolError("unexpected_answer", "no comparison was asked for");
        pref_answer_ = b->choice;
    }
    cv_.notify_all();
}

int LiveSession::advance() {
    std::lock_guard lock(mu_);
    if (finished_) throw ProtocolError("session_finished", "session " + id_ + " has already ended");
    ++credits_;
    cv_.notify_all();
    return credits_;
}

void LiveSession::gate(moo::Phase phase, int total) {
    std::unique_lock lock(mu_);
    phase_ = phase;
    iteration_ = 0;
    total_ = total;
    last_phase_update_ = msg::phase_update(phase, 0, total, !auto_advance_);
    broadcast(last_phase_update_);
    if (auto_advance_) return;
    state_ = "waiting";
    cv_.wait(lock, [&] { return stop_ || credits_ > 0; });
    if (stop_) throw Stopped();
    --credits_;
    state_ = "running";
}

void LiveSession::execute() {
    std::unique_ptr<moo::UserPort> user;
    if (cfg_.sim_user)
        user = std::make_unique<sim::SimulatedUser>(*cfg_.sim_user, cfg_.plant, cfg_.disturbance);
    else
        user = std::make_unique<HumanUser>(*this);

    ProtocolObserver o;
    o.before_phase = [this](moo::Phase p, int total) { gate(p, total); };
    o.on_trial_start = [this](moo::Phase p, int n, int total) {
        std::lock_guard lock(mu_);
        phase_ = p;
        iteration_ = n;
        total_ = total;
        last_phase_update_ = msg::phase_update(p, n, total);
        broadcast(last_phase_update_);
    };
    o.on_record = [this](const moo::TrialRecord& r) {
        std::lock_guard lock(mu_);
        ++n_records_;
        broadcast(msg::record(r));
    };
    o.on_model = [this](const PhaseSnapshot& s) {
        std::lock_guard lock(mu_);
        last_model_ = msg::model_update(s);
        broadcast(last_model_);
    };
    o.on_front = [this](moo::Phase p, const pareto::ParetoFront& f) {
        std::lock_guard lock(mu_);
        fronts_[std::string(moo::to_string(p))] = f;
        broadcast(msg::front_update(p, f));
    };
    o.on_selection = [this](const pareto::Selection& s) {
        std::lock_guard lock(mu_);
        selection_ = msg::selection(s);
        broadcast(selection_);
    };

    json end;
    try {
        LogWriter writer(log_path_, cfg_);
        const SessionLog log = run_protocol(*user, cfg_, writer_observer(writer, cfg_, o));
        writer.write(end_line(log.completed, log.failure));
        end = msg::session_end(log.completed, log.failure);
    } catch (const std::exception& e) {
        std::lock_guard lock(mu_);
        end = msg::session_end(false, PhaseFailure{phase_.value_or(moo::Phase::warmup), iteration_, e.what()});
    }
    std::lock_guard lock(mu_);
    end_ = std::move(end);
    finished_ = true;
    state_ = end_.at("completed").get<bool>() ? "completed" : "failed";
    broadcast(end_);
    cv_.notify_all();
}

json LiveSession::status() const {
    std::lock_guard lock(mu_);
    int experimenters = 0;
    for (const auto& [h, c] : clients_) experimenters += c.role == ClientRole::experimenter;
    return json{{"id", id_},
                {"participant_id", cfg_.participant_id},
                {"group", std::string(to_string(cfg_.group))},
                {"characterize_only", cfg_.characterize_only},
                {"simulated", cfg_.sim_user.has_value()},
                {"state", state_},
                {"phase", phase_ ? json(std::string(moo::to_string(*phase_))) : json(nullptr)},
                {"iteration", iteration_},
                {"total", total_},
                {"waiting", state_ == "waiting"},
                {"pending_advances", credits_},
                {"participant_connected", has_participant()},
                {"experimenters", experimenters},
                {"records", n_records_},
                {"finished", finished_},
                {"end", end_},
                {"log_path", log_path_.string()}};
}

json LiveSession::models() const {
    std::lock_guard lock(mu_);
    return json{{"model_update", last_model_}, {"fronts", fronts_}, {"selection", selection_}};
}

// ---------------------------------------------------------------------------

namespace {

HttpReply error_reply(int status, std::string_view code, std::string_view message) {
    return {status, json{{"error", json{{"code", code}, {"message", message}}}}};
}

std::vector<std::string> path_segments(std::string_view target) {
    target = target.substr(0, target.find('?'));
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < target.size()) {
        if (target[i] == '/') {
            ++i;
            continue;
        }
        const std::size_t j = std::min(target.find('/', i), target.size());
        out.emplace_back(target.substr(i, j - i));
        i = j;
    }
    return out;
}

std::optional<std::string> query_param(std::string_view target, const std::string& key) {
    const auto q = target.find('?');
    if (q == std::string_view::npos) return std::nullopt;
    std::istringstream query{std::string(target.substr(q + 1))};
    for (std::string kv; std::getline(query, kv, '&');) {
        const auto eq = kv.find('=');
        if (kv.substr(0, eq) == key) return eq == std::string::npos ? std::string() : kv.substr(eq + 1);
    }
    return std::nullopt;
}

}  // namespace

SessionRegistry::SessionRegistry(std::filesystem::path data_dir, LiveOptions opts)
    : data_dir_(std::move(data_dir)), opts_(opts) {}

SessionRegistry::~SessionRegistry() { stop_all(); }

std::shared_ptr<LiveSession> SessionRegistry::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

void SessionRegistry::stop_all() {
    std::vector<std::shared_ptr<LiveSession>> all;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, s] : sessions_) all.push_back(s);
    }
    for (auto& s : all) s->stop();
    for (auto& s : all) s->wait_finished();
}

HttpReply SessionRegistry::create(std::string_view body) {
    json req;
    try {
        req = body.empty() ? json::object() : json::parse(body);
    } catch (const json::parse_error& e) {
        return error_reply(400, "bad_json", e.what());
    }
    if (!req.is_object()) return error_reply(400, "bad_json", "request body must be a JSON object");
    SessionConfig cfg;
    bool auto_advance = false;
    try {
        if (req.contains("config")) cfg = req.at("config").get<SessionConfig>();
        if (req.contains("auto_advance")) auto_advance = req.at("auto_advance").get<bool>();
        cfg.validate();
    } catch (const std::exception& e) {
        return error_reply(400, "bad_config", e.what());
    }

    std::shared_ptr<LiveSession> s;
    {
        std::lock_guard lock(mu_);
        char id[32];
        std::snprintf(id, sizeof id, "s%04d", ++counter_);
        std::error_code ec;
        std::filesystem::create_directories(data_dir_, ec);
        try {
            s = std::make_shared<LiveSession>(id, cfg, data_dir_ / (std::string(id) + ".jsonl"), opts_, auto_advance);
        } catch (const std::exception& e) {
            return error_reply(400, "bad_config", e.what());
        }
        sessions_.emplace(id, s);
    }
    s->start();
    return {201, s->status()};
}

HttpReply SessionRegistry::route(std::string_view method, std::string_view target, std::string_view body) {
    const auto seg = path_segments(target);
    if (seg.empty() || seg[0] != "sessions") return error_reply(404, "not_found", "no such resource");
    if (seg.size() == 1) {
        if (method == "POST") return create(body);
        if (method == "GET") {
            json list = json::array();
            std::vector<std::shared_ptr<LiveSession>> all;
            {
                std::lock_guard lock(mu_);
                for (auto& [id, s] : sessions_) all.push_back(s);
            }
            for (auto& s : all) list.push_back(s->status());
            return {200, json{{"sessions", list}}};
        }
        return error_reply(405, "method_not_allowed", "use GET or POST on /sessions");
    }
    const auto s = find(seg[1]);
    if (!s) return error_reply(404, "not_found", "no session " + seg[1]);
    if (seg.size() == 2) {
        if (method != "GET") return error_reply(405, "method_not_allowed", "use GET on a session");
        return {200, s->status()};
    }
    if (seg.size() == 3 && seg[2] == "advance") {
        if (method != "POST") return error_reply(405, "method_not_allowed", "use POST to advance");
        try {
            s->advance();
        } catch (const ProtocolError& e) {
            return error_reply(409, e.code(), e.what());
        }
        return {200, s->status()};
    }
    if (seg.size() == 3 && seg[2] == "models") {
        if (method != "GET") return error_reply(405, "method_not_allowed", "use GET for models");
        return {200, s->models()};
    }
    return error_reply(404, "not_found", "no such resource");
}

bool SessionRegistry::is_socket_path(std::string_view target) {
    const auto seg = path_segments(target);
    return seg.size() == 3 && seg[0] == "sessions" && seg[2] == "ws";
}

SessionRegistry::SocketTarget SessionRegistry::socket_target(std::string_view target) {
    if (!is_socket_path(target)) throw ProtocolError("not_found", "not a session socket path");
    const auto seg = path_segments(target);
    SocketTarget t;
    t.session = find(seg[1]);
    if (!t.session) throw ProtocolError("not_found", "no session " + seg[1]);
    const auto mode = query_param(target, "mode").value_or("participant");
    const auto role = parse_role(mode);
    if (!role) throw ProtocolError("bad_request", "mode must be participant or experimenter");
    t.role = *role;
    return t;
}

}  // namespace hilpareto::session
