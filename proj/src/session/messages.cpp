#include "hilpareto/session/messages.hpp"

#include <cmath>

#include "hilpareto/session/serialization.hpp"

using nlohmann::json;

namespace hilpareto::session::msg {

json state(const task::TaskState& s, double score_so_far) {
    return json{{"type", "state"},         {"t", s.t},          {"cart_x", s.x},
                {"cart_v", s.x_dot},       {"theta", s.theta},  {"theta_v", s.theta_dot},
                {"score_so_far", score_so_far}};
}

json trial_start(int attempt_index, double countdown_s) {
    return json{{"type", "trial_start"}, {"attempt_index", attempt_index}, {"countdown", countdown_s}};
}

json trial_end(int attempt_index, double score, task::FailureReason reason) {
    return json{{"type", "trial_end"},
                {"attempt_index", attempt_index},
                {"score", score},
                {"reason", std::string(task::to_string(reason))}};
}

json query_ordinal() { return json{{"type", "query_ordinal"}}; }

// The previous trial's assistance is never revealed, only that there was one.
json query_pairwise() { return json{{"type", "query_pairwise"}, {"prev_assist_blinded", false}}; }

json phase_update(moo::Phase phase, int iteration, int total, bool waiting) {
    return json{{"type", "phase_update"},
                {"phase", std::string(moo::to_string(phase))},
                {"iteration", iteration},
                {"total", total},
                {"waiting", waiting}};
}

json model_update(const PhaseSnapshot& s) {
    const auto& c = s.snapshot.curves;
    return json{{"type", "model_update"},
                {"phase", std::string(moo::to_string(s.phase))},
                {"iteration", s.snapshot.iteration},
                {"grid", c.grid},
                {"score_mean", c.score_mean},
                {"score_std", c.score_std},
                {"chall_mean", c.chall_mean},
                {"chall_std", c.chall_std},
                {"front_points", s.snapshot.front}};
}

json front_update(moo::Phase phase, const pareto::ParetoFront& f) {
    return json{{"type", "front_update"}, {"phase", std::string(moo::to_string(phase))}, {"front", f}};
}

json record(const moo::TrialRecord& r) { return json{{"type", "record"}, {"record", r}}; }

json selection(const pareto::Selection& s) {
    return json{{"type", "selection"}, {"assistance", s.assistance}, {"fallback", s.fallback}};
}

json session_end(bool completed, const std::optional<PhaseFailure>& failure) {
    json j = end_line(completed, failure);
    j["type"] = "session_end";
    return j;
}

json error(std::string_view code, std::string_view message) {
    return json{{"type", "error"}, {"code", code}, {"message", message}};
}

namespace {

const json& field(const json& j, const char* key) {
    if (!j.contains(key)) throw ProtocolError("bad_field", std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) throw ProtocolError("bad_field", std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

ClientMessage parse_client(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ProtocolError("bad_json", e.what());
    }
    if (!j.is_object()) throw ProtocolError("bad_json", "message must be a JSON object");
    const std::string type = string_field(j, "type");
    if (type == "input") {
        const json& f = field(j, "force");
        if (!f.is_number() || !std::isfinite(f.get<double>()))
            throw ProtocolError("bad_field", "force must be a finite number");
        return Input{f.get<double>()};
    }
    if (type == "answer_ordinal") {
        const std::string s = string_field(j, "label");
        const auto l = gp::parse_label(s);
        if (!l) throw ProtocolError("bad_field", "label must be easy, moderate or hard, got '" + s + "'");
        return AnswerOrdinal{*l};
    }
    if (type == "answer_pairwise") {
        const std::string s = string_field(j, "choice");
        const auto p = gp::parse_preference(s);
        if (!p) throw ProtocolError("bad_field", "choice must be last or previous, got '" + s + "'");
        return AnswerPairwise{*p};
    }
    throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
}

bool experimenter_only(const json& m) {
    const std::string t = m.value("type", "");
    return t == "model_update" || t == "front_update" || t == "record" || t == "selection";
}

}  // namespace hilpareto::session::msg
