#pragma once

// WebSocket message schema. Every message is a JSON object with a "type"
// field. Server to client: state, trial_start, trial_end, query_ordinal,
// query_pairwise, phase_update, model_update, front_update, record, selection,
// session_end, error. Client to server: input, answer_ordinal,
// answer_pairwise.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/moo/records.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/pareto/front.hpp"
#include "hilpareto/session/session_log.hpp"
#include "hilpareto/task/dynamics.hpp"
#include "hilpareto/task/trial.hpp"

namespace hilpareto::session {

/// A client broke the protocol. `code` is a stable machine-readable string.
class ProtocolError : public std::runtime_error {
public:
    ProtocolError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace msg {

nlohmann::json state(const task::TaskState& s, double score_so_far);
nlohmann::json trial_start(int attempt_index, double countdown_s);
nlohmann::json trial_end(int attempt_index, double score, task::FailureReason reason);
nlohmann::json query_ordinal();
nlohmann::json query_pairwise();
/// iteration 0 with waiting=true announces a phase that waits for "advance".
nlohmann::json phase_update(moo::Phase phase, int iteration, int total, bool waiting = false);
nlohmann::json model_update(const PhaseSnapshot& s);
nlohmann::json front_update(moo::Phase phase, const pareto::ParetoFront& f);
nlohmann::json record(const moo::TrialRecord& r);
nlohmann::json selection(const pareto::Selection& s);
nlohmann::json session_end(bool completed, const std::optional<PhaseFailure>& failure);
nlohmann::json error(std::string_view code, std::string_view message);

struct Input {
    double force = 0.0;  // unclamped, as sent
};
struct AnswerOrdinal {
    gp::OrdinalLabel label;
};
struct AnswerPairwise {
    gp::Preference choice;
};
using ClientMessage = std::variant<Input, AnswerOrdinal, AnswerPairwise>;

/// Parses one client text frame. Throws ProtocolError with code bad_json,
/// unknown_type or bad_field.
ClientMessage parse_client(std::string_view text);

/// Messages that reveal assistance levels or models; withheld from participants.
bool experimenter_only(const nlohmann::json& m);

}  // namespace msg

}  // namespace hilpareto::session
