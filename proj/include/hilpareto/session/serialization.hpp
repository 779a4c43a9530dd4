#pragma once

// JSON mappings for the types that appear in session logs, configs and the
// service API. Readers fill missing fields with defaults; unknown enum
// strings raise LogFormatError.

#include "json.hpp"

#include "hilpareto/gp/kernel.hpp"
#include "hilpareto/gp/likelihood.hpp"
#include "hilpareto/gp/qual_gp.hpp"
#include "hilpareto/moo/engine.hpp"
#include "hilpareto/moo/records.hpp"
#include "hilpareto/pareto/analysis.hpp"
#include "hilpareto/pareto/front.hpp"
#include "hilpareto/task/params.hpp"
#include "hilpareto/task/trial.hpp"

namespace hilpareto::task {
void to_json(nlohmann::json& j, const PlantParams& p);
void from_json(const nlohmann::json& j, PlantParams& p);
void to_json(nlohmann::json& j, const DisturbanceConfig& d);
void from_json(const nlohmann::json& j, DisturbanceConfig& d);
}  // namespace hilpareto::task

namespace hilpareto::gp {
void to_json(nlohmann::json& j, const KernelParams& k);
void from_json(const nlohmann::json& j, KernelParams& k);
void to_json(nlohmann::json& j, const LikelihoodParams& l);
void from_json(const nlohmann::json& j, LikelihoodParams& l);
void to_json(nlohmann::json& j, const LaplaceOptions& o);
void from_json(const nlohmann::json& j, LaplaceOptions& o);
}  // namespace hilpareto::gp

namespace hilpareto::pareto {
void to_json(nlohmann::json& j, const SelectionWindow& w);
void from_json(const nlohmann::json& j, SelectionWindow& w);
void to_json(nlohmann::json& j, const ObjectivePoint& p);
void from_json(const nlohmann::json& j, ObjectivePoint& p);
void to_json(nlohmann::json& j, const ParetoFront& f);
void from_json(const nlohmann::json& j, ParetoFront& f);
void to_json(nlohmann::json& j, const ModelCurves& c);
void from_json(const nlohmann::json& j, ModelCurves& c);
}  // namespace hilpareto::pareto

namespace hilpareto::moo {
void to_json(nlohmann::json& j, const AcqParams& a);
void from_json(const nlohmann::json& j, AcqParams& a);
void to_json(nlohmann::json& j, const CharacterizationConfig& c);
void from_json(const nlohmann::json& j, CharacterizationConfig& c);
void to_json(nlohmann::json& j, const TrialRecord& r);
void from_json(const nlohmann::json& j, TrialRecord& r);
void to_json(nlohmann::json& j, const ModelSnapshot& s);
void from_json(const nlohmann::json& j, ModelSnapshot& s);
}  // namespace hilpareto::moo
