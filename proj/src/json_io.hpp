#pragma once

#include "instrbo/campaign.hpp"
#include "instrbo/synthetic.hpp"
#include "instrbo/types.hpp"

#include <nlohmann/json.hpp>

namespace instrbo::detail {

nlohmann::json config_to_json(const CampaignConfig& c);
CampaignConfig config_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const EvalRecord& r);
EvalRecord record_from_json(const nlohmann::json& j);

nlohmann::json task_to_json(const TaskSpec& t);
TaskSpec task_from_json(const nlohmann::json& j);

nlohmann::json synthetic_to_json(const SyntheticTask& t);
SyntheticTask synthetic_from_json(const nlohmann::json& j);

}  // namespace instrbo::detail
