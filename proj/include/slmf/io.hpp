// JSON reading and writing for games, single-level problems, solutions and
// equilibrium reports. Infinite bounds are written as null.
#pragma once

#include <string>

#include "json.hpp"
#include "slmf/gnep.hpp"
#include "slmf/model.hpp"
#include "slmf/problem.hpp"

namespace slmf::io {

using Json = nlohmann::json;

// Game files: keys leader, followers, cardinality, mode. Throws
// std::runtime_error on malformed input; semantic checks are left to
// validate().
Json to_json(const GameSpec& spec);
GameSpec game_from_json(const Json& j);

Json to_json(const SingleLevelProblem& problem);

// wall_time is omitted when include_time is false so that repeated runs
// produce identical bytes.
Json to_json(const Solution& solution, bool include_time = true);
Solution solution_from_json(const Json& j);

Json to_json(const gnep::EquilibriumReport& report);

Json read_json_file(const std::string& path);
// Throws std::runtime_error when the file cannot be written.
void write_json_file(const std::string& path, const Json& j);

}  // namespace slmf::io
