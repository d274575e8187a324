#pragma once

#include "vrql/mdp.hpp"

#include <json.hpp>

#include <filesystem>

namespace vrql {

// MDP document: {num_states, num_actions, gamma, r_max, reward, kernel}, with
// reward row-major over (s, a) and kernel row-major over (s, a, s').

nlohmann::json mdp_to_json(const TabularMdp& mdp);

/// Parses and validates. Throws ValidationError on missing fields or bad sizes.
TabularMdp mdp_from_json(const nlohmann::json& doc);

/// Throws IoError if the file cannot be opened or parsed as JSON.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

TabularMdp load_mdp(const std::filesystem::path& path);
void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path);

nlohmann::json qfunction_to_json(const QFunction& q);

}  // namespace vrql
