#include "vrql/mdp_io.hpp"

#include "vrql/errors.hpp"

#include <fstream>
#include <sstream>

namespace vrql {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ValidationError(std::string("MDP document is missing `") + key + "`");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("MDP field `") + key + "`: " + e.what());
  }
}

}  // namespace

json mdp_to_json(const TabularMdp& mdp) {
  std::vector<double> reward;
  reward.reserve(mdp.num_pairs());
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) reward.push_back(mdp.reward(s, a));
  }
  return json{{"num_states", mdp.num_states}, {"num_actions", mdp.num_actions},
              {"gamma", mdp.discount},        {"r_max", mdp.r_max},
              {"reward", reward},             {"kernel", mdp.kernel}};
}

TabularMdp mdp_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("MDP document must be a JSON object");
  TabularMdp mdp;
  mdp.num_states = required<std::size_t>(doc, "num_states");
  mdp.num_actions = required<std::size_t>(doc, "num_actions");
  mdp.discount = required<double>(doc, "gamma");
  mdp.r_max = required<double>(doc, "r_max");
  const auto reward = required<std::vector<double>>(doc, "reward");
  mdp.kernel = required<std::vector<double>>(doc, "kernel");

  if (reward.size() != mdp.num_pairs()) {
    std::ostringstream msg;
    msg << "`reward` has " << reward.size() << " entries, expected " << mdp.num_pairs();
    throw ValidationError(msg.str());
  }
  mdp.reward.resize(mdp.num_states, mdp.num_actions);
  for (std::size_t s = 0; s < mdp.num_states; ++s) {
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      mdp.reward(s, a) = reward[s * mdp.num_actions + a];
    }
  }
  validate_mdp(mdp);
  return mdp;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

TabularMdp load_mdp(const std::filesystem::path& path) { return mdp_from_json(read_json_file(path)); }

void save_mdp(const TabularMdp& mdp, const std::filesystem::path& path) {
  write_text_file(path, mdp_to_json(mdp).dump(2) + "\n");
}

json qfunction_to_json(const QFunction& q) {
  json rows = json::array();
  for (Eigen::Index s = 0; s < q.rows(); ++s) {
    json row = json::array();
    for (Eigen::Index a = 0; a < q.cols(); ++a) row.push_back(q(s, a));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vrql
