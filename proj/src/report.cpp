#include "seep/report.hpp"

#include <fstream>

namespace seep {

using nlohmann::json;

json ratio_json(const std::optional<double>& v) { return v ? json(*v) : json("undefined"); }

json to_json(const DetectionReport& r) {
  return json{{"n_instances", r.n_instances},     {"n_flagged", r.n_flagged},
              {"total_poison", r.total_poison},   {"total_clean", r.total_clean},
              {"flagged_poison", r.flagged_poison}, {"flagged_clean", r.flagged_clean},
              {"frr", ratio_json(r.frr)},         {"far", ratio_json(r.far)},
              {"precision", ratio_json(r.precision)}, {"recall", ratio_json(r.recall)},
              {"keep_rate", r.keep_rate}};
}

json to_json(const PropagationConfig& c) {
  json j{{"k", c.k},
         {"tau", c.tau},
         {"seed_fraction", c.seed_fraction},
         {"scorer", to_string(c.scorer)},
         {"density", to_string(c.density)},
         {"density_space", c.density_space.str()},
         {"refit_density", c.refit_density}};
  if (c.density == DensityKind::kde) {
    j["bandwidth"] = c.bandwidth;
  } else {
    j["gmm_components"] = c.gmm_components;
    j["gmm_seed"] = c.gmm_seed;
  }
  j["max_iterations"] = c.max_iterations ? json(*c.max_iterations) : json("n_instances");
  return j;
}

json to_json(const IterationRecord& r) {
  json j{{"iteration", r.iteration},
         {"frontier_size", r.frontier.size()},
         {"frontier", r.frontier},
         {"p_mu", r.p_mu},
         {"log_p_mu", r.log_p_mu},
         {"accepted", r.accepted}};
  if (r.precision) j["precision"] = *r.precision;
  if (r.recall) j["recall"] = *r.recall;
  return j;
}

json to_json(const EvalReport& r) {
  json sets = json::array();
  for (const auto& s : r.sets) {
    json e{{"name", s.name}, {"role", to_string(s.role)}, {"model", s.model}, {"n", s.n}};
    if (s.cacc) e["cacc"] = *s.cacc;
    if (s.asr) e["asr"] = *s.asr;
    if (s.benign_asr) e["benign_asr"] = *s.benign_asr;
    if (s.asr_gap) e["asr_gap"] = *s.asr_gap;
    sets.push_back(std::move(e));
  }
  return json{{"target_label", r.target_label ? json(*r.target_label) : json(nullptr)},
              {"sets", sets}};
}

namespace {

json profile_json(const std::vector<BetaParams>& p) {
  json a = json::array();
  for (const auto& b : p) a.push_back(json::array({b.a, b.b}));
  return a;
}

std::vector<BetaParams> profile_from(const json& j) {
  std::vector<BetaParams> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw ValidationError("profile entries must be [a, b] pairs");
    out.push_back({e[0].get<double>(), e[1].get<double>()});
  }
  return out;
}

}  // namespace

json to_json(const SyntheticConfig& c) {
  return json{{"n_instances", c.n_instances},
              {"n_classes", c.n_classes},
              {"embed_dim", c.embed_dim},
              {"n_epochs", c.n_epochs},
              {"poisoning_rate", c.poisoning_rate},
              {"cluster_std", c.cluster_std},
              {"poison_std", c.poison_std},
              {"class_separation", c.class_separation},
              {"cluster_separation", c.cluster_separation},
              {"overlap_fraction", c.overlap_fraction},
              {"target_label", c.target_label},
              {"clean_profile", profile_json(c.clean_profile)},
              {"poison_profile", profile_json(c.poison_profile)},
              {"rng_seed", c.rng_seed}};
}

SyntheticConfig synthetic_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("synthetic config must be a JSON object");
  SyntheticConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_instances") c.n_instances = v.get<std::size_t>();
      else if (key == "n_classes") c.n_classes = v.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = v.get<std::size_t>();
      else if (key == "n_epochs") c.n_epochs = v.get<std::size_t>();
      else if (key == "poisoning_rate") c.poisoning_rate = v.get<double>();
      else if (key == "cluster_std") c.cluster_std = v.get<double>();
      else if (key == "poison_std") c.poison_std = v.get<double>();
      else if (key == "class_separation") c.class_separation = v.get<double>();
      else if (key == "cluster_separation") c.cluster_separation = v.get<double>();
      else if (key == "overlap_fraction") c.overlap_fraction = v.get<double>();
      else if (key == "target_label") c.target_label = v.get<std::uint32_t>();
      else if (key == "clean_profile") c.clean_profile = profile_from(v);
      else if (key == "poison_profile") c.poison_profile = profile_from(v);
      else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
      else throw ValidationError("synthetic config: unknown key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError("synthetic config: " + std::string(e.what()));
  }
  return c;
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << text;
  if (!out) throw IoError("failed writing " + file.string());
}

void write_json_file(const std::filesystem::path& file, const json& j) {
  write_text_file(file, j.dump(2) + "\n");
}

}  // namespace seep
