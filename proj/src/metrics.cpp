#include "seep/metrics.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace seep {

namespace fs = std::filesystem;
using nlohmann::json;

DetectionReport detection_metrics(const IndexSet& flagged, const PoisonMask& mask) {
  DetectionReport r;
  r.n_instances = mask.size();
  for (bool b : mask) r.total_poison += b ? 1 : 0;
  r.total_clean = r.n_instances - r.total_poison;
  Index prev = 0;
  for (std::size_t k = 0; k < flagged.size(); ++k) {
    const Index i = flagged[k];
    if (i >= mask.size()) throw ValidationError("flagged index " + std::to_string(i) + " out of range");
    if (k > 0 && i <= prev) throw ValidationError("flagged indices must be sorted and distinct");
    prev = i;
    (mask[i] ? r.flagged_poison : r.flagged_clean) += 1;
  }
  r.n_flagged = flagged.size();
  if (r.total_clean > 0) r.frr = 100.0 * static_cast<double>(r.flagged_clean) / static_cast<double>(r.total_clean);
  if (r.total_poison > 0) {
    r.far = 100.0 * static_cast<double>(r.total_poison - r.flagged_poison) /
            static_cast<double>(r.total_poison);
    r.recall = static_cast<double>(r.flagged_poison) / static_cast<double>(r.total_poison);
  }
  if (r.n_flagged > 0) {
    r.precision = static_cast<double>(r.flagged_poison) / static_cast<double>(r.n_flagged);
  }
  r.keep_rate = r.n_instances == 0 ? 1.0
                                   : 1.0 - static_cast<double>(r.n_flagged) /
                                               static_cast<double>(r.n_instances);
  return r;
}

double cacc(const std::vector<std::uint32_t>& predicted, const std::vector<std::uint32_t>& gold) {
  if (predicted.size() != gold.size()) {
    throw ValidationError("cacc: " + std::to_string(predicted.size()) + " predictions for " +
                          std::to_string(gold.size()) + " gold labels");
  }
  if (predicted.empty()) throw ValidationError("cacc: empty prediction set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == gold[i] ? 1 : 0;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double asr(const std::vector<std::uint32_t>& predicted, std::uint32_t target_label) {
  if (predicted.empty()) throw ValidationError("asr: empty prediction set");
  std::size_t hit = 0;
  for (auto p : predicted) hit += p == target_label ? 1 : 0;
  return 100.0 * static_cast<double>(hit) / static_cast<double>(predicted.size());
}

const char* to_string(PredictionRole role) {
  return role == PredictionRole::clean ? "clean" : "poisoned";
}

void validate_prediction_file(const PredictionFile& file) {
  if (file.format_version != kPredictionFormatVersion) {
    throw ValidationError("predictions: unsupported format_version " +
                          std::to_string(file.format_version));
  }
  if (file.n_classes < 2) throw ValidationError("predictions: n_classes must be >= 2");
  if (file.target_label && *file.target_label >= file.n_classes) {
    throw ValidationError("predictions: target_label is not < n_classes");
  }
  std::set<std::string> names;
  for (const auto& s : file.sets) {
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos || s.name == "." ||
        s.name == "..") {
      throw ValidationError("predictions: set name must be a plain identifier: '" + s.name + "'");
    }
    if (!names.insert(s.name).second) throw ValidationError("predictions: duplicate set '" + s.name + "'");
    if (s.predicted.empty()) throw ValidationError("predictions: set '" + s.name + "' is empty");
    if (s.gold && s.gold->size() != s.predicted.size()) {
      throw ValidationError("predictions: set '" + s.name + "' has " +
                            std::to_string(s.predicted.size()) + " predictions but " +
                            std::to_string(s.gold->size()) + " gold labels");
    }
    if (s.role == PredictionRole::clean && !s.gold) {
      throw ValidationError("predictions: clean set '" + s.name + "' needs gold labels");
    }
    auto check_range = [&](const std::vector<std::uint32_t>& v, const char* what) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] >= file.n_classes) {
          throw ValidationError("predictions: " + s.name + "." + what + "[" + std::to_string(i) +
                                "] = " + std::to_string(v[i]) + " is not < n_classes");
        }
      }
    };
    check_range(s.predicted, "predicted");
    if (s.gold) check_range(*s.gold, "gold");
    if (s.role == PredictionRole::poisoned && s.gold && file.target_label) {
      for (std::size_t i = 0; i < s.gold->size(); ++i) {
        if ((*s.gold)[i] == *file.target_label) {
          throw ValidationError("predictions: poisoned set '" + s.name + "' gold[" +
                                std::to_string(i) + "] already has the target label");
        }
      }
    }
  }
}

void write_prediction_file(const PredictionFile& file, const fs::path& dir) {
  validate_prediction_file(file);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  json sets = json::array();
  for (const auto& s : file.sets) {
    json e{{"name", s.name},
           {"role", to_string(s.role)},
           {"model", s.model},
           {"n", s.predicted.size()},
           {"predicted", s.name + ".pred.u32"}};
    binary::write_u32(dir / (s.name + ".pred.u32"), s.predicted);
    if (s.gold) {
      e["gold"] = s.name + ".gold.u32";
      binary::write_u32(dir / (s.name + ".gold.u32"), *s.gold);
    }
    sets.push_back(std::move(e));
  }
  json j{{"format_version", file.format_version},
         {"n_classes", file.n_classes},
         {"target_label", file.target_label ? json(*file.target_label) : json(nullptr)},
         {"sets", sets}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
}

PredictionFile read_prediction_file(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ValidationError("missing file: " + (dir / "manifest.json").string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("predictions manifest is not valid JSON: " + std::string(e.what()));
  }
  PredictionFile f;
  try {
    f.format_version = j.at("format_version").get<int>();
    if (f.format_version != kPredictionFormatVersion) {
      throw ValidationError("predictions: unsupported format_version " +
                            std::to_string(f.format_version));
    }
    f.n_classes = j.at("n_classes").get<std::size_t>();
    if (j.contains("target_label") && !j["target_label"].is_null()) {
      f.target_label = j["target_label"].get<std::uint32_t>();
    }
    for (const auto& e : j.at("sets")) {
      PredictionSet s;
      s.name = e.at("name").get<std::string>();
      const auto role = e.at("role").get<std::string>();
      if (role == "clean") s.role = PredictionRole::clean;
      else if (role == "poisoned") s.role = PredictionRole::poisoned;
      else throw ValidationError("predictions: unknown role '" + role + "'");
      s.model = e.value("model", std::string{});
      const auto n = e.at("n").get<std::size_t>();
      auto plain = [](const std::string& name) {
        if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
          throw ValidationError("predictions: file name must be plain: '" + name + "'");
        }
        return name;
      };
      s.predicted = binary::read_u32(dir / plain(e.at("predicted").get<std::string>()), n);
      if (e.contains("gold") && !e["gold"].is_null()) {
        s.gold = binary::read_u32(dir / plain(e["gold"].get<std::string>()), n);
      }
      f.sets.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ValidationError("predictions manifest: " + std::string(e.what()));
  }
  validate_prediction_file(f);
  return f;
}

EvalReport evaluate_predictions(const PredictionFile& file) {
  validate_prediction_file(file);
  EvalReport r;
  r.target_label = file.target_label;
  std::optional<double> benign_asr;
  for (const auto& s : file.sets) {
    if (s.role != PredictionRole::poisoned) continue;
    if (!file.target_label) {
      throw ValidationError("predictions: poisoned set '" + s.name +
                            "' needs target_label for ASR");
    }
    if (s.model == kBenignModelTag) benign_asr = asr(s.predicted, *file.target_label);
  }
  for (const auto& s : file.sets) {
    SetEvaluation e{s.name, s.role, s.model, s.predicted.size(), {}, {}, {}, {}};
    if (s.role == PredictionRole::clean) {
      e.cacc = cacc(s.predicted, *s.gold);
    } else {
      e.asr = asr(s.predicted, *file.target_label);
      if (benign_asr && s.model != kBenignModelTag) {
        e.benign_asr = benign_asr;
        e.asr_gap = *e.asr - *benign_asr;
      }
    }
    r.sets.push_back(std::move(e));
  }
  return r;
}

}  // namespace seep
