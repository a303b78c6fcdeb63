#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seep/run_export.hpp"
#include "seep/types.hpp"

namespace seep {

/// Ratios are std::nullopt when their denominator is zero ("undefined" in reports).
struct DetectionReport {
  std::size_t n_instances = 0;
  std::size_t n_flagged = 0;
  std::size_t total_poison = 0;
  std::size_t total_clean = 0;
  std::size_t flagged_poison = 0;
  std::size_t flagged_clean = 0;
  std::optional<double> frr;        // percent of clean instances flagged
  std::optional<double> far;        // percent of poison instances missed
  std::optional<double> precision;  // fraction
  std::optional<double> recall;     // fraction
  double keep_rate = 1.0;
};

DetectionReport detection_metrics(const IndexSet& flagged, const PoisonMask& mask);

/// Percentage of predictions equal to gold.
double cacc(const std::vector<std::uint32_t>& predicted, const std::vector<std::uint32_t>& gold);
/// Percentage of predictions equal to target_label.
double asr(const std::vector<std::uint32_t>& predicted, std::uint32_t target_label);

enum class PredictionRole { clean, poisoned };

/// One set of per-instance predictions, e.g. a model's outputs on the clean test set.
struct PredictionSet {
  std::string name;
  PredictionRole role = PredictionRole::clean;
  std::string model;  // free-form tag; "benign" marks the clean-trained reference model
  std::vector<std::uint32_t> predicted;
  std::optional<std::vector<std::uint32_t>> gold;  // required for clean sets
};

inline constexpr int kPredictionFormatVersion = 1;
inline constexpr const char* kBenignModelTag = "benign";

struct PredictionFile {
  int format_version = kPredictionFormatVersion;
  std::size_t n_classes = 0;
  std::optional<std::uint32_t> target_label;
  std::vector<PredictionSet> sets;
};

void validate_prediction_file(const PredictionFile& file);
/// Writes `dir`/manifest.json plus <name>.pred.u32 / <name>.gold.u32 per set.
void write_prediction_file(const PredictionFile& file, const std::filesystem::path& dir);
PredictionFile read_prediction_file(const std::filesystem::path& dir);

struct SetEvaluation {
  std::string name;
  PredictionRole role;
  std::string model;
  std::size_t n = 0;
  std::optional<double> cacc;  // clean sets
  std::optional<double> asr;   // poisoned sets
  std::optional<double> benign_asr;      // benign reference ASR, when one exists
  std::optional<double> asr_gap;         // asr - benign_asr
};

struct EvalReport {
  std::optional<std::uint32_t> target_label;
  std::vector<SetEvaluation> sets;
};

/// Throws ValidationError when a poisoned set is present but target_label is absent.
EvalReport evaluate_predictions(const PredictionFile& file);

const char* to_string(PredictionRole role);

}  // namespace seep
