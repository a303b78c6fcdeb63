#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seep/types.hpp"

namespace seep {

inline constexpr int kRunExportFormatVersion = 1;

/// Describes one training run's export bundle.
struct RunManifest {
  std::size_t n_instances = 0;
  std::size_t n_epochs = 0;
  std::size_t embed_dim = 0;
  std::size_t n_classes = 0;
  std::optional<std::uint32_t> target_label;
  /// Declared poisoning rate; when present the mask popcount must agree within 1/n.
  std::optional<double> poisoning_rate;
  int format_version = kRunExportFormatVersion;

  std::string dynamics_file = "dynamics.f32";
  std::string embeddings_file = "embeddings.f32";
  std::string labels_file = "labels.u32";
  std::string mask_file = "poison_mask.u8";
};

/// p(y_i | x_i; theta_e), shape n_instances x n_epochs. Stored raw, never clamped.
using DynamicsMatrix = Matrix<float>;
/// Final-epoch latent representations, shape n_instances x embed_dim.
using EmbeddingMatrix = Matrix<float>;
using LabelVector = std::vector<std::uint32_t>;
/// true <=> instance belongs to the poisoned subset.
using PoisonMask = std::vector<bool>;

struct RunExport {
  RunManifest manifest;
  DynamicsMatrix dynamics;
  EmbeddingMatrix embeddings;
  LabelVector labels;
  std::optional<PoisonMask> mask;
};

/// Checks every type invariant of the bundle. Throws ValidationError naming the
/// first offending location.
void validate_run_export(const RunExport& run);

/// Writes manifest.json plus raw little-endian arrays into `dir` (created if needed).
void write_run_export(const RunExport& run, const std::filesystem::path& dir);

/// Reads and fully validates a bundle written by write_run_export or any
/// conforming producer.
RunExport read_run_export(const std::filesystem::path& dir);

namespace binary {

// Little-endian raw array helpers shared with the prediction-file format.
void write_f32(const std::filesystem::path& file, std::span<const float> values);
void write_u32(const std::filesystem::path& file, std::span<const std::uint32_t> values);
void write_u8(const std::filesystem::path& file, std::span<const std::uint8_t> values);

std::vector<float> read_f32(const std::filesystem::path& file, std::size_t expected_count);
std::vector<std::uint32_t> read_u32(const std::filesystem::path& file,
                                    std::size_t expected_count);
std::vector<std::uint8_t> read_u8(const std::filesystem::path& file, std::size_t expected_count);

/// Reads a u32 file of unknown length (length must be a multiple of 4).
std::vector<std::uint32_t> read_u32_all(const std::filesystem::path& file);

}  // namespace binary

}  // namespace seep
