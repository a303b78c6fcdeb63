#include "seep/run_export.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace seep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace binary {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void write_raw(const fs::path& file, std::span<const T> values) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  std::vector<char> buf(values.size() * sizeof(T));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const T le = to_little(values[i]);
    std::memcpy(buf.data() + i * sizeof(T), &le, sizeof(T));
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing " + file.string());
}

std::vector<char> slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ValidationError("missing file: " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T>
std::vector<T> decode(const std::vector<char>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v;
    std::memcpy(&v, bytes.data() + i * sizeof(T), sizeof(T));
    out[i] = to_little(v);
  }
  return out;
}

template <typename T>
std::vector<T> read_raw(const fs::path& file, std::size_t expected_count) {
  const auto bytes = slurp(file);
  const std::size_t expected_bytes = expected_count * sizeof(T);
  if (bytes.size() != expected_bytes) {
    throw ValidationError(file.filename().string() + ": byte length " +
                          std::to_string(bytes.size()) + " does not match declared shape (" +
                          std::to_string(expected_bytes) + " bytes expected)");
  }
  return decode<T>(bytes);
}

}  // namespace

void write_f32(const fs::path& file, std::span<const float> values) { write_raw(file, values); }
void write_u32(const fs::path& file, std::span<const std::uint32_t> values) {
  write_raw(file, values);
}
void write_u8(const fs::path& file, std::span<const std::uint8_t> values) {
  write_raw(file, values);
}

std::vector<float> read_f32(const fs::path& file, std::size_t n) { return read_raw<float>(file, n); }
std::vector<std::uint32_t> read_u32(const fs::path& file, std::size_t n) {
  return read_raw<std::uint32_t>(file, n);
}
std::vector<std::uint8_t> read_u8(const fs::path& file, std::size_t n) {
  return read_raw<std::uint8_t>(file, n);
}

std::vector<std::uint32_t> read_u32_all(const fs::path& file) {
  const auto bytes = slurp(file);
  if (bytes.size() % sizeof(std::uint32_t) != 0) {
    throw ValidationError(file.filename().string() + ": byte length " +
                          std::to_string(bytes.size()) + " is not a multiple of 4");
  }
  return decode<std::uint32_t>(bytes);
}

}  // namespace binary

namespace {

void check_plain_filename(const std::string& name) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos ||
      name == "." || name == "..") {
    throw ValidationError("array file name must be a plain file name: '" + name + "'");
  }
}

json array_entry(const std::string& file, const char* dtype, std::vector<std::size_t> shape) {
  return json{{"file", file}, {"dtype", dtype}, {"shape", shape}};
}

std::size_t get_count(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    throw ValidationError(std::string("manifest: '") + key + "' must be a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

/// Reads one "arrays" entry and checks its dtype and shape against the header counts.
std::string read_array_entry(const json& arrays, const char* key, const char* dtype,
                             const std::vector<std::size_t>& shape) {
  if (!arrays.contains(key)) throw ValidationError(std::string("manifest: missing array '") + key + "'");
  const json& e = arrays[key];
  if (!e.is_object() || !e.contains("file") || !e["file"].is_string()) {
    throw ValidationError(std::string("manifest: array '") + key + "' needs a file name");
  }
  if (!e.contains("dtype") || e["dtype"] != dtype) {
    throw ValidationError(std::string("manifest: array '") + key + "' must have dtype " + dtype);
  }
  if (!e.contains("shape") || !e["shape"].is_array() ||
      e["shape"].get<std::vector<std::size_t>>() != shape) {
    throw ValidationError(std::string("manifest: array '") + key +
                          "' shape does not match n_instances/n_epochs/embed_dim");
  }
  auto file = e["file"].get<std::string>();
  check_plain_filename(file);
  return file;
}

}  // namespace

void validate_run_export(const RunExport& run) {
  const RunManifest& m = run.manifest;
  if (m.format_version != kRunExportFormatVersion) {
    throw ValidationError("unsupported format_version " + std::to_string(m.format_version));
  }
  if (m.n_instances < 1) throw ValidationError("n_instances must be >= 1");
  if (m.n_epochs < 1) throw ValidationError("n_epochs must be >= 1");
  if (m.embed_dim < 1) throw ValidationError("embed_dim must be >= 1");
  if (m.n_classes < 2) throw ValidationError("n_classes must be >= 2");
  if (m.target_label && *m.target_label >= m.n_classes) {
    throw ValidationError("target_label " + std::to_string(*m.target_label) +
                          " is not < n_classes " + std::to_string(m.n_classes));
  }

  if (run.dynamics.rows() != m.n_instances || run.dynamics.cols() != m.n_epochs) {
    throw ValidationError("dynamics shape " + std::to_string(run.dynamics.rows()) + "x" +
                          std::to_string(run.dynamics.cols()) + " does not match manifest " +
                          std::to_string(m.n_instances) + "x" + std::to_string(m.n_epochs));
  }
  if (run.embeddings.rows() != m.n_instances || run.embeddings.cols() != m.embed_dim) {
    throw ValidationError("embeddings shape " + std::to_string(run.embeddings.rows()) + "x" +
                          std::to_string(run.embeddings.cols()) + " does not match manifest " +
                          std::to_string(m.n_instances) + "x" + std::to_string(m.embed_dim));
  }
  if (run.labels.size() != m.n_instances) {
    throw ValidationError("labels has " + std::to_string(run.labels.size()) +
                          " entries, manifest says n_instances=" + std::to_string(m.n_instances));
  }
  if (run.mask && run.mask->size() != m.n_instances) {
    throw ValidationError("poison mask has " + std::to_string(run.mask->size()) +
                          " entries, manifest says n_instances=" + std::to_string(m.n_instances));
  }

  for (std::size_t i = 0; i < run.dynamics.rows(); ++i) {
    for (std::size_t e = 0; e < run.dynamics.cols(); ++e) {
      const float p = run.dynamics(i, e);
      if (!(p >= 0.0f && p <= 1.0f)) {
        std::ostringstream os;
        os << "dynamics[" << i << "][" << e << "] = " << p << " is not a probability in [0, 1]";
        throw ValidationError(os.str());
      }
    }
  }
  for (std::size_t i = 0; i < run.embeddings.rows(); ++i) {
    for (std::size_t d = 0; d < run.embeddings.cols(); ++d) {
      if (!std::isfinite(run.embeddings(i, d))) {
        throw ValidationError("embeddings[" + std::to_string(i) + "][" + std::to_string(d) +
                              "] is not finite");
      }
    }
  }
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    if (run.labels[i] >= m.n_classes) {
      throw ValidationError("labels[" + std::to_string(i) + "] = " + std::to_string(run.labels[i]) +
                            " is not < n_classes " + std::to_string(m.n_classes));
    }
  }
  if (run.mask && m.poisoning_rate) {
    const double rate = *m.poisoning_rate;
    if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("poisoning_rate must be in [0, 1]");
    std::size_t pop = 0;
    for (bool b : *run.mask) pop += b ? 1 : 0;
    const double n = static_cast<double>(m.n_instances);
    if (std::abs(static_cast<double>(pop) / n - rate) > 1.0 / n + 1e-12) {
      throw ValidationError("poison mask popcount " + std::to_string(pop) +
                            " disagrees with declared poisoning_rate");
    }
  }
}

void write_run_export(const RunExport& run, const fs::path& dir) {
  validate_run_export(run);
  const RunManifest& m = run.manifest;
  check_plain_filename(m.dynamics_file);
  check_plain_filename(m.embeddings_file);
  check_plain_filename(m.labels_file);
  check_plain_filename(m.mask_file);

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  json arrays;
  arrays["dynamics"] = array_entry(m.dynamics_file, "float32", {m.n_instances, m.n_epochs});
  arrays["embeddings"] = array_entry(m.embeddings_file, "float32", {m.n_instances, m.embed_dim});
  arrays["labels"] = array_entry(m.labels_file, "uint32", {m.n_instances});
  if (run.mask) arrays["poison_mask"] = array_entry(m.mask_file, "uint8", {m.n_instances});

  json j;
  j["format_version"] = m.format_version;
  j["n_instances"] = m.n_instances;
  j["n_epochs"] = m.n_epochs;
  j["embed_dim"] = m.embed_dim;
  j["n_classes"] = m.n_classes;
  j["target_label"] = m.target_label ? json(*m.target_label) : json(nullptr);
  if (m.poisoning_rate) j["poisoning_rate"] = *m.poisoning_rate;
  j["arrays"] = arrays;

  binary::write_f32(dir / m.dynamics_file, run.dynamics.values());
  binary::write_f32(dir / m.embeddings_file, run.embeddings.values());
  binary::write_u32(dir / m.labels_file, run.labels);
  if (run.mask) {
    std::vector<std::uint8_t> bytes(run.mask->size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = (*run.mask)[i] ? 1 : 0;
    binary::write_u8(dir / m.mask_file, bytes);
  }

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest.json");
}

RunExport read_run_export(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw ValidationError("missing file: " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("manifest.json is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ValidationError("manifest.json must be a JSON object");

  RunExport run;
  RunManifest& m = run.manifest;
  if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw ValidationError("manifest: missing integer format_version");
  }
  m.format_version = j["format_version"].get<int>();
  if (m.format_version != kRunExportFormatVersion) {
    throw ValidationError("unsupported format_version " + std::to_string(m.format_version));
  }
  m.n_instances = get_count(j, "n_instances");
  m.n_epochs = get_count(j, "n_epochs");
  m.embed_dim = get_count(j, "embed_dim");
  m.n_classes = get_count(j, "n_classes");
  if (j.contains("target_label") && !j["target_label"].is_null()) {
    if (!j["target_label"].is_number_unsigned()) {
      throw ValidationError("manifest: target_label must be a class index or null");
    }
    m.target_label = j["target_label"].get<std::uint32_t>();
  }
  if (j.contains("poisoning_rate") && !j["poisoning_rate"].is_null()) {
    if (!j["poisoning_rate"].is_number()) throw ValidationError("manifest: poisoning_rate must be a number");
    m.poisoning_rate = j["poisoning_rate"].get<double>();
  }
  if (!j.contains("arrays") || !j["arrays"].is_object()) {
    throw ValidationError("manifest: missing 'arrays' object");
  }
  const json& arrays = j["arrays"];
  const std::size_t n = m.n_instances;
  m.dynamics_file = read_array_entry(arrays, "dynamics", "float32", {n, m.n_epochs});
  m.embeddings_file = read_array_entry(arrays, "embeddings", "float32", {n, m.embed_dim});
  m.labels_file = read_array_entry(arrays, "labels", "uint32", {n});
  const bool has_mask = arrays.contains("poison_mask");
  if (has_mask) m.mask_file = read_array_entry(arrays, "poison_mask", "uint8", {n});

  run.dynamics = DynamicsMatrix(n, m.n_epochs, binary::read_f32(dir / m.dynamics_file, n * m.n_epochs));
  run.embeddings =
      EmbeddingMatrix(n, m.embed_dim, binary::read_f32(dir / m.embeddings_file, n * m.embed_dim));
  run.labels = binary::read_u32(dir / m.labels_file, n);
  if (has_mask) {
    const auto bytes = binary::read_u8(dir / m.mask_file, n);
    PoisonMask mask(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (bytes[i] > 1) {
        throw ValidationError("poison_mask[" + std::to_string(i) + "] = " +
                              std::to_string(bytes[i]) + " is not 0 or 1");
      }
      mask[i] = bytes[i] == 1;
    }
    run.mask = std::move(mask);
  }
  validate_run_export(run);
  return run;
}

}  // namespace seep
