#pragma once

#include <concepts>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cited/extraction.hpp"
#include "cited/graph.hpp"
#include "cited/model.hpp"
#include "cited/optim.hpp"
#include "cited/signature.hpp"

namespace cited {

namespace fs = std::filesystem;

/// printf("%.*g") with the given significant digits.
std::string format_real(double v, int digits);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const fs::path& path, std::string_view content);
/// Throws MissingArtifact naming the path.
std::string read_text(const fs::path& path);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(std::string_view s);

// JSON artifacts. Reals are written with 17 significant digits; parse errors
// raise ParseError.

std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(std::string_view text);
void save_dataset(const fs::path& path, const Dataset& ds);
Dataset load_dataset(const fs::path& path);

struct ModelFile {
  ModelParams params;
  TrainConfig training;
};

std::string model_to_json(const ModelFile& m);
ModelFile model_from_json(std::string_view text);
void save_model(const fs::path& path, const ModelFile& m);
ModelFile load_model(const fs::path& path);

struct SignatureFile {
  SignatureSet signature;
  BoundaryConfig config;
};

std::string signature_to_json(const SignatureFile& s);
/// Throws InvariantViolation when the stored commitment does not match the
/// indices.
SignatureFile signature_from_json(std::string_view text);
void save_signature(const fs::path& path, const SignatureFile& s);
SignatureFile load_signature(const fs::path& path);

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the manifest
  Provenance provenance = Provenance::surrogate;
  std::uint64_t seed = 0;
  std::size_t hidden = 0;
  OutputLevel level = OutputLevel::embedding;
  RemovalKind removal = RemovalKind::none;
};

std::string manifest_to_json(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> manifest_from_json(std::string_view text);

/// Comma-separated rows; reals at 12 significant digits.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& cell(std::string_view s);
  CsvWriter& cell(double v);
  template <std::integral T>
  CsvWriter& cell(T v) {
    return cell(std::string_view(std::to_string(v)));
  }
  /// Throws ShapeMismatch when the row width differs from the header.
  void end_row();
  const std::string& str() const noexcept { return out_; }

 private:
  std::size_t width_;
  std::size_t pending_ = 0;
  std::string out_;
};

}  // namespace cited
