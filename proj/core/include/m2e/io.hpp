#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "m2e/tensor.hpp"

namespace m2e::io {

/// Dataset layout on disk:
///
///   manifest.json           {"format_version": 1, "subject_count": N,
///                            "views": [{"name", "node_count", "matrix_file"}],
///                            "labels_file": "labels.txt", "metadata": {...}}
///   <view>.txt              N blocks of M lines with M numbers each, blank
///                           line between blocks
///   labels.txt              one integer label in [1, K] per line
///
/// Paths inside the manifest are relative to the manifest's directory.
inline constexpr int kFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

/// %.17g: every double re-parses to the identical value.
std::string format_double(double value);

/// Dense matrix as text: a "# rows cols" header line, then one row per line.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, std::span<const int> labels);
std::vector<int> read_labels(const std::filesystem::path& path);

/// Comma-separated table with a header row; all columns equally long.
void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns);

struct ViewEntry {
  std::string name;
  Index node_count = 0;
  std::string matrix_file;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  std::vector<ViewEntry> views;
  Index subject_count = 0;
  std::optional<std::string> labels_file;
  std::map<std::string, std::string> metadata;
};

struct Dataset {
  std::vector<std::string> view_names;
  std::vector<GraphViewTensor> views;
  std::optional<std::vector<int>> labels;
  std::map<std::string, std::string> metadata;
};

/// Parses and validates a manifest (positive dims, at least one view).
DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// Writes the manifest, one matrix file per view and, if present, labels.
/// Creates `dir` if needed.
void save_dataset(const std::filesystem::path& dir, const Dataset& data);

/// `path` is a manifest file or a directory holding manifest.json. Slices
/// are symmetrized when their asymmetry is at most 1e-6 and rejected
/// otherwise. Throws std::runtime_error with the offending file, view or
/// slice in the message.
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace m2e::io
