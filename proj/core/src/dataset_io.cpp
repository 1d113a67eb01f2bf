#include "m2e/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace m2e::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

bool is_blank_or_comment(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string_view::npos || line[pos] == '#';
}

// Parses whitespace-separated doubles on one line.
std::vector<double> parse_numbers(std::string_view line, const fs::path& path, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r' || *p == ',')) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": not a number");
    }
    values.push_back(v);
    p = next;
  }
  return values;
}

}  // namespace

void write_matrix(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  out << "# " << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Matrix read_matrix(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::optional<std::pair<Index, Index>> declared;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) {
      if (!declared && line_no == 1 && line.rfind('#', 0) == 0) {
        std::istringstream header(line.substr(1));
        Index r = 0, c = 0;
        if (header >> r >> c) declared = std::make_pair(r, c);
      }
      continue;
    }
    rows.push_back(parse_numbers(line, path, line_no));
    if (rows.back().size() != rows.front().size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  if (declared && (declared->first != r || declared->second != c)) {
    throw std::runtime_error(path.string() + ": header declares " + std::to_string(declared->first) +
                             "x" + std::to_string(declared->second) + " but file holds " +
                             std::to_string(r) + "x" + std::to_string(c));
  }
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_labels(const fs::path& path, std::span<const int> labels) {
  std::ofstream out = open_out(path);
  for (int l : labels) out << l << '\n';
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::istringstream s(line);
    int l = 0;
    std::string rest;
    if (!(s >> l) || (s >> rest)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected one integer label");
    }
    if (l < 1) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": labels must be >= 1");
    }
    labels.push_back(l);
  }
  return labels;
}

void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_table: header/column count");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("write_table: ragged columns");
  }
  std::ofstream out = open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j][i]);
    out << '\n';
  }
}

DatasetManifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in = open_in(manifest_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": invalid JSON: " + e.what());
  }
  DatasetManifest m;
  try {
    m.format_version = doc.value("format_version", kFormatVersion);
    if (m.format_version != kFormatVersion) {
      throw std::runtime_error("unsupported format_version " + std::to_string(m.format_version));
    }
    // Subject counts may be declared once at the top level, per view, or
    // both; every declaration must agree.
    std::optional<std::pair<std::string, Index>> first_count;
    auto declare = [&](const std::string& who, Index count) {
      if (!first_count) {
        first_count = std::make_pair(who, count);
      } else if (first_count->second != count) {
        throw std::runtime_error(first_count->first + " declares " +
                                 std::to_string(first_count->second) + " subjects but " + who +
                                 " declares " + std::to_string(count));
      }
    };
    if (doc.contains("subject_count")) declare("manifest", doc["subject_count"].get<Index>());
    for (const auto& v : doc.at("views")) {
      ViewEntry e;
      e.name = v.at("name").get<std::string>();
      e.node_count = v.at("node_count").get<Index>();
      e.matrix_file = v.at("matrix_file").get<std::string>();
      if (v.contains("subject_count")) declare("view '" + e.name + "'", v["subject_count"].get<Index>());
      m.views.push_back(std::move(e));
    }
    if (!first_count) throw std::runtime_error("no subject_count declared");
    m.subject_count = first_count->second;
    if (doc.contains("labels_file") && !doc["labels_file"].is_null()) {
      const auto lf = doc["labels_file"].get<std::string>();
      if (!lf.empty()) m.labels_file = lf;
    }
    if (doc.contains("metadata")) {
      for (const auto& [key, value] : doc["metadata"].items()) {
        m.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
      }
    }
  } catch (const json::exception& e) {
    throw std::runtime_error(manifest_path.string() + ": " + e.what());
  }
  if (m.views.empty()) throw std::runtime_error(manifest_path.string() + ": no views");
  if (m.subject_count < 1) throw std::runtime_error(manifest_path.string() + ": subject_count must be positive");
  for (const auto& v : m.views) {
    if (v.node_count < 1) {
      throw std::runtime_error(manifest_path.string() + ": view '" + v.name +
                               "' node_count must be positive");
    }
  }
  return m;
}

namespace {

void write_view(const fs::path& path, const GraphViewTensor& view) {
  std::ofstream out = open_out(path);
  const Index m = view.node_count();
  for (Index n = 0; n < view.subject_count(); ++n) {
    if (n) out << '\n';
    const auto s = view.slice(n);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        if (j) out << ' ';
        out << format_double(s(i, j));
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Tensor3 read_view(const fs::path& path, Index m, Index n) {
  std::ifstream in = open_in(path);
  Tensor3 t(m, m, n);
  std::string line;
  std::size_t line_no = 0;
  Index row = 0;  // global row counter over all blocks
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    const std::vector<double> values = parse_numbers(line, path, line_no);
    if (static_cast<Index>(values.size()) != m) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(m) + " values, found " + std::to_string(values.size()));
    }
    if (row >= m * n) {
      throw std::runtime_error(path.string() + ": more than " + std::to_string(n) +
                               " blocks of " + std::to_string(m) + " rows");
    }
    const Index slice = row / m;
    const Index i = row % m;
    for (Index j = 0; j < m; ++j) t(i, j, slice) = values[static_cast<std::size_t>(j)];
    ++row;
  }
  if (row != m * n) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(n) + " blocks of " +
                             std::to_string(m) + " rows, found " + std::to_string(row) + " rows");
  }
  return t;
}

}  // namespace

void save_dataset(const fs::path& dir, const Dataset& data) {
  if (data.views.empty()) throw std::invalid_argument("save_dataset: no views");
  if (data.view_names.size() != data.views.size()) {
    throw std::invalid_argument("save_dataset: one name per view required");
  }
  fs::create_directories(dir);
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["subject_count"] = data.views.front().subject_count();
  doc["views"] = json::array();
  for (std::size_t v = 0; v < data.views.size(); ++v) {
    const std::string file = data.view_names[v] + ".txt";
    write_view(dir / file, data.views[v]);
    doc["views"].push_back({{"name", data.view_names[v]},
                            {"node_count", data.views[v].node_count()},
                            {"subject_count", data.views[v].subject_count()},
                            {"matrix_file", file}});
  }
  if (data.labels) {
    write_labels(dir / "labels.txt", *data.labels);
    doc["labels_file"] = "labels.txt";
  }
  doc["metadata"] = data.metadata;
  std::ofstream out = open_out(dir / kManifestName);
  out << doc.dump(2) << '\n';
}

Dataset load_dataset(const fs::path& path) {
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("manifest not found: " + manifest_path.string());
  }
  const DatasetManifest manifest = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  Dataset data;
  data.metadata = manifest.metadata;
  for (const ViewEntry& entry : manifest.views) {
    const fs::path file = base / entry.matrix_file;
    if (!fs::exists(file)) {
      throw std::runtime_error("view '" + entry.name + "': matrix file not found: " + file.string());
    }
    Tensor3 t = read_view(file, entry.node_count, manifest.subject_count);
    try {
      data.views.push_back(GraphViewTensor::symmetrized(std::move(t)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("view '" + entry.name + "': " + e.what());
    }
    data.view_names.push_back(entry.name);
  }
  if (manifest.labels_file) {
    const fs::path file = base / *manifest.labels_file;
    if (!fs::exists(file)) throw std::runtime_error("labels file not found: " + file.string());
    std::vector<int> labels = read_labels(file);
    if (static_cast<Index>(labels.size()) != manifest.subject_count) {
      throw std::runtime_error(file.string() + ": " + std::to_string(labels.size()) +
                               " labels for " + std::to_string(manifest.subject_count) + " subjects");
    }
    data.labels = std::move(labels);
  }
  return data;
}

}  // namespace m2e::io
