#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ptrom/quadtree.hpp"
#include "ptrom/types.hpp"

namespace ptrom {

using json = nlohmann::ordered_json;

// Binary matrix container: 4-byte magic "PTMX", u32 version, u64 rows, u64
// cols, f64 dt, f64 t0, then column-major f64 payload.  dt/t0 are zero for
// matrices that are not time series.
inline constexpr std::array<char, 4> kMatrixMagic = {'P', 'T', 'M', 'X'};
inline constexpr std::uint32_t kMatrixVersion = 1;

struct MatrixFile {
  MatrixXd data;
  double dt = 0;
  double t0 = 0;
};

inline void write_matrix(const std::filesystem::path& path, const MatrixXd& mat, double dt = 0,
                         double t0 = 0) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("write_matrix: cannot open " + path.string());
  out.write(kMatrixMagic.data(), 4);
  const std::uint32_t version = kMatrixVersion;
  const std::uint64_t rows = static_cast<std::uint64_t>(mat.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(mat.cols());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(&dt), sizeof dt);
  out.write(reinterpret_cast<const char*>(&t0), sizeof t0);
  out.write(reinterpret_cast<const char*>(mat.data()),
            static_cast<std::streamsize>(sizeof(double) * mat.size()));
  if (!out) throw config_error("write_matrix: write failed for " + path.string());
}

inline MatrixFile read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("read_matrix: cannot open " + path.string());
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  MatrixFile out;
  in.read(magic.data(), 4);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  in.read(reinterpret_cast<char*>(&out.dt), sizeof out.dt);
  in.read(reinterpret_cast<char*>(&out.t0), sizeof out.t0);
  if (!in || magic != kMatrixMagic)
    throw config_error("read_matrix: " + path.string() + " is not a matrix file");
  if (version != kMatrixVersion)
    throw config_error("read_matrix: unsupported version " + std::to_string(version));
  out.data.resize(static_cast<Index>(rows), static_cast<Index>(cols));
  in.read(reinterpret_cast<char*>(out.data.data()),
          static_cast<std::streamsize>(sizeof(double) * out.data.size()));
  if (!in) throw config_error("read_matrix: truncated file " + path.string());
  return out;
}

inline std::string format_full(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline void write_csv(const std::filesystem::path& path, const MatrixXd& mat,
                      const std::vector<std::string>& column_names = {}) {
  std::ofstream out(path);
  if (!out) throw config_error("write_csv: cannot open " + path.string());
  if (!column_names.empty()) {
    if (static_cast<Index>(column_names.size()) != mat.cols())
      throw config_error("write_csv: header column count mismatch");
    for (size_t c = 0; c < column_names.size(); ++c)
      out << (c ? "," : "") << column_names[c];
    out << "\n";
  }
  for (Index r = 0; r < mat.rows(); ++r) {
    for (Index c = 0; c < mat.cols(); ++c) out << (c ? "," : "") << format_full(mat(r, c));
    out << "\n";
  }
  if (!out) throw config_error("write_csv: write failed for " + path.string());
}

inline void save_json(const std::filesystem::path& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw config_error("save_json: cannot open " + path.string());
  out << value.dump(2) << "\n";
  if (!out) throw config_error("save_json: write failed for " + path.string());
}

inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("load_json: cannot open " + path.string());
  json value;
  try {
    in >> value;
  } catch (const std::exception& e) {
    throw config_error("load_json: " + path.string() + ": " + e.what());
  }
  return value;
}

// Debug dump of a quadtree: per node its id, bounds, width, centroid,
// circulation sum, depth, child ids and (for leaves) member particle ids.
template <class S>
json tree_to_json(const QuadTree<S>& tree) {
  json nodes = json::array();
  for (std::int32_t id = 0; id < static_cast<std::int32_t>(tree.nodes.size()); ++id) {
    const auto& nd = tree.nodes[id];
    json entry;
    entry["node_id"] = id;
    entry["bounds"] = {double(nd.bounds[0]), double(nd.bounds[1]), double(nd.bounds[2]),
                       double(nd.bounds[3])};
    entry["width"] = double(nd.width);
    entry["centroid"] = {double(nd.centroid[0]), double(nd.centroid[1])};
    entry["gamma_sum"] = double(nd.gamma_sum);
    entry["depth"] = nd.depth;
    entry["centroid_fallback"] = static_cast<bool>(nd.centroid_fallback);
    json children = json::array();
    for (const std::int32_t c : nd.children)
      if (c >= 0) children.push_back(c);
    entry["children"] = children;
    if (nd.leaf()) {
      json members = json::array();
      for (Index k = nd.begin; k < nd.end; ++k) members.push_back(tree.perm[k]);
      entry["particle_ids"] = members;
    }
    nodes.push_back(entry);
  }
  return json{{"format", "quadtree-debug"}, {"version", 1}, {"nodes", nodes}};
}

}  // namespace ptrom
