#include "ptrom/bundle.hpp"

#include <filesystem>

namespace ptrom {

namespace {

namespace fs = std::filesystem;

void write_vector(const fs::path& path, const VectorXd& v) {
  write_matrix(path.string(), MatrixXd(v), 0.0, 0.0);
}

VectorXd read_vector(const fs::path& path) {
  const MatrixXd m = read_matrix(path.string()).data;
  if (m.cols() != 1) throw config_error(path.string() + ": expected a single column");
  return VectorXd(m.col(0));
}

json index_vector(const std::vector<Index>& v) {
  json out = json::array();
  for (const Index x : v) out.push_back(x);
  return out;
}

std::vector<Index> parse_indices(const json& j) {
  std::vector<Index> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(x.get<Index>());
  return out;
}

json nested_index(const std::vector<std::vector<Index>>& lists) {
  json out = json::array();
  for (const auto& l : lists) out.push_back(index_vector(l));
  return out;
}

std::vector<std::vector<Index>> parse_nested(const json& j) {
  std::vector<std::vector<Index>> out;
  out.reserve(j.size());
  for (const auto& l : j) out.push_back(parse_indices(l));
  return out;
}

}  // namespace

void OfflineBundle::save(const std::string& dir) const {
  const fs::path root(dir);
  fs::create_directories(root);

  write_matrix((root / "basis_phi.ptmx").string(), basis.phi, 0.0, 0.0);
  write_vector(root / "basis_sv.ptmx", basis.singular_values);
  write_vector(root / "basis_xref.ptmx", basis.x_ref);
  write_matrix((root / "residual_phi.ptmx").string(), residual.phi, 0.0, 0.0);
  write_vector(root / "residual_sv.ptmx", residual.singular_values);
  write_matrix((root / "gnat_a.ptmx").string(), op.A, 0.0, 0.0);
  write_matrix((root / "surrogate_phi.ptmx").string(), surrogate.phi_tilde, 0.0, 0.0);
  write_vector(root / "surrogate_x0.ptmx", surrogate.x0_tilde);
  write_vector(root / "surrogate_gamma.ptmx", surrogate.gamma_tilde);
  write_matrix((root / "direct_phi.ptmx").string(), surrogate.direct_phi, 0.0, 0.0);
  write_vector(root / "direct_x0.ptmx", surrogate.direct_x0);
  write_vector(root / "direct_gamma.ptmx", surrogate.direct_gamma);

  json index;
  index["format"] = "ptrom-bundle";
  index["version"] = 1;
  index["config"] = config.to_json();
  index["matrices"] = {"basis_phi.ptmx",     "basis_sv.ptmx",       "basis_xref.ptmx",
                       "residual_phi.ptmx",  "residual_sv.ptmx",    "gnat_a.ptmx",
                       "surrogate_phi.ptmx", "surrogate_x0.ptmx",   "surrogate_gamma.ptmx",
                       "direct_phi.ptmx",    "direct_x0.ptmx",      "direct_gamma.ptmx"};
  index["sample_ids"] = index_vector(op.sample_ids);
  json clusters;
  clusters["node_ids"] = surrogate.cluster_node_ids;
  clusters["membership"] = nested_index(surrogate.cluster_membership);
  json zero = json::array();
  for (const char z : surrogate.zero_gamma) zero.push_back(static_cast<int>(z));
  clusters["zero_gamma"] = zero;
  index["clusters"] = clusters;
  json targets;
  targets["ids"] = index_vector(surrogate.target_ids);
  targets["clusters"] = nested_index(surrogate.per_target_clusters);
  targets["direct"] = nested_index(surrogate.per_target_direct);
  index["targets"] = targets;
  index["direct_ids"] = index_vector(surrogate.direct_ids);
  json hashes = json::array();
  for (const std::uint64_t h : training_hashes) hashes.push_back(h);
  index["training_hashes"] = hashes;
  index["training_runs"] = training_runs;
  index["stats"] = stats;
  save_json((root / "index.json").string(), index);
}

OfflineBundle OfflineBundle::load(const std::string& dir) {
  const fs::path root(dir);
  const json index = load_json((root / "index.json").string());
  if (index.value("format", std::string()) != "ptrom-bundle")
    throw config_error(dir + ": not a bundle directory");

  OfflineBundle b;
  b.config = ExperimentConfig::from_json(index.at("config"));
  b.basis.phi = read_matrix((root / "basis_phi.ptmx").string()).data;
  b.basis.singular_values = read_vector(root / "basis_sv.ptmx");
  b.basis.x_ref = read_vector(root / "basis_xref.ptmx");
  b.residual.phi = read_matrix((root / "residual_phi.ptmx").string()).data;
  b.residual.singular_values = read_vector(root / "residual_sv.ptmx");
  b.residual.x_ref = VectorXd::Zero(b.residual.phi.rows());
  b.op.A = read_matrix((root / "gnat_a.ptmx").string()).data;
  b.op.sample_ids = parse_indices(index.at("sample_ids"));
  const Index n = particle_count(b.basis.dim());
  b.op.sampled_dofs.clear();
  for (const Index p : b.op.sample_ids) b.op.sampled_dofs.push_back(p);
  for (const Index p : b.op.sample_ids) b.op.sampled_dofs.push_back(p + n);

  SurrogateSourceBasis<double>& s = b.surrogate;
  s.phi_tilde = read_matrix((root / "surrogate_phi.ptmx").string()).data;
  s.x0_tilde = read_vector(root / "surrogate_x0.ptmx");
  s.gamma_tilde = read_vector(root / "surrogate_gamma.ptmx");
  s.direct_phi = read_matrix((root / "direct_phi.ptmx").string()).data;
  s.direct_x0 = read_vector(root / "direct_x0.ptmx");
  s.direct_gamma = read_vector(root / "direct_gamma.ptmx");
  const json& clusters = index.at("clusters");
  s.cluster_node_ids = clusters.at("node_ids").get<std::vector<std::int32_t>>();
  s.cluster_membership = parse_nested(clusters.at("membership"));
  s.zero_gamma.clear();
  for (const auto& z : clusters.at("zero_gamma")) s.zero_gamma.push_back(z.get<int>() != 0);
  const json& targets = index.at("targets");
  s.target_ids = parse_indices(targets.at("ids"));
  s.per_target_clusters = parse_nested(targets.at("clusters"));
  s.per_target_direct = parse_nested(targets.at("direct"));
  s.direct_ids = parse_indices(index.at("direct_ids"));

  if (index.contains("training_hashes"))
    for (const auto& h : index.at("training_hashes"))
      b.training_hashes.push_back(h.get<std::uint64_t>());
  if (index.contains("training_runs")) b.training_runs = index.at("training_runs");
  if (index.contains("stats")) b.stats = index.at("stats");
  return b;
}

}  // namespace ptrom
