#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptrom/experiment.hpp"
#include "ptrom/io.hpp"
#include "ptrom/reduction.hpp"

namespace ptrom {

// Everything the online stage needs, persisted as binary matrices plus a JSON
// index.  Directory layout is flat; `index.json` names every matrix file.
struct OfflineBundle {
  ExperimentConfig config;
  PODBasis<double> basis;     // state space
  PODBasis<double> residual;  // residual space, x_ref is all zeros
  GnatOperator<double> op;
  SurrogateSourceBasis<double> surrogate;  // targets are op.sample_ids
  std::vector<std::uint64_t> training_hashes;
  json training_runs = json::array();
  json stats;

  void save(const std::string& dir) const;
  static OfflineBundle load(const std::string& dir);
};

}  // namespace ptrom
