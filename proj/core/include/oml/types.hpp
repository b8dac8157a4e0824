#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace oml {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// One instance: a real feature vector paired with a binary label vector.
struct Example {
  VectorXd features;  // length p
  VectorXd labels;    // length q, entries 0.0 or 1.0
};

/// An ordered multi-label dataset with fixed dimensions.
struct StreamDataset {
  std::vector<Example> examples;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  std::string name;

  Eigen::Index size() const { return static_cast<Eigen::Index>(examples.size()); }
};

/// Configuration for the latent-factor synthetic stream generator.
struct SynthConfig {
  Eigen::Index n = 2000;
  Eigen::Index p = 20;
  Eigen::Index q = 8;
  Eigen::Index latent_dim = 4;
  double noise_std = 0.5;
  double label_threshold = 0.5;
  std::uint64_t rng_seed = 1;
};

/// Throws if the dataset violates its invariants (dimension consistency,
/// binary labels, q >= 2, p >= 1, non-empty).
void validate_dataset(const StreamDataset& ds);

/// Throws ConfigError on out-of-range synthetic settings.
void validate_synth_config(const SynthConfig& cfg);

}  // namespace oml
