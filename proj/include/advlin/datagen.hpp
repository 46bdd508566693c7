#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advlin/norms.hpp"

// Seeded scenario generators, CSV ingestion, normalization, splitting.
// Generators are bitwise deterministic given (spec, seed); independent draws
// (features, noise, ground truth, test set) come from independent named
// streams so changing one never perturbs another.

namespace advlin {

enum class scenario_kind { gaussian, latent, fourier_features, random_projection, csv_file };

struct scenario_spec {
  scenario_kind kind = scenario_kind::gaussian;
  Eigen::Index n = 60;        // training rows
  Eigen::Index p = 200;       // features
  Eigen::Index n_test = 10000;
  double sigma = 1.0;         // additive noise scale
  double r = 1.0;             // covariate scale (gaussian)
  Eigen::Index d = 1;         // latent / input dimension (latent, fourier, projection)
  double sigma_w = 0.01;      // feature-map scale (fourier)
  bool sparse_truth = false;  // 5-sparse +-1 ground truth instead of dense
  std::string path;           // csv_file
  std::string target;         // csv_file target column
  std::uint64_t seed = 0;
};

struct truth_record {
  Eigen::VectorXd beta_star;  // or theta for latent/projection
  Eigen::VectorXd eps_train;  // realized training noise
};

struct labeled_split {
  dataset train;
  dataset test;
  std::optional<truth_record> truth;
};

struct projection_split {
  labeled_split data;   // train/test designs are the projected X S^T
  Eigen::MatrixXd S;    // p x d, entries +-1
  dataset ambient_train;  // raw inputs in R^d, for solve_adv_linmap
  dataset ambient_test;
};

// x ~ N(0, r^2 I_p), y = x.b* + eps, eps ~ N(0, sigma^2).  b* is dense
// standard normal scaled to unit l2 norm, or 5-sparse +-1 when
// spec.sparse_truth is set.
labeled_split gen_gaussian(const scenario_spec& spec);

// x = W z + u with W^T W = (p/d) I_d (QR-orthogonalized, scaled), z ~ N(0,I_d),
// u ~ N(0, r^2 I_p), y = theta.z + xi, xi ~ N(0, sigma^2), theta = ones/sqrt(d).
// Requires d <= p.
labeled_split gen_latent(const scenario_spec& spec);

// Feature map x = sqrt(2/p) cos(W z + b) applied to the rows of a base
// dataset with one shared draw of W (entries N(0, sigma_w^2)) and b (uniform
// on [0, 2pi)); targets ride along unaltered.  A nonempty base is partitioned
// by a seeded permutation into spec.n training rows (clamped) and the rest
// as test.  An empty base is replaced by a synthetic one: z ~ N(0, I_d),
// y = z.theta + noise with theta = ones/sqrt(d), spec.n train and spec.n_test
// test rows, and the truth record filled in.
labeled_split gen_fourier(const scenario_spec& spec, const dataset& base);

// Ambient x ~ N(0, I_d), S Rademacher p x d, theta dense unit-l2 normal in
// R^p, y = (S x).theta + eps.  spec.d = 1 (the struct default) is read as
// the conventional ambient dimension 1000; requires p <= d.  The returned
// designs are the projected features X S^T.
projection_split gen_projection(const scenario_spec& spec);

// Headered CSV of finite reals; the named target column becomes y and the
// remaining columns become X in header order.  Malformed input (missing
// file or column, ragged row, non-numeric cell) throws std::runtime_error
// naming the offending row/column.
dataset load_csv(const std::string& path, const std::string& target_column);

struct normalize_result {
  dataset data;
  std::vector<std::string> warnings;  // constant columns left at scale 1
};

// Center columns and scale each to unit population standard deviation.
// Constant columns are centered and left at scale 1 with a warning recorded.
normalize_result normalize(const dataset& D);

// Seeded permutation split; fraction in (0,1) is the training share.
labeled_split split(const dataset& D, double fraction, std::uint64_t seed);

}  // namespace advlin
