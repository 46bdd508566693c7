#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "advlin/datagen.hpp"
#include "advlin/rng.hpp"

namespace advlin {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// all matrix fills are column major so generated bytes are reproducible from
// the documented stream order alone
MatrixXd fill_normal(rng& g, Index rows, Index cols, double scale) {
  MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = scale * g.normal();
  return M;
}

VectorXd fill_normal_vec(rng& g, Index n, double scale) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * g.normal();
  return v;
}

void check_positive(const scenario_spec& spec, bool need_test) {
  if (spec.n < 1 || spec.p < 1)
    throw std::invalid_argument("scenario requires n >= 1 and p >= 1");
  if (need_test && spec.n_test < 0)
    throw std::invalid_argument("scenario requires n_test >= 0");
  if (spec.sigma < 0.0 || spec.r < 0.0 || spec.sigma_w < 0.0)
    throw std::invalid_argument("scenario scales must be nonnegative");
}

VectorXd draw_truth(const scenario_spec& spec, Index dim) {
  rng g(spec.seed, "truth", 0);
  VectorXd b = VectorXd::Zero(dim);
  if (spec.sparse_truth) {
    const Index k = std::min<Index>(5, dim);
    std::vector<Index> picked;
    while (static_cast<Index>(picked.size()) < k) {
      const Index j = static_cast<Index>(g.below(static_cast<std::uint64_t>(dim)));
      if (std::find(picked.begin(), picked.end(), j) == picked.end())
        picked.push_back(j);
    }
    for (Index j : picked) b[j] = g.rademacher();
    return b;
  }
  b = fill_normal_vec(g, dim, 1.0);
  const double nb = b.norm();
  if (nb > 0.0) b /= nb;
  return b;
}

std::vector<Index> seeded_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  rng g(seed, "split.perm", 0);
  for (Index i = n - 1; i > 0; --i) {
    const Index j =
        static_cast<Index>(g.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace

labeled_split gen_gaussian(const scenario_spec& spec) {
  check_positive(spec, true);
  labeled_split out;

  rng gx(spec.seed, "features", 0);
  out.train.X = fill_normal(gx, spec.n, spec.p, spec.r);
  rng gt(spec.seed, "test.features", 0);
  out.test.X = fill_normal(gt, spec.n_test, spec.p, spec.r);

  truth_record truth;
  truth.beta_star = draw_truth(spec, spec.p);

  rng ge(spec.seed, "noise", 0);
  truth.eps_train = fill_normal_vec(ge, spec.n, spec.sigma);
  out.train.y = out.train.X * truth.beta_star + truth.eps_train;

  rng gte(spec.seed, "test.noise", 0);
  out.test.y =
      out.test.X * truth.beta_star + fill_normal_vec(gte, spec.n_test, spec.sigma);

  out.truth = std::move(truth);
  return out;
}

labeled_split gen_latent(const scenario_spec& spec) {
  check_positive(spec, true);
  if (spec.d < 1 || spec.d > spec.p)
    throw std::invalid_argument("gen_latent requires 1 <= d <= p");
  labeled_split out;

  rng gw(spec.seed, "latent.w", 0);
  const MatrixXd G = fill_normal(gw, spec.p, spec.d, 1.0);
  Eigen::HouseholderQR<MatrixXd> qr(G);
  const double col_scale =
      static_cast<double>(spec.p) / static_cast<double>(spec.d);
  const MatrixXd W =
      (qr.householderQ() * MatrixXd::Identity(spec.p, spec.d)) *
      std::sqrt(col_scale);
  const double ortho_err =
      (W.transpose() * W - col_scale * MatrixXd::Identity(spec.d, spec.d))
          .cwiseAbs()
          .maxCoeff();
  if (ortho_err > 1e-8)
    throw std::logic_error("gen_latent: W column orthogonality failed");

  const VectorXd theta =
      VectorXd::Constant(spec.d, 1.0 / std::sqrt(static_cast<double>(spec.d)));

  const auto make = [&](Index rows, const char* zs, const char* us,
                        const char* es, VectorXd* eps_out) {
    rng gz(spec.seed, zs, 0);
    const MatrixXd Z = fill_normal(gz, rows, spec.d, 1.0);
    rng gu(spec.seed, us, 0);
    const MatrixXd U = fill_normal(gu, rows, spec.p, spec.r);
    rng ge(spec.seed, es, 0);
    const VectorXd xi = fill_normal_vec(ge, rows, spec.sigma);
    dataset D;
    D.X = Z * W.transpose() + U;
    D.y = Z * theta + xi;
    if (eps_out) *eps_out = xi;
    return D;
  };

  truth_record truth;
  truth.beta_star = theta;
  out.train = make(spec.n, "latent.z", "latent.u", "noise", &truth.eps_train);
  out.test =
      make(spec.n_test, "test.latent.z", "test.latent.u", "test.noise", nullptr);
  out.truth = std::move(truth);
  return out;
}

labeled_split gen_fourier(const scenario_spec& spec, const dataset& base) {
  check_positive(spec, base.n() == 0);
  labeled_split out;

  dataset train_base, test_base;
  if (base.n() == 0) {
    if (spec.d < 1)
      throw std::invalid_argument("gen_fourier synthetic base requires d >= 1");
    const VectorXd theta = VectorXd::Constant(
        spec.d, 1.0 / std::sqrt(static_cast<double>(spec.d)));
    rng gz(spec.seed, "fourier.base.z", 0);
    train_base.X = fill_normal(gz, spec.n, spec.d, 1.0);
    rng ge(spec.seed, "noise", 0);
    truth_record truth;
    truth.beta_star = theta;
    truth.eps_train = fill_normal_vec(ge, spec.n, spec.sigma);
    train_base.y = train_base.X * theta + truth.eps_train;
    rng gtz(spec.seed, "test.fourier.base.z", 0);
    test_base.X = fill_normal(gtz, spec.n_test, spec.d, 1.0);
    rng gte(spec.seed, "test.noise", 0);
    test_base.y =
        test_base.X * theta + fill_normal_vec(gte, spec.n_test, spec.sigma);
    out.truth = std::move(truth);
  } else {
    const Index ntr = std::min<Index>(spec.n, base.n());
    const auto perm = seeded_permutation(base.n(), spec.seed);
    train_base.X.resize(ntr, base.p());
    train_base.y.resize(ntr);
    test_base.X.resize(base.n() - ntr, base.p());
    test_base.y.resize(base.n() - ntr);
    for (Index i = 0; i < base.n(); ++i) {
      const Index src = perm[static_cast<std::size_t>(i)];
      if (i < ntr) {
        train_base.X.row(i) = base.X.row(src);
        train_base.y[i] = base.y[src];
      } else {
        test_base.X.row(i - ntr) = base.X.row(src);
        test_base.y[i - ntr] = base.y[src];
      }
    }
  }

  const Index d = train_base.p();
  rng gw(spec.seed, "fourier.w", 0);
  const MatrixXd W = fill_normal(gw, spec.p, d, spec.sigma_w);
  rng gb(spec.seed, "fourier.b", 0);
  const double two_pi = 8.0 * std::atan(1.0);
  VectorXd b(spec.p);
  for (Index j = 0; j < spec.p; ++j) b[j] = gb.uniform(0.0, two_pi);

  const double amp = std::sqrt(2.0 / static_cast<double>(spec.p));
  const auto map = [&](const dataset& in) {
    dataset D;
    D.X = (((in.X * W.transpose()).rowwise() + b.transpose()).array().cos() *
           amp)
              .matrix();
    D.y = in.y;
    return D;
  };
  out.train = map(train_base);
  out.test = map(test_base);
  return out;
}

projection_split gen_projection(const scenario_spec& spec) {
  check_positive(spec, true);
  const Index d = spec.d == 1 ? 1000 : spec.d;
  if (spec.p > d)
    throw std::invalid_argument("gen_projection requires p <= ambient d");
  projection_split out;

  rng gs(spec.seed, "projection.s", 0);
  out.S.resize(spec.p, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < spec.p; ++i) out.S(i, j) = gs.rademacher();

  truth_record truth;
  truth.beta_star = draw_truth(spec, spec.p);

  rng gx(spec.seed, "features", 0);
  out.ambient_train.X = fill_normal(gx, spec.n, d, 1.0);
  rng ge(spec.seed, "noise", 0);
  truth.eps_train = fill_normal_vec(ge, spec.n, spec.sigma);
  out.ambient_train.y =
      out.ambient_train.X * (out.S.transpose() * truth.beta_star) +
      truth.eps_train;

  rng gtx(spec.seed, "test.features", 0);
  out.ambient_test.X = fill_normal(gtx, spec.n_test, d, 1.0);
  rng gte(spec.seed, "test.noise", 0);
  out.ambient_test.y =
      out.ambient_test.X * (out.S.transpose() * truth.beta_star) +
      fill_normal_vec(gte, spec.n_test, spec.sigma);

  out.data.train.X = out.ambient_train.X * out.S.transpose();
  out.data.train.y = out.ambient_train.y;
  out.data.test.X = out.ambient_test.X * out.S.transpose();
  out.data.test.y = out.ambient_test.y;
  out.data.truth = std::move(truth);
  return out;
}

dataset load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path);

  const auto split_line = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
        cell.pop_back();
      std::size_t start = 0;
      while (start < cell.size() && cell[start] == ' ') ++start;
      cells.push_back(cell.substr(start));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_csv: " + path + " is empty");
  const auto header = split_line(line);
  Index target = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == target_column) target = static_cast<Index>(j);
  if (target < 0)
    throw std::runtime_error("load_csv: no column named '" + target_column +
                             "' in " + path);

  const Index ncols = static_cast<Index>(header.size());
  std::vector<std::vector<double>> rows;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const auto cells = split_line(line);
    if (static_cast<Index>(cells.size()) != ncols)
      throw std::runtime_error("load_csv: row " + std::to_string(lineno) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(ncols));
    std::vector<double> vals(static_cast<std::size_t>(ncols));
    for (Index j = 0; j < ncols; ++j) {
      const std::string& cell = cells[static_cast<std::size_t>(j)];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v))
        throw std::runtime_error("load_csv: row " + std::to_string(lineno) +
                                 ", column '" +
                                 header[static_cast<std::size_t>(j)] +
                                 "': not a finite number: '" + cell + "'");
      vals[static_cast<std::size_t>(j)] = v;
    }
    rows.push_back(std::move(vals));
  }

  dataset D;
  const Index n = static_cast<Index>(rows.size());
  D.X.resize(n, ncols - 1);
  D.y.resize(n);
  for (Index i = 0; i < n; ++i) {
    Index col = 0;
    for (Index j = 0; j < ncols; ++j) {
      if (j == target)
        D.y[i] = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      else
        D.X(i, col++) =
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return D;
}

normalize_result normalize(const dataset& D) {
  if (D.n() < 2)
    throw std::invalid_argument("normalize requires at least two rows");
  normalize_result out;
  out.data.y = D.y;
  out.data.X = D.X;
  const double nd = static_cast<double>(D.n());
  for (Index j = 0; j < D.p(); ++j) {
    auto col = out.data.X.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / nd);
    const double scale = std::abs(mean) + (D.X.col(j).cwiseAbs().maxCoeff());
    if (sd <= 1e-14 * (1.0 + scale)) {
      out.warnings.push_back("column " + std::to_string(j) +
                             " is constant; left at scale 1");
    } else {
      col /= sd;
    }
  }
  return out;
}

labeled_split split(const dataset& D, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split requires 0 < fraction < 1");
  if (D.n() < 2)
    throw std::invalid_argument("split requires at least two rows");
  const Index n = D.n();
  Index ntr = static_cast<Index>(fraction * static_cast<double>(n));
  ntr = std::max<Index>(1, std::min<Index>(ntr, n - 1));
  const auto perm = seeded_permutation(n, seed);

  labeled_split out;
  out.train.X.resize(ntr, D.p());
  out.train.y.resize(ntr);
  out.test.X.resize(n - ntr, D.p());
  out.test.y.resize(n - ntr);
  for (Index i = 0; i < n; ++i) {
    const Index src = perm[static_cast<std::size_t>(i)];
    if (i < ntr) {
      out.train.X.row(i) = D.X.row(src);
      out.train.y[i] = D.y[src];
    } else {
      out.test.X.row(i - ntr) = D.X.row(src);
      out.test.y[i - ntr] = D.y[src];
    }
  }
  return out;
}

}  // namespace advlin
