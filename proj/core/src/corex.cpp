#include "pumpwatch/corex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pumpwatch/error.hpp"
#include "pumpwatch/rng.hpp"

namespace pumpwatch::corex {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRidge = 1e-6;

// Applies A = (X^T X / n + eps I) / (1 + eps) without forming the m x m matrix.
struct Problem {
  MatrixXd x;  // n x m, standardized
  double log_det_a = 0.0;

  MatrixXd apply(const MatrixXd& v) const {
    const double n = static_cast<double>(x.rows());
    return (x.transpose() * (x * v) / n + kRidge * v) / (1.0 + kRidge);
  }

  void compute_log_det() {
    const auto n = x.rows();
    const auto m = x.cols();
    const double nn = static_cast<double>(n);
    VectorXd eig;
    if (m <= n) {
      eig = Eigen::SelfAdjointEigenSolver<MatrixXd>(x.transpose() * x / nn, Eigen::EigenvaluesOnly).eigenvalues();
    } else {
      // The m - n missing eigenvalues of X^T X are zero.
      VectorXd gram = Eigen::SelfAdjointEigenSolver<MatrixXd>(x * x.transpose() / nn, Eigen::EigenvaluesOnly)
                          .eigenvalues();
      eig = VectorXd::Zero(m);
      eig.head(n) = gram;
    }
    log_det_a = 0.0;
    for (Eigen::Index i = 0; i < eig.size(); ++i) {
      log_det_a += std::log((std::max(eig[i], 0.0) + kRidge) / (1.0 + kRidge));
    }
  }

  // Returns +inf when the point is outside the domain.
  double evaluate(const MatrixXd& w, MatrixXd* gradient) const {
    const auto k = w.cols();
    const MatrixXd c = apply(w);
    const MatrixXd s = w.transpose() * c + MatrixXd::Identity(k, k);
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const MatrixXd g = llt.solve(MatrixXd::Identity(k, k));
    const MatrixXd cg = c * g;
    const VectorXd q = VectorXd::Ones(c.rows()) - cg.cwiseProduct(c).rowwise().sum();
    if ((q.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    const VectorXd s_diag = s.diagonal();
    const double value = 0.5 * s_diag.array().log().sum() + 0.5 * q.array().log().sum() - 0.5 * log_det_a;
    if (gradient) {
      const MatrixXd dcg = q.cwiseInverse().asDiagonal() * cg;
      *gradient = c * s_diag.cwiseInverse().asDiagonal();
      *gradient -= apply(dcg);
      *gradient += c * (cg.transpose() * dcg);
    }
    return value;
  }
};

void check_standardizable(std::size_t n, std::size_t m) {
  if (n < 2 || m < 2) throw ValidationError("corex needs at least 2 samples and 2 variables");
}

CorexModel optimize(Problem problem, std::vector<std::string> variables, std::vector<std::string> dropped,
                    const CorexParams& params) {
  if (params.k < 1) throw ValidationError("corex: k must be positive");
  if (params.max_iterations < 0) throw ValidationError("corex: max_iterations must be nonnegative");
  if (!(params.learning_rate > 0.0)) throw ValidationError("corex: learning rate must be positive");

  CorexModel model;
  model.variables = std::move(variables);
  model.dropped = std::move(dropped);
  model.seed = params.seed;
  const auto m = static_cast<std::size_t>(problem.x.cols());
  model.k = params.k;
  if (model.k > m) {
    model.warnings.push_back("k=" + std::to_string(params.k) + " exceeds the " + std::to_string(m) +
                             " variables; using k=" + std::to_string(m));
    model.k = m;
  }
  if (!model.dropped.empty()) {
    model.warnings.push_back("dropped " + std::to_string(model.dropped.size()) + " zero-variance columns");
  }
  problem.compute_log_det();
  model.data_tc = -0.5 * problem.log_det_a;

  // W = 0 is a stationary point, so start from a small random matrix.
  Rng rng(derive_seed(params.seed, "corex-init"));
  MatrixXd w(m, model.k);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = params.init_scale * rng.normal();
  }

  MatrixXd grad;
  double value = problem.evaluate(w, &grad);
  if (!std::isfinite(value)) throw DataError("corex: non-finite objective at the initial point");
  model.objective_trace.push_back(value);

  double step = params.learning_rate;
  MatrixXd trial_grad;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const double g2 = grad.squaredNorm();
    if (g2 < 1e-24) break;
    bool accepted = false;
    MatrixXd trial;
    double trial_value = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      trial = w - step * grad;
      trial_value = problem.evaluate(trial, &trial_grad);
      if (std::isfinite(trial_value) && trial_value <= value - 1e-4 * step * g2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double gain = value - trial_value;
    w = std::move(trial);
    grad.swap(trial_grad);
    value = trial_value;
    model.objective_trace.push_back(value);
    step *= 2.0;
    if (gain <= params.tolerance * std::max(1.0, std::abs(value))) break;
  }
  if (!w.allFinite()) throw DataError("corex: non-finite weights");

  model.weights.resize(m * model.k);
  Eigen::Map<RowMatrix>(model.weights.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(model.k)) = w;
  return model;
}

}  // namespace

double gaussian_total_correlation(std::span<const double> correlation, std::size_t dim) {
  if (dim == 0 || correlation.size() != dim * dim) throw ValidationError("correlation matrix must be square");
  Eigen::Map<const RowMatrix> r(correlation.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::abs(r(i, i) - 1.0) > 1e-9) throw ValidationError("correlation matrix needs a unit diagonal");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(r(i, j) - r(j, i)) > 1e-9) throw ValidationError("correlation matrix must be symmetric");
    }
  }
  Eigen::LLT<MatrixXd> llt{MatrixXd(r)};
  if (llt.info() != Eigen::Success) throw ValidationError("correlation matrix is not positive definite");
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  // det R <= 1 for any correlation matrix (Hadamard), so TC >= 0.
  return std::max(0.0, -0.5 * log_det);
}

std::vector<double> correlation_matrix(std::span<const double> samples, std::size_t n, std::size_t m) {
  if (samples.size() != n * m) throw ValidationError("sample matrix size mismatch");
  check_standardizable(n, m);
  Eigen::Map<const RowMatrix> x(samples.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  MatrixXd centered = x.rowwise() - x.colwise().mean();
  const VectorXd sd = (centered.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt();
  for (Eigen::Index j = 0; j < sd.size(); ++j) {
    if (!(sd[j] > 0.0)) throw ValidationError("column " + std::to_string(j) + " has zero variance");
  }
  centered = centered * sd.cwiseInverse().asDiagonal();
  MatrixXd r = centered.transpose() * centered / static_cast<double>(n);
  r.diagonal().setOnes();
  std::vector<double> out(m * m);
  Eigen::Map<RowMatrix>(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) = r;
  return out;
}

CorexModel linear_corex(std::span<const double> samples, std::size_t n, std::span<const std::string> names,
                        const CorexParams& params) {
  const std::size_t m_in = names.size();
  if (samples.size() != n * m_in) throw ValidationError("sample matrix size mismatch");
  check_standardizable(n, m_in);
  Eigen::Map<const RowMatrix> raw(samples.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m_in));
  const double nn = static_cast<double>(n);

  std::vector<Eigen::Index> keep;
  std::vector<std::string> kept_names;
  std::vector<std::string> dropped;
  VectorXd mean = raw.colwise().mean();
  VectorXd sd(m_in);
  for (std::size_t j = 0; j < m_in; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    sd[jj] = std::sqrt((raw.col(jj).array() - mean[jj]).square().sum() / nn);
    if (sd[jj] > 1e-12 * std::max(1.0, std::abs(mean[jj]))) {
      keep.push_back(jj);
      kept_names.push_back(names[j]);
    } else {
      dropped.push_back(names[j]);
    }
  }
  if (keep.size() < 2) throw DataError("corex: fewer than 2 columns with nonzero variance");

  Problem problem;
  problem.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    const auto src = keep[j];
    problem.x.col(static_cast<Eigen::Index>(j)) = (raw.col(src).array() - mean[src]) / sd[src];
  }
  return optimize(std::move(problem), std::move(kept_names), std::move(dropped), params);
}

CorexModel linear_corex(const graph::AffiliationMatrix& matrix, const CorexParams& params) {
  return linear_corex(matrix.dense(), matrix.row_count(), matrix.col_ids, params);
}

double corex_objective(std::span<const double> standardized, std::size_t n, std::size_t m,
                       std::span<const double> weights, std::size_t k, std::vector<double>* gradient) {
  if (standardized.size() != n * m || weights.size() != m * k) throw ValidationError("corex_objective: size mismatch");
  Problem problem;
  problem.x = Eigen::Map<const RowMatrix>(standardized.data(), static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(m));
  problem.compute_log_det();
  const MatrixXd w = Eigen::Map<const RowMatrix>(weights.data(), static_cast<Eigen::Index>(m),
                                                 static_cast<Eigen::Index>(k));
  MatrixXd grad;
  const double value = problem.evaluate(w, gradient ? &grad : nullptr);
  if (gradient) {
    gradient->resize(m * k);
    Eigen::Map<RowMatrix>(gradient->data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = grad;
  }
  return value;
}

void write_corex(std::ostream& out, const CorexModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "pumpwatch-corex";
  j["version"] = 1;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["variables"] = model.variables;
  j["dropped"] = model.dropped;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.variables.size(); ++i) {
    auto r = model.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["weights"] = std::move(rows);
  j["objective_trace"] = model.objective_trace;
  j["data_tc"] = model.data_tc;
  out << j.dump(1) << '\n';
}

CorexModel read_corex(std::istream& in, std::string_view source) {
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("format") != "pumpwatch-corex") throw DataError(std::string(source) + ": not a corex model");
    if (j.at("version") != 1) throw DataError(std::string(source) + ": unsupported corex model version");
    CorexModel model;
    model.k = j.at("k").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    model.variables = j.at("variables").get<std::vector<std::string>>();
    model.dropped = j.at("dropped").get<std::vector<std::string>>();
    const auto& rows = j.at("weights");
    if (rows.size() != model.variables.size()) throw DataError(std::string(source) + ": weight rows != variables");
    for (const auto& r : rows) {
      auto v = r.get<std::vector<double>>();
      if (v.size() != model.k) throw DataError(std::string(source) + ": weight row length != k");
      model.weights.insert(model.weights.end(), v.begin(), v.end());
    }
    model.objective_trace = j.at("objective_trace").get<std::vector<double>>();
    model.data_tc = j.at("data_tc").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
}

void save_corex(const std::filesystem::path& path, const CorexModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_corex(out, model);
}

CorexModel load_corex(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_corex(in, path.string());
}

}  // namespace pumpwatch::corex
