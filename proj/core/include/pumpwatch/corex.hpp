#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pumpwatch/graph.hpp"

namespace pumpwatch::corex {

// Total correlation of a Gaussian vector with the given correlation matrix
// (row-major, dim x dim): -1/2 ln det R. Throws ValidationError unless R is
// square, symmetric with unit diagonal and positive definite.
double gaussian_total_correlation(std::span<const double> correlation, std::size_t dim);

// Pearson correlation matrix of row-major samples (n x m), row-major m x m.
// Zero-variance columns are rejected.
std::vector<double> correlation_matrix(std::span<const double> samples, std::size_t n, std::size_t m);

struct CorexParams {
  std::size_t k = 24;
  int max_iterations = 300;
  double learning_rate = 1.0;  // first trial step of the line search
  double tolerance = 1e-8;     // relative objective change that ends the run
  double init_scale = 0.1;
  std::uint64_t seed = 0;
};

// Linear Gaussian latent factors Y = X W + E with E ~ N(0, I) over the
// standardized columns of X. The objective TC(X|Y) + TC(Y) is minimized by
// gradient descent with Armijo backtracking, so objective_trace never
// increases.
struct CorexModel {
  std::vector<std::string> variables;  // kept columns, in input order
  std::vector<std::string> dropped;    // zero-variance columns
  std::size_t k = 0;
  std::vector<double> weights;  // variables.size() x k, row-major
  std::vector<double> objective_trace;
  double data_tc = 0.0;  // TC(X) of the (ridged) correlation matrix
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::span<const double> row(std::size_t variable) const {
    return std::span<const double>(weights).subspan(variable * k, k);
  }
  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

// Rows are samples, columns are variables named by `names`.
CorexModel linear_corex(std::span<const double> samples, std::size_t n, std::span<const std::string> names,
                        const CorexParams& params = {});

// Users are the variables, pump attempts the samples.
CorexModel linear_corex(const graph::AffiliationMatrix& matrix, const CorexParams& params = {});

// Objective and gradient at `weights` for standardized data; exposed for
// gradient checks. `gradient` is resized to match `weights`.
double corex_objective(std::span<const double> standardized, std::size_t n, std::size_t m,
                       std::span<const double> weights, std::size_t k, std::vector<double>* gradient);

void write_corex(std::ostream& out, const CorexModel& model);
CorexModel read_corex(std::istream& in, std::string_view source = "corex");
void save_corex(const std::filesystem::path& path, const CorexModel& model);
CorexModel load_corex(const std::filesystem::path& path);

}  // namespace pumpwatch::corex
