#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "pumpwatch/botwatch.hpp"
#include "pumpwatch/corex.hpp"
#include "pumpwatch/error.hpp"

using namespace pumpwatch;
using namespace pumpwatch::corex;

namespace {

// n samples of a bivariate normal with correlation rho.
std::vector<double> correlated_pair(std::size_t n, double rho, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.normal();
    const double b = rho * a + std::sqrt(1 - rho * rho) * rng.normal();
    out.push_back(a);
    out.push_back(b);
  }
  return out;
}

std::vector<double> standardize(std::vector<double> x, std::size_t n, std::size_t m) {
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i * m + j];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) var += (x[i * m + j] - mean) * (x[i * m + j] - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i * m + j] = (x[i * m + j] - mean) / sd;
  }
  return x;
}

const std::vector<std::string> kPair = {"x", "y"};

}  // namespace

TEST_SUITE("corex") {
  TEST_CASE("gaussian total correlation closed form") {
    const std::vector<double> identity = {1, 0, 0, 1};
    CHECK(gaussian_total_correlation(identity, 2) == 0.0);
    for (double rho : {0.1, 0.5, 0.9, -0.7}) {
      const std::vector<double> r = {1, rho, rho, 1};
      CHECK(gaussian_total_correlation(r, 2) == doctest::Approx(-0.5 * std::log(1 - rho * rho)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(gaussian_total_correlation(std::vector<double>{1, 2, 2, 1}, 2), ValidationError);
    CHECK_THROWS_AS(gaussian_total_correlation(std::vector<double>{1, 0.5, 0.4, 1}, 2), ValidationError);
    CHECK_THROWS_AS(gaussian_total_correlation(std::vector<double>{2, 0, 0, 1}, 2), ValidationError);
    CHECK_THROWS_AS(gaussian_total_correlation(std::vector<double>{1, 0}, 2), ValidationError);
  }

  TEST_CASE("correlation matrix of samples") {
    const std::vector<double> s = {1, 2, 2, 4, 3, 6, 4, 8.5};
    const auto r = correlation_matrix(s, 4, 2);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(r[2]));
    CHECK(r[1] > 0.99);
    CHECK_THROWS_AS(correlation_matrix(std::vector<double>{1, 2, 1, 3}, 2, 2), ValidationError);
  }

  TEST_CASE("sample TC approaches the closed form") {
    for (double tc : {0.5, 1.0, 2.0}) {
      const double rho = std::sqrt(1 - std::exp(-2 * tc));
      const auto x = correlated_pair(10000, rho, 31);
      const auto model = linear_corex(x, 10000, kPair, {.k = 1, .max_iterations = 50});
      CHECK(std::abs(model.data_tc - tc) / tc <= 0.02);
    }
  }

  TEST_CASE("analytic gradient matches finite differences") {
    const auto blocks = fixtures::planted_blocks(200, 3, 0.8, 4);
    const std::size_t n = 200, m = 6, k = 2;
    const auto z = standardize(blocks.samples, n, m);
    Rng rng(6);
    std::vector<double> w(m * k);
    for (auto& v : w) v = 0.3 * rng.normal();
    std::vector<double> grad;
    corex_objective(z, n, m, w, k, &grad);
    REQUIRE(grad.size() == m * k);
    const double h = 1e-6;
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto up = w, down = w;
      up[i] += h;
      down[i] -= h;
      const double fd = (corex_objective(z, n, m, up, k, nullptr) - corex_objective(z, n, m, down, k, nullptr)) / (2 * h);
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  TEST_CASE("property: objective trace never increases") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto blocks = fixtures::planted_blocks(150, 4, 0.5 + 0.1 * static_cast<double>(seed), seed);
      const auto model = linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 3, .seed = seed});
      REQUIRE(model.objective_trace.size() >= 2);
      for (std::size_t i = 1; i < model.objective_trace.size(); ++i) {
        CHECK(model.objective_trace[i] <= model.objective_trace[i - 1]);
      }
      CHECK(model.objective() < model.objective_trace.front());
    }
  }

  TEST_CASE("planted blocks are recovered") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto blocks = fixtures::planted_blocks(500, 5, 0.7, 100 + seed);
      const auto model = linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 2, .seed = seed});
      CHECK(fixtures::block_purity(bots::cluster_users(model)) >= 0.9);
    }
  }

  TEST_CASE("same seed gives the same model") {
    const auto blocks = fixtures::planted_blocks(100, 3, 0.5, 1);
    const auto a = linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 2, .seed = 4});
    const auto b = linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 2, .seed = 4});
    CHECK(a.weights == b.weights);
    CHECK(a.objective_trace == b.objective_trace);
  }

  TEST_CASE("zero-variance columns are dropped and k is clamped") {
    auto blocks = fixtures::planted_blocks(50, 2, 0.5, 3);
    std::vector<double> with_const;
    for (std::size_t i = 0; i < blocks.n; ++i) {
      for (std::size_t j = 0; j < 4; ++j) with_const.push_back(blocks.samples[i * 4 + j]);
      with_const.push_back(1.0);
    }
    auto names = blocks.names;
    names.push_back("flat");
    const auto model = linear_corex(with_const, blocks.n, names, {.k = 9});
    CHECK(model.dropped == std::vector<std::string>{"flat"});
    CHECK(model.variables.size() == 4);
    CHECK(model.k == 4);
    CHECK(model.warnings.size() == 2);
    CHECK(model.weights.size() == 16);

    const std::vector<double> all_flat = {1, 2, 1, 2, 1, 2};
    CHECK_THROWS_AS(linear_corex(all_flat, 3, kPair), DataError);
    CHECK_THROWS_AS(linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 0}), ValidationError);
  }

  TEST_CASE("affiliation matrix input uses users as variables") {
    graph::AffiliationMatrix m;
    m.row_ids = {"p1", "p2", "p3"};
    m.col_ids = {"u1", "u2", "u3"};
    m.rows = {{{0, 1}, {1, 1}}, {{0, 2}, {1, 2}, {2, 1}}, {{2, 3}}};
    const auto model = linear_corex(m, {.k = 2});
    CHECK(model.variables == m.col_ids);
  }

  TEST_CASE("model round-trips through JSON") {
    const auto blocks = fixtures::planted_blocks(60, 2, 0.5, 9);
    const auto model = linear_corex(blocks.samples, blocks.n, blocks.names, {.k = 2, .seed = 12});
    std::stringstream io;
    write_corex(io, model);
    const auto back = read_corex(io);
    CHECK(back.variables == model.variables);
    CHECK(back.k == model.k);
    CHECK(back.weights == model.weights);
    CHECK(back.seed == model.seed);
    std::istringstream bad(R"({"format":"other","version":1})");
    CHECK_THROWS_AS(read_corex(bad), DataError);
  }
}
