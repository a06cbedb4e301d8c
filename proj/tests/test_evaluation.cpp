#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "bsts/evaluation.hpp"

using namespace bsts;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  return out;
}

}  // namespace

TEST_CASE("metric examples") {
  CHECK(smape(vec({3, 4}), vec({3, 4})) == 0.0);
  CHECK(smape(vec({100, 200}), vec({110, 190})) == doctest::Approx(50.0 * (10.0 / 105.0 + 10.0 / 195.0)));
  CHECK(smape(vec({1}), vec({-1})) == 200.0);
  CHECK_THROWS_AS(smape(vec({0, 1}), vec({0, 1})), std::invalid_argument);
  CHECK_THROWS_AS(smape(vec({1, 2}), vec({1})), std::invalid_argument);

  const Eigen::VectorXd y = vec({4, 5, 6});
  const Eigen::VectorXd f = y - vec({1, -1, 2});
  CHECK(mae(y, y) == 0.0);
  CHECK(mae(y, f) == doctest::Approx(4.0 / 3.0));
  CHECK(mae(vec({0}), vec({5})) == 5.0);
  CHECK(mse(y, y) == 0.0);
  CHECK(mse(y, f) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mae(Eigen::VectorXd(), Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("metric scaling and permutation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 5.0);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXd y(12), f(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
      y[i] = u(rng);
      f[i] = u(rng);
    }
    const double c = u(rng);
    CHECK(mae(c * y, c * f) == doctest::Approx(c * mae(y, f)).epsilon(1e-12));
    CHECK(mse(-c * y, -c * f) == doctest::Approx(c * c * mse(y, f)).epsilon(1e-12));
    CHECK(smape(c * y, c * f) == doctest::Approx(smape(y, f)).epsilon(1e-12));
    std::vector<int> idx(12);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    Eigen::VectorXd yp(12), fp(12);
    for (int i = 0; i < 12; ++i) {
      yp[i] = y[idx[i]];
      fp[i] = f[idx[i]];
    }
    CHECK(mae(yp, fp) == doctest::Approx(mae(y, f)).epsilon(1e-12));
    CHECK(mse(yp, fp) == doctest::Approx(mse(y, f)).epsilon(1e-12));
    CHECK(smape(yp, fp) == doctest::Approx(smape(y, f)).epsilon(1e-12));
  }
}

TEST_CASE("scoring skips burn-in points and missing actuals") {
  Eigen::VectorXd y = vec({9, 1, 2, 3, 4});
  y[2] = kMissing;
  const Eigen::VectorXd f = vec({0, 2, 100, 3, 5});
  const auto row = score("x", y, f, 1);
  CHECK(row.ok);
  CHECK(row.mae == doctest::Approx(2.0 / 3.0));
  CHECK(row.mse == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("canonical labels and report format") {
  CHECK(canonical_labels() == std::vector<std::string>{"LL", "LLTI", "LLTV", "LLT", "LLTTI", "LLTTV"});
  CHECK(AccuracyReport::header() == std::vector<std::string>{"Model", "Label", "sMAPE", "MAE", "MSE"});
  CHECK_THROWS_AS(canonical_spec("LTTI", Eigen::MatrixXd::Ones(5, 1), {"x"}, {}), std::invalid_argument);

  CHECK(select_dynamic_columns(vec({0.2, 0.7, 0.5, 0.1})) == std::vector<int>{1, 2});
  CHECK(select_dynamic_columns(vec({0.2, 0.3})) == std::vector<int>{1});

  AccuracyReport r;
  r.rows.push_back({"LL", "Local level", 1.5, 0.25, 0.125, true, ""});
  r.rows.push_back({"LLT", "Local linear trend", 0, 0, 0, false, "diverged"});
  std::ostringstream csv;
  r.write_csv(csv);
  CHECK(csv.str() == "Model,Label,sMAPE,MAE,MSE\nLocal level,LL,1.5,0.25,0.125\nLocal linear trend,LLT,NA,NA,NA\n");
}

TEST_CASE("noiseless trend is predicted exactly by the matching spec") {
  const Eigen::Index n = 100;
  Eigen::VectorXd y(n);
  for (Eigen::Index t = 0; t < n; ++t) y[t] = 3.0 + 0.5 * static_cast<double>(t);
  McmcConfig config;
  config.iterations = 300;
  const auto report = compare_models(y, {{"LLT", {LocalLinearTrend{}}, ""}}, config);
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows[0];
  MESSAGE("smape " << row.smape << " mae " << row.mae << " mse " << row.mse);
  CHECK(row.ok);
  CHECK(row.smape <= 1e-6);
  CHECK(row.mae <= 1e-6);
  CHECK(row.mse <= 1e-6);
}

TEST_CASE("draw-average and posterior-mean predictions agree on a settled fit") {
  std::mt19937_64 rng(5);
  const Eigen::Index n = 120;
  Eigen::VectorXd y(n);
  double level = 0.0;
  const Eigen::MatrixXd e = normal_matrix(n, 2, rng);
  for (Eigen::Index t = 0; t < n; ++t) y[t] = (level += 0.3 * e(t, 0)) + e(t, 1);
  const auto model = assemble({LocalLevel{}}, n);
  McmcConfig config;
  config.iterations = 200;
  const auto draws = run_gibbs(model, y, default_priors(model, y), config);
  const Eigen::VectorXd a = one_step_ahead(draws, y, OsaMethod::PosteriorMean);
  const Eigen::VectorXd b = one_step_ahead(draws, y, OsaMethod::DrawAverage);
  CHECK((a - b).tail(n - 1).cwiseAbs().maxCoeff() < 0.2);
  CHECK(std::abs(mse(y.tail(n - 5), a.tail(n - 5)) - mse(y.tail(n - 5), b.tail(n - 5))) < 0.05);
}

TEST_CASE("compare keeps failed fits in the report") {
  const Eigen::Index n = 40;
  std::mt19937_64 rng(1);
  const Eigen::VectorXd y = normal_matrix(n, 1, rng);
  McmcConfig config;
  config.iterations = 60;
  const std::vector<NamedSpec> specs{{"good", {LocalLevel{}}, "fine"},
                                     {"bad", {LocalLevel{}, Seasonal{30}}, "period too long"},
                                     {"also", {LocalLinearTrend{}}, ""}};
  const auto report = compare_models(y, specs, config);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].ok);
  CHECK_FALSE(report.rows[1].ok);
  CHECK(report.rows[1].error.find("bad") != std::string::npos);
  CHECK(report.rows[2].ok);
  CHECK(report.rows[2].label == "also");
}

TEST_CASE("six canonical specs, generating spec wins") {
  const Eigen::Index n = 500, k = 3;
  std::mt19937_64 rng(2025);
  const Eigen::MatrixXd X = normal_matrix(n, k, rng);
  const Eigen::MatrixXd e = normal_matrix(n, 3, rng);
  Eigen::VectorXd y(n);
  double level = 0.0, slope = 0.05;
  for (Eigen::Index t = 0; t < n; ++t) {
    y[t] = level + 2.0 * X(t, 0) - 1.5 * X(t, 1) + 0.5 * e(t, 2);
    level += slope + 0.1 * e(t, 0);
    slope += 0.05 * e(t, 1);
  }
  McmcConfig config;
  config.iterations = 400;
  config.seed = 3;
  const auto report = compare_canonical(y, X, {"x1", "x2", "x3"}, config);
  REQUIRE(report.rows.size() == 6);
  std::size_t best = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(report.rows[i].label == canonical_labels()[i]);
    CHECK(report.rows[i].ok);
    CHECK(report.rows[i].smape >= 0.0);
    if (report.rows[i].mse < report.rows[best].mse) best = i;
    MESSAGE(report.rows[i].label << " mse " << report.rows[i].mse);
  }
  CHECK(report.rows[best].label == "LLTTI");
}
