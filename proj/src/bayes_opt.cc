/* Copyright 2026 The memplan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <array>
#include <cmath>
#include <random>

#include "memplan/autoswap.h"

namespace memplan {
namespace {

constexpr int kDim = 4;
using Point = std::array<double, kDim>;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Point random_point(std::mt19937_64& rng) {
  Point p;
  for (double& x : p) x = 2.0 * unit_uniform(rng) - 1.0;
  return p;
}

ScoreWeights to_weights(const Point& p) { return {p[0], p[1], p[2], p[3]}; }

// Squared-exponential kernel on the unit cube image of [-1, 1]^4.
double kernel(const Point& a, const Point& b, double length_scale) {
  double d2 = 0;
  for (int k = 0; k < kDim; ++k) {
    const double d = (a[k] - b[k]) / 2.0;
    d2 += d * d;
  }
  return std::exp(-0.5 * d2 / (length_scale * length_scale));
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

class GaussianProcess {
 public:
  GaussianProcess(const std::vector<Point>& xs, const std::vector<double>& ys,
                  double length_scale, double noise)
      : xs_(xs), length_scale_(length_scale) {
    const int n = static_cast<int>(xs.size());
    double mean = 0;
    for (double y : ys) mean += y;
    mean /= n;
    double var = 0;
    for (double y : ys) var += (y - mean) * (y - mean);
    var /= n;
    mean_ = mean;
    scale_ = var > 0 ? std::sqrt(var) : 1.0;

    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k(i, j) = kernel(xs[i], xs[j], length_scale);
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = (ys[i] - mean_) / scale_;

    double jitter = noise;
    for (;;) {
      llt_.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
      if (llt_.info() == Eigen::Success) break;
      jitter *= 10;
    }
    alpha_ = llt_.solve(y);
    best_ = y.minCoeff();
  }

  // Expected improvement (minimisation) in standardized units.
  double expected_improvement(const Point& x) const {
    const int n = static_cast<int>(xs_.size());
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i) ks(i) = kernel(x, xs_[i], length_scale_);
    const double mu = ks.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(ks);
    const double var = std::max(1.0 - v.squaredNorm(), 1e-12);
    const double sigma = std::sqrt(var);
    const double z = (best_ - mu) / sigma;
    return (best_ - mu) * normal_cdf(z) + sigma * normal_pdf(z);
  }

 private:
  std::vector<Point> xs_;
  double length_scale_;
  double mean_ = 0;
  double scale_ = 1;
  double best_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

}  // namespace

WeightSearchResult optimize_weights(
    const std::function<double(const ScoreWeights&)>& evaluator,
    const WeightSearchOptions& options) {
  std::mt19937_64 rng(options.seed);
  std::vector<Point> xs;
  std::vector<double> ys;
  WeightSearchResult result;
  bool have_best = false;

  auto evaluate = [&](const Point& p) {
    const ScoreWeights w = to_weights(p);
    const double y = evaluator(w);
    xs.push_back(p);
    ys.push_back(y);
    result.history.emplace_back(w, y);
    if (!have_best || y < result.best_overhead_us) {
      have_best = true;
      result.best_overhead_us = y;
      result.weights = w;
    }
  };

  std::vector<Point> initial;
  if (options.seed_pure_corners) {
    for (int k = 0; k < kDim; ++k) {
      Point p{};
      p[k] = 1.0;
      initial.push_back(p);
    }
  }
  for (int i = 0; i < options.initial_points; ++i) {
    initial.push_back(random_point(rng));
  }
  for (const Point& p : initial) {
    if (static_cast<int>(xs.size()) >= options.budget) break;
    evaluate(p);
  }

  while (static_cast<int>(xs.size()) < options.budget) {
    const GaussianProcess gp(xs, ys, options.length_scale, options.noise);
    Point best_point = random_point(rng);
    double best_ei = gp.expected_improvement(best_point);
    for (int s = 1; s < options.acquisition_samples; ++s) {
      const Point p = random_point(rng);
      const double ei = gp.expected_improvement(p);
      if (ei > best_ei) {
        best_ei = ei;
        best_point = p;
      }
    }
    evaluate(best_point);
  }
  return result;
}

}  // namespace memplan
