#include "pcr/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcr {
namespace {

void check_dims(std::initializer_list<Vec> vectors) {
  const auto dim = vectors.begin()->size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw ObjectiveError("embedding dimension mismatch: " + std::to_string(dim) + " vs " +
                           std::to_string(v.size()));
    }
  }
}

double hinge(double x) { return x > 0.0 ? x : 0.0; }

// Adds scale * d|a - b|/da to grad_a and its negation to grad_b.
void add_distance_grad(Vec a, Vec b, double distance, double scale, double epsilon,
                       std::vector<double>& grad_a, std::vector<double>& grad_b) {
  const double denom = std::max(distance, epsilon);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double g = scale * (a[i] - b[i]) / denom;
    grad_a[i] += g;
    grad_b[i] -= g;
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!(margin >= 0.0)) throw ObjectiveError("margin must be non-negative");
  if (!(epsilon > 0.0)) throw ObjectiveError("epsilon must be positive");
}

double l2_distance(Vec a, Vec b) {
  check_dims({a, b});
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double triplet_loss(Vec query, Vec positive, Vec negative, const LossConfig& cfg) {
  check_dims({query, positive, negative});
  return hinge(l2_distance(query, positive) - l2_distance(query, negative) + cfg.margin);
}

double quadruplet_loss(Vec query, Vec positive1, Vec positive2, Vec negative,
                       const LossConfig& cfg) {
  check_dims({query, positive1, positive2, negative});
  const double d_q1 = l2_distance(query, positive1);
  const double d_q2 = l2_distance(query, positive2);
  const double d_qn = l2_distance(query, negative);
  const double d_12 = l2_distance(positive1, positive2);
  const double d_1n = l2_distance(positive1, negative);
  const double d_2n = l2_distance(positive2, negative);
  const double m = cfg.margin;
  // pairwise grouping keeps the sum bit-identical when the positives swap
  return (hinge(d_q1 - d_qn + m) + hinge(d_q2 - d_qn + m)) +
         (hinge(d_12 - d_1n + m) + hinge(d_12 - d_2n + m));
}

TripletGrad triplet_grad(Vec query, Vec positive, Vec negative, const LossConfig& cfg) {
  check_dims({query, positive, negative});
  const auto dim = query.size();
  TripletGrad g{std::vector<double>(dim), std::vector<double>(dim), std::vector<double>(dim)};
  const double d_qp = l2_distance(query, positive);
  const double d_qn = l2_distance(query, negative);
  if (d_qp - d_qn + cfg.margin > 0.0) {
    add_distance_grad(query, positive, d_qp, 1.0, cfg.epsilon, g.query, g.positive);
    add_distance_grad(query, negative, d_qn, -1.0, cfg.epsilon, g.query, g.negative);
  }
  return g;
}

QuadrupletGrad quadruplet_grad(Vec query, Vec positive1, Vec positive2, Vec negative,
                               const LossConfig& cfg) {
  check_dims({query, positive1, positive2, negative});
  const auto dim = query.size();
  QuadrupletGrad g{std::vector<double>(dim), std::vector<double>(dim), std::vector<double>(dim),
                   std::vector<double>(dim)};
  const double d_q1 = l2_distance(query, positive1);
  const double d_q2 = l2_distance(query, positive2);
  const double d_qn = l2_distance(query, negative);
  const double d_12 = l2_distance(positive1, positive2);
  const double d_1n = l2_distance(positive1, negative);
  const double d_2n = l2_distance(positive2, negative);
  const double m = cfg.margin;
  const double eps = cfg.epsilon;

  if (d_q1 - d_qn + m > 0.0) {
    add_distance_grad(query, positive1, d_q1, 1.0, eps, g.query, g.positive1);
    add_distance_grad(query, negative, d_qn, -1.0, eps, g.query, g.negative);
  }
  if (d_q2 - d_qn + m > 0.0) {
    add_distance_grad(query, positive2, d_q2, 1.0, eps, g.query, g.positive2);
    add_distance_grad(query, negative, d_qn, -1.0, eps, g.query, g.negative);
  }
  if (d_12 - d_1n + m > 0.0) {
    add_distance_grad(positive1, positive2, d_12, 1.0, eps, g.positive1, g.positive2);
    add_distance_grad(positive1, negative, d_1n, -1.0, eps, g.positive1, g.negative);
  }
  if (d_12 - d_2n + m > 0.0) {
    add_distance_grad(positive1, positive2, d_12, 1.0, eps, g.positive1, g.positive2);
    add_distance_grad(positive2, negative, d_2n, -1.0, eps, g.positive2, g.negative);
  }
  return g;
}

}  // namespace pcr
