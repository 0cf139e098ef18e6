#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace pcr {

class ObjectiveError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LossConfig {
  double margin = 0.5;
  double epsilon = 1e-12;  // floor on distances inside gradients

  void validate() const;
};

using Vec = std::span<const double>;

double l2_distance(Vec a, Vec b);

// max(0, |q - p| - |q - n| + m)
double triplet_loss(Vec query, Vec positive, Vec negative, const LossConfig& cfg = {});

// Sum over i in {1,2} of
//   max(0, |q - p_i| - |q - n| + m)  +  max(0, |p_1 - p_2| - |p_i - n| + m).
double quadruplet_loss(Vec query, Vec positive1, Vec positive2, Vec negative,
                       const LossConfig& cfg = {});

struct TripletGrad {
  std::vector<double> query, positive, negative;
};

struct QuadrupletGrad {
  std::vector<double> query, positive1, positive2, negative;
};

// Hinges count as active only when their argument is strictly positive, and
// d|a - b|/da = (a - b) / max(|a - b|, epsilon), so kinks and coincident
// points contribute zero.
TripletGrad triplet_grad(Vec query, Vec positive, Vec negative, const LossConfig& cfg = {});
QuadrupletGrad quadruplet_grad(Vec query, Vec positive1, Vec positive2, Vec negative,
                               const LossConfig& cfg = {});

}  // namespace pcr
