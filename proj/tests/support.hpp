#pragma once

#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "spinesim/model.hpp"

namespace testing_support {

using spinesim::MeanKernel;
using spinesim::OffspringDraw;
using spinesim::RandomStream;
using spinesim::RealFn;

// Constant rate b; a division leaves no child with probability q, two copies otherwise.
class DyingModel final : public spinesim::Model {
 public:
  DyingModel(double b, double q) : b_{b}, q_{q} {}

  std::string name() const override { return "dying"; }
  spinesim::MotionKind motion_kind() const override { return spinesim::MotionKind::none; }
  spinesim::TraitKind trait_kind() const override { return spinesim::TraitKind::real; }

  double division_rate(double, double) const override { return b_; }
  double mean_offspring(double) const override { return 2.0 * (1.0 - q_); }
  OffspringDraw sample_offspring(double x, RandomStream& rng) const override {
    if (rng.bernoulli(q_)) return {0, {}};
    return {2, {x, x}};
  }
  MeanKernel mean_kernel(double x) const override {
    MeanKernel k;
    k.atoms.push_back({x, 2.0 * (1.0 - q_)});
    return k;
  }
  double pair_moment(double x, const RealFn& f, const RealFn& g) const override {
    return 2.0 * (1.0 - q_) * f(x) * g(x);
  }

  double integrated_rate(double, double s, double t) const override { return t > s ? b_ * (t - s) : 0.0; }
  double division_time(double, double s, double hazard) const override { return s + hazard / b_; }

 private:
  double b_;
  double q_;
};

inline nlohmann::json cfg(const std::string& text) { return nlohmann::json::parse(text); }

}  // namespace testing_support
