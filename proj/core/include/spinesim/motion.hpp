#pragma once

#include <cstddef>
#include <vector>

namespace spinesim {

/// Trait trajectory of one individual (or one spine segment) between two
/// jump times. Deterministic flows are stored as their closed form; diffusions
/// keep the integrator grid (linearly interpolated) and jump processes keep
/// their event times (right-continuous steps).
class Motion {
 public:
  enum class Kind { constant, linear_drift, exponential, linear_knots, step_knots };

  static Motion constant(double x0, double t0);
  static Motion linear_drift(double x0, double t0, double rate);
  static Motion exponential(double x0, double t0, double rate);
  static Motion knots(Kind kind, std::vector<double> times, std::vector<double> values);

  Kind kind() const { return kind_; }
  double start_time() const;
  double start_value() const;
  double rate() const { return rate_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

  double value_at(double t) const;
  /// Left limit at t (value just before a jump occurring at t).
  double value_before(double t) const;
  /// Knot count; 2 for closed-form kinds.
  std::size_t knot_count() const;

 private:
  Kind kind_ = Kind::constant;
  double x0_ = 0.0;
  double t0_ = 0.0;
  double rate_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

struct Segment {
  double start;
  double end;
  Motion motion;
};

struct Jump {
  double time;
  double pre;
  double post;
};

/// Piecewise trajectory on [start_time, horizon]: segments tile the interval and
/// jump i separates segment i from segment i+1. Shared by auxiliary (spine)
/// paths, tagged-cell paths and lineages read back from a population tree.
class Path {
 public:
  Path() = default;
  Path(double start_time, double horizon) : start_time_{start_time}, horizon_{horizon} {}

  double start_time() const { return start_time_; }
  double horizon() const { return horizon_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  std::size_t division_count() const { return jumps_.size(); }

  void add_segment(Segment s) { segments_.push_back(std::move(s)); }
  void add_jump(Jump j) { jumps_.push_back(j); }

  /// Right-continuous trait value at time s in [start_time, horizon].
  double trait_at(double s) const;
  double initial() const;
  double terminal() const;

  /// Checks tiling, ordering and jump/segment consistency.
  bool well_formed(double tol = 1e-12) const;

 private:
  double start_time_ = 0.0;
  double horizon_ = 0.0;
  std::vector<Segment> segments_;
  std::vector<Jump> jumps_;
};

using AuxiliaryPath = Path;
using LineagePath = Path;

}  // namespace spinesim
