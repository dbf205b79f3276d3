#include "spinesim/motion.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "spinesim/errors.hpp"

namespace spinesim {

Motion Motion::constant(double x0, double t0) {
  Motion m;
  m.kind_ = Kind::constant;
  m.x0_ = x0;
  m.t0_ = t0;
  return m;
}

Motion Motion::linear_drift(double x0, double t0, double rate) {
  Motion m = constant(x0, t0);
  m.kind_ = Kind::linear_drift;
  m.rate_ = rate;
  return m;
}

Motion Motion::exponential(double x0, double t0, double rate) {
  Motion m = constant(x0, t0);
  m.kind_ = Kind::exponential;
  m.rate_ = rate;
  return m;
}

Motion Motion::knots(Kind kind, std::vector<double> times, std::vector<double> values) {
  if (kind != Kind::linear_knots && kind != Kind::step_knots) throw DomainError{"Motion::knots: not a knot kind"};
  if (times.empty() || times.size() != values.size()) throw DomainError{"Motion::knots: bad knot arrays"};
  Motion m;
  m.kind_ = kind;
  m.x0_ = values.front();
  m.t0_ = times.front();
  m.times_ = std::move(times);
  m.values_ = std::move(values);
  return m;
}

double Motion::start_time() const { return t0_; }
double Motion::start_value() const { return x0_; }

std::size_t Motion::knot_count() const {
  return (kind_ == Kind::linear_knots || kind_ == Kind::step_knots) ? times_.size() : 2;
}

double Motion::value_at(double t) const {
  switch (kind_) {
    case Kind::constant: return x0_;
    case Kind::linear_drift: return x0_ + rate_ * (t - t0_);
    case Kind::exponential: return x0_ * std::exp(rate_ * (t - t0_));
    case Kind::step_knots: {
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      if (it == times_.begin()) return values_.front();
      return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
    }
    case Kind::linear_knots: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      const auto i = static_cast<std::size_t>(it - times_.begin());
      const double t0 = times_[i - 1];
      const double t1 = times_[i];
      if (t1 <= t0) return values_[i];
      const double w = (t - t0) / (t1 - t0);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return x0_;
}

double Motion::value_before(double t) const {
  if (kind_ != Kind::step_knots) return value_at(t);
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double Path::trait_at(double s) const {
  if (segments_.empty()) throw DomainError{"Path::trait_at on empty path"};
  // Segments are sorted by start; the last one starting at or before s wins (right-continuity).
  auto it = std::upper_bound(segments_.begin(), segments_.end(), s,
                             [](double v, const Segment& seg) { return v < seg.start; });
  if (it == segments_.begin()) return segments_.front().motion.value_at(s);
  return std::prev(it)->motion.value_at(s);
}

double Path::initial() const {
  if (segments_.empty()) throw DomainError{"Path::initial on empty path"};
  return segments_.front().motion.value_at(segments_.front().start);
}

double Path::terminal() const {
  if (segments_.empty()) throw DomainError{"Path::terminal on empty path"};
  return segments_.back().motion.value_at(horizon_);
}

bool Path::well_formed(double tol) const {
  if (segments_.empty()) return false;
  if (std::abs(segments_.front().start - start_time_) > tol) return false;
  if (std::abs(segments_.back().end - horizon_) > tol) return false;
  if (jumps_.size() + 1 != segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].end < segments_[i].start - tol) return false;
    if (i + 1 < segments_.size()) {
      if (std::abs(segments_[i].end - segments_[i + 1].start) > tol) return false;
      const Jump& j = jumps_[i];
      if (std::abs(j.time - segments_[i].end) > tol) return false;
      if (i > 0 && !(j.time > jumps_[i - 1].time)) return false;
      if (std::abs(j.post - segments_[i + 1].motion.value_at(segments_[i + 1].start)) > tol * (1 + std::abs(j.post)))
        return false;
    }
  }
  return true;
}

}  // namespace spinesim
