#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <nlohmann/json.hpp>

namespace spinesim {

/// Lineage functionals known to the checkers. Evaluated on anything exposing
/// division_count() and trait_at(s): Path, TreeLineage.
class Functional {
 public:
  enum class Kind { one, terminal, trait_at, z_power_d, interval };

  static Functional one() { return Functional{Kind::one}; }
  static Functional terminal() { return Functional{Kind::terminal}; }
  static Functional trait_at(double s);
  static Functional z_power_d(double z);
  /// 1{lo <= X_t < hi}
  static Functional interval(double lo, double hi);

  /// "one", "terminal", "trait_at:S", "zD:Z", "interval:LO:HI", or the JSON
  /// object form {"id": ..., "s"|"z"|"lo","hi": ...}.
  static Functional parse(const std::string& spec);
  static Functional from_json(const nlohmann::json& j);

  Kind kind() const { return kind_; }
  std::string id() const;
  nlohmann::json to_json() const;
  bool is_constant() const { return kind_ == Kind::one; }
  /// Functionals of the trait alone (one, terminal-as-identity, interval).
  bool is_trait_function() const { return kind_ != Kind::z_power_d; }
  /// The trait function f(x) used when the functional is read at a fixed time.
  double of_trait(double x) const;

  template <class Lineage>
  double operator()(const Lineage& l, double t) const {
    switch (kind_) {
      case Kind::one: return 1.0;
      case Kind::terminal: return l.trait_at(t);
      case Kind::trait_at: return l.trait_at(s_);
      case Kind::z_power_d: return std::pow(z_, static_cast<double>(l.division_count()));
      case Kind::interval: {
        const double x = l.trait_at(t);
        return lo_ <= x && x < hi_ ? 1.0 : 0.0;
      }
    }
    return 0.0;
  }

 private:
  explicit Functional(Kind k) : kind_{k} {}

  Kind kind_ = Kind::one;
  double s_ = 0.0;
  double z_ = 0.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
};

}  // namespace spinesim
