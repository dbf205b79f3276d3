#include "spinesim/functionals.hpp"

#include <sstream>
#include <vector>

#include "spinesim/errors.hpp"
#include "spinesim/format.hpp"

namespace spinesim {

Functional Functional::trait_at(double s) {
  if (!(s >= 0.0)) throw ConfigError{"functional trait_at: s must be >= 0"};
  Functional f{Kind::trait_at};
  f.s_ = s;
  return f;
}

Functional Functional::z_power_d(double z) {
  if (!(z >= 0.0)) throw ConfigError{"functional zD: z must be >= 0"};
  Functional f{Kind::z_power_d};
  f.z_ = z;
  return f;
}

Functional Functional::interval(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError{"functional interval: need lo < hi"};
  Functional f{Kind::interval};
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

namespace {

double to_number(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument{s};
    return v;
  } catch (const std::exception&) {
    throw ConfigError{"functional '" + spec + "': bad number '" + s + "'"};
  }
}

}  // namespace

Functional Functional::parse(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss{spec};
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  if (parts.empty()) throw ConfigError{"empty functional id"};
  const std::string& id = parts[0];
  const auto need = [&](std::size_t n) {
    if (parts.size() != n + 1) throw ConfigError{"functional '" + spec + "': expected " + std::to_string(n) + " argument(s)"};
  };
  if (id == "one") {
    need(0);
    return one();
  }
  if (id == "terminal") {
    need(0);
    return terminal();
  }
  if (id == "trait_at") {
    need(1);
    return trait_at(to_number(parts[1], spec));
  }
  if (id == "zD") {
    need(1);
    return z_power_d(to_number(parts[1], spec));
  }
  if (id == "interval") {
    need(2);
    return interval(to_number(parts[1], spec), to_number(parts[2], spec));
  }
  throw ConfigError{"unknown functional '" + id + "'"};
}

Functional Functional::from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse(j.get<std::string>());
  if (!j.is_object() || !j.contains("id") || !j.at("id").is_string())
    throw ConfigError{"functional: expected a string or an object with 'id'"};
  const std::string id = j.at("id").get<std::string>();
  const auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError{"functional " + id + ": missing parameter '" + key + "'"};
    return j.at(key).get<double>();
  };
  if (id == "one") return one();
  if (id == "terminal") return terminal();
  if (id == "trait_at") return trait_at(num("s"));
  if (id == "zD") return z_power_d(num("z"));
  if (id == "interval") return interval(num("lo"), num("hi"));
  throw ConfigError{"unknown functional '" + id + "'"};
}

std::string Functional::id() const {
  switch (kind_) {
    case Kind::one: return "one";
    case Kind::terminal: return "terminal";
    case Kind::trait_at: return "trait_at:" + fmt17(s_);
    case Kind::z_power_d: return "zD:" + fmt17(z_);
    case Kind::interval: return "interval:" + fmt17(lo_) + ":" + fmt17(hi_);
  }
  return "one";
}

nlohmann::json Functional::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::one: j["id"] = "one"; break;
    case Kind::terminal: j["id"] = "terminal"; break;
    case Kind::trait_at:
      j["id"] = "trait_at";
      j["s"] = s_;
      break;
    case Kind::z_power_d:
      j["id"] = "zD";
      j["z"] = z_;
      break;
    case Kind::interval:
      j["id"] = "interval";
      j["lo"] = lo_;
      j["hi"] = hi_;
      break;
  }
  return j;
}

double Functional::of_trait(double x) const {
  switch (kind_) {
    case Kind::one: return 1.0;
    case Kind::terminal:
    case Kind::trait_at: return x;
    case Kind::interval: return lo_ <= x && x < hi_ ? 1.0 : 0.0;
    case Kind::z_power_d: break;
  }
  throw DomainError{"functional " + id() + " is not a function of the trait"};
}

}  // namespace spinesim
