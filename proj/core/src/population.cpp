#include "spinesim/population.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <sstream>

#include "spinesim/errors.hpp"
#include "spinesim/format.hpp"
#include "spinesim/parallel.hpp"

namespace spinesim {

UlamHarrisLabel UlamHarrisLabel::child(std::uint32_t i) const {
  UlamHarrisLabel c{path};
  c.path.push_back(i);
  return c;
}

UlamHarrisLabel UlamHarrisLabel::parent() const {
  if (path.empty()) throw DomainError{"root label has no parent"};
  return UlamHarrisLabel{std::vector<std::uint32_t>(path.begin(), path.end() - 1)};
}

bool UlamHarrisLabel::is_prefix_of(const UlamHarrisLabel& other) const {
  return path.size() <= other.path.size() && std::equal(path.begin(), path.end(), other.path.begin());
}

std::string UlamHarrisLabel::str() const {
  if (path.empty()) return "0";
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path[i]);
  }
  return s;
}

UlamHarrisLabel UlamHarrisLabel::parse(const std::string& s) {
  UlamHarrisLabel l;
  if (s == "0" || s.empty()) return l;
  std::stringstream ss{s};
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw DomainError{"bad label '" + s + "'"};
    const unsigned long v = std::stoul(part);
    if (v == 0) throw DomainError{"bad label '" + s + "'"};
    l.path.push_back(static_cast<std::uint32_t>(v));
  }
  return l;
}

std::size_t PopulationTree::find(const UlamHarrisLabel& label) const {
  for (std::size_t i = 0; i < individuals_.size(); ++i) {
    if (individuals_[i].label == label) return i;
  }
  return npos_individual;
}

std::vector<std::size_t> PopulationTree::alive_at(double s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < individuals_.size(); ++i) {
    if (individuals_[i].alive_at(s)) out.push_back(i);
  }
  return out;
}

std::size_t PopulationTree::count_alive(double s) const {
  std::size_t n = 0;
  for (const auto& ind : individuals_) n += ind.alive_at(s) ? 1 : 0;
  return n;
}

std::vector<std::size_t> PopulationTree::dead_by(double T) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < individuals_.size(); ++i) {
    if (individuals_[i].death <= T) out.push_back(i);
  }
  return out;
}

double PopulationTree::trait_at(std::size_t i, double s) const { return individuals_[i].motion.value_at(s); }

class PopulationBuilder {
 public:
  PopulationBuilder(const Model& model, double horizon, Caps caps, const RandomStream& rng, PopulationTree& tree)
      : model_{model}, horizon_{horizon}, caps_{caps}, rng_{rng}, tree_{tree} {}

  void run(const std::vector<double>& init) {
    for (double x : init) model_.validate_trait(x);
    if (init.size() == 1) {
      add(UlamHarrisLabel{}, npos_individual, tree_.start_time_, init.front());
    } else {
      for (std::size_t i = 0; i < init.size(); ++i)
        add(UlamHarrisLabel{{static_cast<std::uint32_t>(i + 1)}}, npos_individual, tree_.start_time_, init[i]);
    }
    while (!queue_.empty()) {
      const std::size_t idx = queue_.top().index;
      queue_.pop();
      auto& events = tree_.events_;
      if (++events > caps_.max_events) cap_error("max_events", tree_.individuals_[idx].death);
      const UlamHarrisLabel label = tree_.individuals_[idx].label;
      const double t = tree_.individuals_[idx].death;
      RandomStream off_rng = rng_.derive(label.path).derive(1);
      const OffspringDraw draw = model_.sample_offspring(tree_.individuals_[idx].trait_at_end, off_rng);
      const std::size_t first = tree_.individuals_.size();
      for (std::size_t j = 0; j < draw.children.size(); ++j)
        add(label.child(static_cast<std::uint32_t>(j + 1)), idx, t, draw.children[j]);
      tree_.individuals_[idx].first_child = draw.children.empty() ? npos_individual : first;
      tree_.individuals_[idx].child_count = draw.children.size();
    }
    if (!init.empty() && tree_.count_alive(horizon_) == 0) {
      double last = tree_.start_time_;
      for (const auto& ind : tree_.individuals_) last = std::max(last, ind.death);
      tree_.extinct_at_ = last;
    }
  }

 private:
  struct Event {
    double time;
    std::size_t index;
  };

  struct Later {
    const std::vector<Individual>* inds;
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return (*inds)[a.index].label > (*inds)[b.index].label;
    }
  };

  void add(UlamHarrisLabel label, std::size_t parent, double birth, double x) {
    if (tree_.individuals_.size() >= caps_.max_individuals) cap_error("max_individuals", birth);
    RandomStream life_rng = rng_.derive(label.path).derive(0);
    LifeRecord rec = simulate_life(model_, x, birth, horizon_, life_rng);
    Individual ind;
    ind.label = std::move(label);
    ind.parent = parent;
    ind.birth = birth;
    ind.trait_at_birth = x;
    ind.trait_at_end = rec.trait_at_end;
    ind.motion = std::move(rec.motion);
    if (rec.divided) ind.death = rec.end;
    tree_.individuals_.push_back(std::move(ind));
    if (rec.divided) queue_.push({rec.end, tree_.individuals_.size() - 1});
  }

  [[noreturn]] void cap_error(const std::string& which, double time) {
    auto partial = std::make_shared<const PopulationTree>(tree_);
    throw CapExceeded{"population cap exceeded: " + which + " (time reached " + fmt17(time) + ")",
                      std::move(partial), time};
  }

  const Model& model_;
  double horizon_;
  Caps caps_;
  RandomStream rng_;
  PopulationTree& tree_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_{Later{&tree_.individuals_}};
};

PopulationTree simulate_population(const Model& model, const std::vector<double>& init, double horizon, Caps caps,
                                   RandomStream rng, double start_time) {
  if (!(horizon >= start_time)) throw DomainError{"simulate_population: horizon before start time"};
  if (caps.max_individuals == 0 || caps.max_events == 0) throw DomainError{"simulate_population: caps must be > 0"};
  PopulationTree tree{start_time, horizon, rng.key(), caps};
  PopulationBuilder{model, horizon, caps, rng, tree}.run(init);
  return tree;
}

std::vector<std::pair<UlamHarrisLabel, double>> population_snapshot(const PopulationTree& tree, double s) {
  if (s > tree.horizon() || s < tree.start_time()) throw DomainError{"population_snapshot: time outside the tree"};
  std::vector<std::pair<UlamHarrisLabel, double>> out;
  for (std::size_t i : tree.alive_at(s)) out.emplace_back(tree[i].label, tree.trait_at(i, s));
  return out;
}

namespace {

std::vector<std::size_t> ancestry(const PopulationTree& tree, std::size_t i) {
  std::vector<std::size_t> chain;
  for (std::size_t j = i; j != npos_individual; j = tree[j].parent) chain.push_back(j);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace

LineagePath lineage_of(const PopulationTree& tree, std::size_t i, double t) {
  if (i >= tree.size() || !tree[i].alive_at(t)) throw DomainError{"lineage_of: individual not alive at t"};
  const auto chain = ancestry(tree, i);
  LineagePath path{tree.start_time(), t};
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const Individual& ind = tree[chain[k]];
    const bool last = k + 1 == chain.size();
    path.add_segment({ind.birth, last ? t : ind.death, ind.motion});
    if (!last) path.add_jump({ind.death, ind.trait_at_end, tree[chain[k + 1]].trait_at_birth});
  }
  return path;
}

LineagePath lineage_of(const PopulationTree& tree, const UlamHarrisLabel& u, double t) {
  const std::size_t i = tree.find(u);
  if (i == npos_individual) throw DomainError{"lineage_of: unknown label " + u.str()};
  return lineage_of(tree, i, t);
}

TreeLineage::TreeLineage(const PopulationTree& tree, std::size_t i, double t) : tree_{&tree}, index_{i}, t_{t} {}

std::size_t TreeLineage::division_count() const {
  std::size_t d = 0;
  for (std::size_t j = (*tree_)[index_].parent; j != npos_individual; j = (*tree_)[j].parent) ++d;
  return d;
}

double TreeLineage::trait_at(double s) const {
  std::size_t j = index_;
  while ((*tree_)[j].birth > s && (*tree_)[j].parent != npos_individual) j = (*tree_)[j].parent;
  return tree_->trait_at(j, s);
}

void write_tree_csv(std::ostream& os, const PopulationTree& tree) {
  os << "label,parent,alpha,beta,trait_at_birth,trait_at_horizon\n";
  for (const auto& ind : tree.individuals()) {
    os << ind.label.str() << ',';
    if (ind.parent != npos_individual) os << tree[ind.parent].label.str();
    os << ',' << fmt17(ind.birth) << ',';
    if (ind.divided()) os << fmt17(ind.death);
    os << ',' << fmt17(ind.trait_at_birth) << ',';
    if (!ind.divided()) os << fmt17(ind.motion.value_at(tree.horizon()));
    os << '\n';
  }
}

MCEstimate mean_population_mc(const Model& model, double x, double s, double t, std::size_t n, RandomStream rng,
                              Caps caps, unsigned threads) {
  if (n < 2) throw DomainError{"mean_population_mc: need n >= 2"};
  if (t < s) throw DomainError{"mean_population_mc: requires s <= t"};
  model.validate_trait(x);
  if (t == s) return MCEstimate{n, 1.0, 0.0};
  const auto counts = parallel_map(n, threads, [&](std::size_t i) {
    const PopulationTree tree = simulate_population(model, {x}, t, caps, rng.derive(i), s);
    return static_cast<double>(tree.count_alive(t));
  });
  return estimate_of(counts);
}

}  // namespace spinesim
