#include "brepchain/ilp.hpp"
#include "extraction/lp_simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>

namespace brepchain {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kEps = 1e-9;

struct LocalRow {
  std::vector<LinearTerm> terms;  // local variable indices
  Sense sense;
  double rhs;
};

struct Component {
  std::vector<int> vars;  // global indices
  std::vector<LocalRow> rows;
  std::vector<double> cost;     // objective + tiebreak
  std::vector<double> primary;  // objective only
};

struct ComponentResult {
  std::vector<std::uint8_t> x;
  double bound = 0.0;
  bool timed_out = false;
  long nodes = 0;
};

std::vector<Component> split_components(const IlpModel& model) {
  const int n = model.num_variables();
  std::vector<int> parent(static_cast<size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (const auto& c : model.constraints())
    for (size_t t = 1; t < c.terms.size(); ++t) {
      int a = root(c.terms[0].var), b = root(c.terms[t].var);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::vector<int> comp_of(static_cast<size_t>(n), -1), local(static_cast<size_t>(n), -1);
  std::vector<Component> comps;
  for (int v = 0; v < n; ++v) {
    int r = root(v);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    auto& comp = comps[static_cast<size_t>(comp_of[r])];
    local[v] = static_cast<int>(comp.vars.size());
    comp.vars.push_back(v);
    const auto& var = model.variables()[static_cast<size_t>(v)];
    comp.cost.push_back(var.objective + var.tiebreak);
    comp.primary.push_back(var.objective);
  }
  for (const auto& c : model.constraints()) {
    if (c.terms.empty()) {
      bool ok = c.sense == Sense::LessEqual ? 0.0 <= c.rhs + kEps
                : c.sense == Sense::GreaterEqual ? 0.0 >= c.rhs - kEps
                                                 : std::abs(c.rhs) <= kEps;
      if (!ok) throw SolverError(SolverFailure::Infeasible, "model has an unsatisfiable empty constraint");
      continue;
    }
    auto& comp = comps[static_cast<size_t>(comp_of[root(c.terms[0].var)])];
    LocalRow row{{}, c.sense, c.rhs};
    for (const auto& t : c.terms) row.terms.push_back({local[t.var], t.coef});
    comp.rows.push_back(std::move(row));
  }
  return comps;
}

bool row_ok(double activity, Sense sense, double rhs) {
  switch (sense) {
    case Sense::LessEqual: return activity <= rhs + kEps;
    case Sense::GreaterEqual: return activity >= rhs - kEps;
    case Sense::Equal: return std::abs(activity - rhs) <= kEps;
  }
  return false;
}

bool feasible(const Component& c, const std::vector<std::uint8_t>& x) {
  for (const auto& row : c.rows) {
    double a = 0.0;
    for (const auto& t : row.terms)
      if (x[static_cast<size_t>(t.var)]) a += t.coef;
    if (!row_ok(a, row.sense, row.rhs)) return false;
  }
  return true;
}

double value(const std::vector<double>& cost, const std::vector<std::uint8_t>& x) {
  double v = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i]) v += cost[i];
  return v;
}

// Gray-code enumeration with incrementally maintained row activities.
ComponentResult enumerate(const Component& c) {
  const int n = static_cast<int>(c.vars.size());
  const int m = static_cast<int>(c.rows.size());
  std::vector<std::vector<std::pair<int, double>>> col(static_cast<size_t>(n));
  for (int r = 0; r < m; ++r)
    for (const auto& t : c.rows[static_cast<size_t>(r)].terms) col[static_cast<size_t>(t.var)].push_back({r, t.coef});
  std::vector<double> act(static_cast<size_t>(m), 0.0);
  int violated = 0;
  for (int r = 0; r < m; ++r)
    if (!row_ok(0.0, c.rows[r].sense, c.rows[r].rhs)) ++violated;

  std::vector<std::uint8_t> x(static_cast<size_t>(n), 0), best;
  double best_val = -std::numeric_limits<double>::infinity();
  if (violated == 0) {
    best = x;
    best_val = 0.0;
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    int flip = __builtin_ctzll(g);
    const bool on = !x[static_cast<size_t>(flip)];
    x[static_cast<size_t>(flip)] = on;
    for (const auto& [r, coef] : col[static_cast<size_t>(flip)]) {
      const auto& row = c.rows[static_cast<size_t>(r)];
      bool before = row_ok(act[r], row.sense, row.rhs);
      act[r] += on ? coef : -coef;
      bool after = row_ok(act[r], row.sense, row.rhs);
      violated += static_cast<int>(before) - static_cast<int>(after);
    }
    if (violated == 0) {
      // Recompute exactly to avoid drift in the running objective.
      double exact = value(c.cost, x);
      if (exact > best_val) {
        best_val = exact;
        best = x;
      }
    }
  }
  if (best.empty()) throw SolverError(SolverFailure::Infeasible, "integer program is infeasible");
  ComponentResult res;
  res.x = std::move(best);
  res.bound = best_val;
  res.nodes = static_cast<long>(total);
  return res;
}

// Bound propagation on binary variables. Returns false on conflict.
bool propagate(const Component& c, std::vector<signed char>& fix) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& row : c.rows) {
      double lo = 0.0, hi = 0.0;
      for (const auto& t : row.terms) {
        signed char f = fix[static_cast<size_t>(t.var)];
        if (f == 1) {
          lo += t.coef;
          hi += t.coef;
        } else if (f < 0) {
          (t.coef < 0 ? lo : hi) += t.coef;
        }
      }
      const bool need_le = row.sense != Sense::GreaterEqual;
      const bool need_ge = row.sense != Sense::LessEqual;
      if (need_le && lo > row.rhs + kEps) return false;
      if (need_ge && hi < row.rhs - kEps) return false;
      for (const auto& t : row.terms) {
        auto& f = fix[static_cast<size_t>(t.var)];
        if (f >= 0) continue;
        const double a = t.coef;
        // Activity bounds if this variable took value 1 or 0.
        double lo1 = a < 0 ? lo : lo + a, lo0 = a < 0 ? lo - a : lo;
        double hi1 = a > 0 ? hi : hi + a, hi0 = a > 0 ? hi - a : hi;
        bool can1 = !(need_le && lo1 > row.rhs + kEps) && !(need_ge && hi1 < row.rhs - kEps);
        bool can0 = !(need_le && lo0 > row.rhs + kEps) && !(need_ge && hi0 < row.rhs - kEps);
        if (!can1 && !can0) return false;
        if (can1 != can0) {
          f = can1 ? 1 : 0;
          changed = true;
          // Refresh bounds for the remaining terms of this row.
          if (f == 1) {
            lo = lo1;
            hi = hi1;
          } else {
            lo = lo0;
            hi = hi0;
          }
        }
      }
    }
  }
  return true;
}

struct Node {
  std::vector<signed char> fix;
  double bound;
  int depth;
  long id;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

lp::Problem component_lp(const Component& c) {
  lp::Problem p;
  p.num_vars = static_cast<int>(c.vars.size());
  p.objective = c.cost;
  for (const auto& row : c.rows) p.rows.push_back({row.terms, row.sense, row.rhs});
  return p;
}

std::pair<std::vector<double>, std::vector<double>> node_bounds(const std::vector<signed char>& fix) {
  std::vector<double> lo(fix.size(), 0.0), hi(fix.size(), 1.0);
  for (size_t j = 0; j < fix.size(); ++j)
    if (fix[j] >= 0) lo[j] = hi[j] = fix[j];
  return {lo, hi};
}

// Fix variables one at a time towards the LP values, propagating after each.
bool dive(const Component& c, std::vector<signed char> fix, const std::vector<double>& lp_x,
          std::vector<std::uint8_t>& out) {
  const int n = static_cast<int>(c.vars.size());
  std::vector<int> order;
  for (int j = 0; j < n; ++j)
    if (fix[j] < 0) order.push_back(j);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return std::abs(lp_x[a] - 0.5) > std::abs(lp_x[b] - 0.5); });
  for (int j : order) {
    if (fix[j] >= 0) continue;
    signed char first = lp_x[j] >= 0.5 ? 1 : 0;
    auto trial = fix;
    trial[j] = first;
    if (propagate(c, trial)) {
      fix = std::move(trial);
      continue;
    }
    fix[j] = static_cast<signed char>(1 - first);
    if (!propagate(c, fix)) return false;
  }
  out.assign(static_cast<size_t>(n), 0);
  for (int j = 0; j < n; ++j) out[j] = fix[j] == 1;
  return feasible(c, out);
}

// Probing: fixing one variable and propagating yields implications
// x_a = va => x_b = vb, each a valid two-variable inequality. Probes that
// conflict fix the variable the other way in `root`. Returns false if the
// component is infeasible.
struct Implication {
  int a, va, b, vb;
};

bool probe(const Component& c, std::vector<signed char>& root, std::vector<Implication>& out) {
  const int n = static_cast<int>(c.vars.size());
  if (!propagate(c, root)) return false;
  for (int a = 0; a < n; ++a) {
    for (int va : {1, 0}) {
      if (root[a] >= 0) break;
      auto f = root;
      f[a] = static_cast<signed char>(va);
      if (!propagate(c, f)) {
        root[a] = static_cast<signed char>(1 - va);
        if (!propagate(c, root)) return false;
        break;
      }
      for (int b = 0; b < n; ++b)
        if (b != a && root[b] < 0 && f[b] >= 0) out.push_back({a, va, b, f[b]});
    }
  }
  return true;
}

LocalRow implication_row(const Implication& im) {
  // Written so that the row is violated exactly when the implication is.
  if (im.va == 1 && im.vb == 1) return {{{im.a, 1.0}, {im.b, -1.0}}, Sense::LessEqual, 0.0};
  if (im.va == 1 && im.vb == 0) return {{{im.a, 1.0}, {im.b, 1.0}}, Sense::LessEqual, 1.0};
  if (im.va == 0 && im.vb == 1) return {{{im.a, 1.0}, {im.b, 1.0}}, Sense::GreaterEqual, 1.0};
  return {{{im.b, 1.0}, {im.a, -1.0}}, Sense::LessEqual, 0.0};
}

double row_violation(const LocalRow& row, const std::vector<double>& x) {
  double a = 0.0;
  for (const auto& t : row.terms) a += t.coef * x[static_cast<size_t>(t.var)];
  switch (row.sense) {
    case Sense::LessEqual: return a - row.rhs;
    case Sense::GreaterEqual: return row.rhs - a;
    case Sense::Equal: return std::abs(a - row.rhs);
  }
  return 0.0;
}

// Root cutting loop: adds the most violated implication rows to `c` until the
// root LP satisfies them all or the row budget (the original row count) is
// spent.
void strengthen_root(Component& c, const std::vector<signed char>& root, const std::vector<Implication>& imps) {
  std::vector<LocalRow> pool;
  std::set<std::tuple<int, int, int, int>> seen;
  for (const auto& im : imps) {
    // An implication and its contrapositive give the same row.
    auto key = std::min(std::make_tuple(im.a, im.va, im.b, im.vb), std::make_tuple(im.b, 1 - im.vb, im.a, 1 - im.va));
    if (seen.insert(key).second) pool.push_back(implication_row(im));
  }
  std::vector<bool> used(pool.size(), false);
  auto [lo, hi] = node_bounds(root);
  const size_t budget = c.rows.size(), per_round = std::max<size_t>(50, budget / 4);
  size_t added_total = 0;
  for (int round = 0; round < 20 && added_total < budget; ++round) {
    lp::Simplex simplex(component_lp(c));
    lp::Result r = simplex.solve(lo, hi);
    if (r.status != lp::Status::Optimal) return;
    std::vector<std::pair<double, size_t>> violated;
    for (size_t q = 0; q < pool.size(); ++q) {
      if (used[q]) continue;
      const double v = row_violation(pool[q], r.x);
      if (v > 1e-6) violated.push_back({-v, q});
    }
    if (violated.empty()) return;
    std::sort(violated.begin(), violated.end());
    const size_t take = std::min({violated.size(), per_round, budget - added_total});
    for (size_t k = 0; k < take; ++k) {
      used[violated[k].second] = true;
      c.rows.push_back(pool[violated[k].second]);
    }
    added_total += take;
  }
}

// Best-first search. Each popped node is solved cold and then plunged: the
// child agreeing with the LP rounding is re-solved warm from the parent's
// basis while its sibling goes to the queue.
ComponentResult branch_and_bound(const Component& original, Clock::time_point deadline) {
  const int n = static_cast<int>(original.vars.size());
  ComponentResult res;
  Component c = original;
  std::vector<signed char> root(static_cast<size_t>(n), -1);
  std::vector<Implication> imps;
  if (!probe(c, root, imps)) throw SolverError(SolverFailure::Infeasible, "integer program is infeasible");
  strengthen_root(c, root, imps);
  std::vector<std::uint8_t> incumbent;
  double inc_val = -std::numeric_limits<double>::infinity();
  auto offer = [&](const std::vector<std::uint8_t>& x) {
    if (!feasible(c, x)) return;
    double v = value(c.cost, x);
    if (v > inc_val + 1e-12) {
      inc_val = v;
      incumbent = x;
    }
  };
  offer(std::vector<std::uint8_t>(static_cast<size_t>(n), 0));

  lp::Simplex simplex(component_lp(c));
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  double trivial = 0.0;
  for (double v : c.cost) trivial += std::max(v, 0.0);
  open.push({root, trivial, 0, next_id++});
  double open_bound = trivial;

  while (!open.empty()) {
    if (Clock::now() > deadline) {
      res.timed_out = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (node.bound <= inc_val + kEps) continue;
    ++res.nodes;
    if (!propagate(c, node.fix)) continue;
    auto [lo, hi] = node_bounds(node.fix);
    lp::Result lp = simplex.solve(lo, hi);

    while (true) {
      if (lp.status == lp::Status::Infeasible) break;
      double bound = node.bound;
      std::vector<double> x(static_cast<size_t>(n), 0.0);
      if (lp.status == lp::Status::Optimal) {
        bound = std::min(bound, lp.objective);
        x = lp.x;
      } else {
        for (int j = 0; j < n; ++j) x[j] = node.fix[j] >= 0 ? node.fix[j] : 0.5;
      }
      if (bound <= inc_val + kEps) break;

      int branch = -1;
      double most = 1e-6;
      for (int j = 0; j < n; ++j) {
        if (node.fix[j] >= 0) continue;
        double frac = std::abs(x[j] - std::round(x[j]));
        if (frac > most) {
          most = frac;
          branch = j;
        }
      }
      if (branch < 0) {
        std::vector<std::uint8_t> r(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) r[j] = x[j] >= 0.5;
        if (feasible(c, r)) {
          offer(r);
          break;
        }
        for (int j = 0; j < n && branch < 0; ++j)
          if (node.fix[j] < 0) branch = j;
        if (branch < 0) break;
      }
      std::vector<std::uint8_t> heuristic;
      if (node.depth % 4 == 0 && dive(c, node.fix, x, heuristic)) offer(heuristic);
      if (bound <= inc_val + kEps) break;

      const signed char preferred = x[branch] >= 0.5 ? 1 : 0;
      Node sibling{node.fix, bound, node.depth + 1, next_id++};
      sibling.fix[branch] = static_cast<signed char>(1 - preferred);
      open.push(std::move(sibling));

      node.fix[branch] = preferred;
      node.bound = bound;
      ++node.depth;
      node.id = next_id++;
      if (Clock::now() > deadline) {
        open.push(std::move(node));
        break;
      }
      ++res.nodes;
      const std::vector<signed char> before = node.fix;
      if (!propagate(c, node.fix)) break;
      std::vector<std::pair<int, double>> fixes{{branch, static_cast<double>(preferred)}};
      for (int j = 0; j < n; ++j)
        if (before[j] < 0 && node.fix[j] >= 0) fixes.push_back({j, static_cast<double>(node.fix[j])});
      lp = simplex.fix(fixes);
    }
  }

  if (incumbent.empty())
    throw SolverError(res.timed_out ? SolverFailure::Timeout : SolverFailure::Infeasible,
                      res.timed_out ? "time limit reached without a feasible solution" : "integer program is infeasible");
  open_bound = inc_val;
  while (!open.empty()) {
    open_bound = std::max(open_bound, open.top().bound);
    open.pop();
  }
  res.x = std::move(incumbent);
  res.bound = res.timed_out ? open_bound : inc_val;
  return res;
}

}  // namespace

IlpSolution solve_ilp(const IlpModel& model, const SolveOptions& options) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.time_limit_s));
  IlpSolution sol;
  sol.x.assign(static_cast<size_t>(model.num_variables()), 0);
  double bound = 0.0;
  bool timed_out = false;
  for (const auto& comp : split_components(model)) {
    const bool small = static_cast<int>(comp.vars.size()) <= options.enumeration_limit;
    ComponentResult r = small && !options.force_branch_and_bound ? enumerate(comp) : branch_and_bound(comp, deadline);
    for (size_t q = 0; q < comp.vars.size(); ++q) sol.x[static_cast<size_t>(comp.vars[q])] = r.x[q];
    bound += r.bound;
    timed_out = timed_out || r.timed_out;
    sol.nodes += r.nodes;
  }
  sol.objective = model.objective_value(sol.x);
  const double combined = sol.objective + model.tiebreak_value(sol.x);
  sol.bound = sol.objective + std::max(0.0, bound - combined);
  sol.gap = (sol.bound - sol.objective) / std::max(1.0, std::abs(sol.objective));
  sol.status = timed_out ? SolveStatus::TimeLimit : SolveStatus::Optimal;
  return sol;
}

}  // namespace brepchain
