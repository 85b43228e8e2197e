#include "brepchain/extraction.hpp"
#include "brepchain/ilp.hpp"

#include <cmath>
#include <string>

namespace brepchain {

std::string_view to_string(VarKind kind) {
  switch (kind) {
    case VarKind::F: return "F";
    case VarKind::E: return "E";
    case VarKind::O: return "O";
    case VarKind::V: return "V";
    case VarKind::FE: return "FE";
    case VarKind::EV: return "EV";
    case VarKind::FV: return "FV";
    case VarKind::Y: return "Y";
    case VarKind::Z: return "Z";
  }
  return "?";
}

int IlpModel::add_variable(VarKind kind, int i, int j, int k, double objective, double tiebreak) {
  auto key = std::make_tuple(static_cast<int>(kind), i, j, k);
  if (index_.count(key)) throw ArgumentError("duplicate variable " + std::string(to_string(kind)));
  int id = num_variables();
  vars_.push_back({kind, i, j, k, objective, tiebreak});
  index_.emplace(key, id);
  return id;
}

void IlpModel::add_constraint(std::vector<LinearTerm> terms, Sense sense, double rhs) {
  for (const auto& t : terms)
    if (t.var < 0 || t.var >= num_variables()) throw ArgumentError("constraint references an unknown variable");
  cons_.push_back({std::move(terms), sense, rhs});
}

int IlpModel::find(VarKind kind, int i, int j, int k) const {
  auto it = index_.find(std::make_tuple(static_cast<int>(kind), i, j, k));
  return it == index_.end() ? -1 : it->second;
}

std::string IlpModel::name(int var) const {
  const auto& v = vars_[static_cast<size_t>(var)];
  std::string s(to_string(v.kind));
  for (int idx : {v.i, v.j, v.k})
    if (idx >= 0) s += "_" + std::to_string(idx);
  return s;
}

double IlpModel::objective_value(std::span<const std::uint8_t> x) const {
  double total = 0.0;
  for (size_t i = 0; i < vars_.size(); ++i)
    if (x[i]) total += vars_[i].objective;
  return total;
}

double IlpModel::tiebreak_value(std::span<const std::uint8_t> x) const {
  double total = 0.0;
  for (size_t i = 0; i < vars_.size(); ++i)
    if (x[i]) total += vars_[i].tiebreak;
  return total;
}

bool IlpModel::is_feasible(std::span<const std::uint8_t> x) const {
  if (x.size() != vars_.size()) return false;
  for (const auto& c : cons_) {
    double lhs = 0.0;
    for (const auto& t : c.terms)
      if (x[static_cast<size_t>(t.var)]) lhs += t.coef;
    switch (c.sense) {
      case Sense::LessEqual:
        if (lhs > c.rhs + 1e-9) return false;
        break;
      case Sense::GreaterEqual:
        if (lhs < c.rhs - 1e-9) return false;
        break;
      case Sense::Equal:
        if (std::abs(lhs - c.rhs) > 1e-9) return false;
        break;
    }
  }
  return true;
}

BuiltIlp build_ilp(const ProbabilisticComplex& p, const ProximityMatrices& s, const IlpOptions& o) {
  BuiltIlp built;
  auto& cand = built.candidates;
  for (int k = 0; k < p.num_corners(); ++k)
    if (p.corners[k].validness >= o.validness_cutoff) cand.corners.push_back(k);
  for (int j = 0; j < p.num_curves(); ++j)
    if (p.curves[j].validness >= o.validness_cutoff) cand.curves.push_back(j);
  for (int i = 0; i < p.num_patches(); ++i)
    if (p.patches[i].validness >= o.validness_cutoff) cand.patches.push_back(i);
  if (cand.corners.empty() && cand.curves.empty() && cand.patches.empty())
    throw SolverError(SolverFailure::EmptyCandidates,
                      "no candidate element reaches validness cutoff " + std::to_string(o.validness_cutoff) +
                          "; relax the cutoff (e.g. 0.1)");

  IlpModel& m = built.model;
  const double unary = o.w * o.unary_weight;
  const double tb = -o.tiebreak_weight;
  auto pair_coef = [&](double prob, double fit) {
    return o.w * o.binary_weight * (2 * prob - 1) + (1 - o.w) * o.binary_weight * (2 * fit - 1);
  };
  auto keep = [&](double prob, double fit) { return o.pair_threshold <= 0.0 || prob >= 0.5 || fit >= o.pair_threshold; };

  for (int i : cand.patches) m.add_variable(VarKind::F, i, -1, -1, unary * (2 * p.patches[i].validness - 1), tb);
  for (int j : cand.curves) {
    m.add_variable(VarKind::E, j, -1, -1, unary * (2 * p.curves[j].validness - 1), tb);
    m.add_variable(VarKind::O, j, -1, -1, unary * (2 * p.curves[j].openness - 1));
    m.add_variable(VarKind::Y, j, -1, -1, 0.0);
  }
  for (int k : cand.corners) m.add_variable(VarKind::V, k, -1, -1, unary * (2 * p.corners[k].validness - 1), tb);

  for (int i : cand.patches)
    for (int j : cand.curves)
      if (keep(p.fe(i, j), s.fe(i, j))) m.add_variable(VarKind::FE, i, j, -1, pair_coef(p.fe(i, j), s.fe(i, j)));
  for (int j : cand.curves)
    for (int k : cand.corners)
      if (keep(p.ev(j, k), s.ev(j, k))) m.add_variable(VarKind::EV, j, k, -1, pair_coef(p.ev(j, k), s.ev(j, k)));
  for (int i : cand.patches)
    for (int k : cand.corners)
      if (keep(p.fv(i, k), s.fv(i, k))) m.add_variable(VarKind::FV, i, k, -1, pair_coef(p.fv(i, k), s.fv(i, k)));
  for (int i : cand.patches)
    for (int j : cand.curves) {
      if (m.find(VarKind::FE, i, j) < 0) continue;
      for (int k : cand.corners)
        if (m.find(VarKind::EV, j, k) >= 0) m.add_variable(VarKind::Z, i, j, k, 0.0);
    }

  // Each existing edge borders exactly two faces.
  for (int j : cand.curves) {
    std::vector<LinearTerm> t;
    for (int i : cand.patches)
      if (int fe = m.find(VarKind::FE, i, j); fe >= 0) t.push_back({fe, 1.0});
    t.push_back({m.find(VarKind::E, j), -2.0});
    m.add_constraint(std::move(t), Sense::Equal, 0.0);
  }

  // Y = E * O; open edges have two endpoints, closed ones none.
  for (int j : cand.curves) {
    int y = m.find(VarKind::Y, j), e = m.find(VarKind::E, j), op = m.find(VarKind::O, j);
    m.add_constraint({{y, 1.0}, {e, -1.0}}, Sense::LessEqual, 0.0);
    m.add_constraint({{y, 1.0}, {op, -1.0}}, Sense::LessEqual, 0.0);
    m.add_constraint({{y, 1.0}, {e, -1.0}, {op, -1.0}}, Sense::GreaterEqual, -1.0);
    std::vector<LinearTerm> t;
    for (int k : cand.corners)
      if (int ev = m.find(VarKind::EV, j, k); ev >= 0) t.push_back({ev, 1.0});
    t.push_back({y, -2.0});
    m.add_constraint(std::move(t), Sense::Equal, 0.0);
  }

  // Z = FE * EV and the boundary-of-boundary closure sum_j Z = 2 FV.
  for (int i : cand.patches)
    for (int k : cand.corners) {
      std::vector<LinearTerm> closure;
      for (int j : cand.curves) {
        int z = m.find(VarKind::Z, i, j, k);
        if (z < 0) continue;
        int fe = m.find(VarKind::FE, i, j), ev = m.find(VarKind::EV, j, k);
        m.add_constraint({{z, 1.0}, {fe, -1.0}}, Sense::LessEqual, 0.0);
        m.add_constraint({{z, 1.0}, {ev, -1.0}}, Sense::LessEqual, 0.0);
        m.add_constraint({{z, 1.0}, {fe, -1.0}, {ev, -1.0}}, Sense::GreaterEqual, -1.0);
        closure.push_back({z, 1.0});
      }
      int fv = m.find(VarKind::FV, i, k);
      if (fv >= 0) closure.push_back({fv, -2.0});
      if (!closure.empty()) m.add_constraint(std::move(closure), Sense::Equal, 0.0);
    }

  // FE <= F <= sum FE (the right side waived for predicted-closed patches).
  for (int i : cand.patches) {
    int f = m.find(VarKind::F, i);
    std::vector<LinearTerm> support{{f, 1.0}};
    for (int j : cand.curves) {
      int fe = m.find(VarKind::FE, i, j);
      if (fe < 0) continue;
      m.add_constraint({{fe, 1.0}, {f, -1.0}}, Sense::LessEqual, 0.0);
      support.push_back({fe, -1.0});
    }
    if (p.patches[i].u_closed < 0.5) m.add_constraint(std::move(support), Sense::LessEqual, 0.0);
  }

  // EV <= V <= sum EV.
  for (int k : cand.corners) {
    int v = m.find(VarKind::V, k);
    std::vector<LinearTerm> support{{v, 1.0}};
    for (int j : cand.curves) {
      int ev = m.find(VarKind::EV, j, k);
      if (ev < 0) continue;
      m.add_constraint({{ev, 1.0}, {v, -1.0}}, Sense::LessEqual, 0.0);
      support.push_back({ev, -1.0});
    }
    m.add_constraint(std::move(support), Sense::LessEqual, 0.0);
  }
  return built;
}

}  // namespace brepchain
