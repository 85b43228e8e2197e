#include "extraction/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brepchain::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr int kDegenerateSwitch = 50;

}  // namespace

Simplex::Simplex(Problem problem) : p_(std::move(problem)), m_(static_cast<int>(p_.rows.size())), nv_(p_.num_vars) {}

void Simplex::compute_reduced() {
  reduced_.assign(static_cast<size_t>(n_), 0.0);
  for (int j = 0; j < n_; ++j) {
    if (row_of_[j] >= 0) continue;
    double d = cost_[j];
    for (int r = 0; r < m_; ++r) d -= cost_[basis_[r]] * at(r, j);
    reduced_[j] = d;
  }
}

void Simplex::pivot(int pr, int pc) {
  const double inv = 1.0 / at(pr, pc);
  // Only the nonzero columns of the pivot row change other rows.
  std::vector<int> nz;
  for (int c = 0; c < n_; ++c) {
    double& v = at(pr, c);
    if (v == 0.0) continue;
    v *= inv;
    nz.push_back(c);
  }
  at(pr, pc) = 1.0;
  for (int r = 0; r < m_; ++r) {
    if (r == pr) continue;
    double f = at(r, pc);
    if (f == 0.0) continue;
    double* row = &at(r, 0);
    const double* prow = &at(pr, 0);
    for (int c : nz) row[c] -= f * prow[c];
    row[pc] = 0.0;
  }
  double f = reduced_[pc];
  if (f != 0.0)
    for (int c : nz) reduced_[c] -= f * at(pr, c);
  reduced_[pc] = 0.0;
  int leaving = basis_[pr];
  row_of_[leaving] = -1;
  basis_[pr] = pc;
  row_of_[pc] = pr;
}

Simplex::Outcome Simplex::primal(long& iterations, long limit) {
  int degenerate = 0;
  while (true) {
    if (iterations >= limit) return Outcome::Limit;
    int enter = -1;
    double best = 0.0;
    const bool bland = degenerate > kDegenerateSwitch;
    for (int j = 0; j < n_; ++j) {
      if (row_of_[j] >= 0 || hi_[j] - lo_[j] <= 0.0) continue;
      double d = reduced_[j];
      bool at_lo = value_[j] <= lo_[j];
      double gain = at_lo ? d : -d;
      if (gain <= kCostTol) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (gain > best) {
        best = gain;
        enter = j;
      }
    }
    if (enter < 0) return Outcome::Optimal;
    ++iterations;
    const double dir = value_[enter] <= lo_[enter] ? 1.0 : -1.0;

    // Ratio test; basic r moves by -tab(r, enter) * dir * step.
    double step = hi_[enter] - lo_[enter];
    int leave_row = -1;
    double leave_mag = 0.0;
    for (int r = 0; r < m_; ++r) {
      double a = at(r, enter) * dir;
      if (std::abs(a) <= kPivotTol) continue;
      int b = basis_[r];
      double limit_r;
      if (a > 0) {
        if (lo_[b] == -kInf) continue;
        limit_r = (value_[b] - lo_[b]) / a;
      } else {
        if (hi_[b] == kInf) continue;
        limit_r = (hi_[b] - value_[b]) / -a;
      }
      limit_r = std::max(limit_r, 0.0);
      // Ties go to the larger pivot element.
      if (limit_r < step - 1e-12) {
        step = limit_r;
        leave_row = r;
        leave_mag = std::abs(a);
      } else if (leave_row >= 0 && limit_r <= step + 1e-12 && std::abs(a) > leave_mag) {
        step = std::min(step, limit_r);
        leave_row = r;
        leave_mag = std::abs(a);
      }
    }
    if (step == kInf) return Outcome::Optimal;  // cannot happen with bounded structurals
    degenerate = step <= 1e-12 ? degenerate + 1 : 0;

    value_[enter] += dir * step;
    for (int r = 0; r < m_; ++r) value_[basis_[r]] -= at(r, enter) * dir * step;
    if (leave_row < 0) continue;  // bound flip
    int leaving = basis_[leave_row];
    double a = at(leave_row, enter) * dir;
    value_[leaving] = a > 0 ? lo_[leaving] : hi_[leaving];
    pivot(leave_row, enter);
  }
}

// Restores primal feasibility while keeping reduced costs optimal.
Simplex::Outcome Simplex::dual(long& iterations, long limit) {
  while (true) {
    int r = -1;
    double worst = kFeasTol;
    for (int q = 0; q < m_; ++q) {
      const int b = basis_[q];
      const double viol = std::max(lo_[b] - value_[b], value_[b] - hi_[b]);
      if (viol > worst) {
        worst = viol;
        r = q;
      }
    }
    if (r < 0) return Outcome::Optimal;
    if (iterations >= limit) return Outcome::Limit;
    ++iterations;
    const int b = basis_[r];
    const bool up = value_[b] < lo_[b];
    const double target = up ? lo_[b] : hi_[b];

    int enter = -1;
    double best_ratio = kInf, best_mag = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (row_of_[j] >= 0 || hi_[j] - lo_[j] <= 0.0) continue;
      const double a = at(r, j);
      if (std::abs(a) <= kPivotTol) continue;
      const double dir = value_[j] <= lo_[j] ? 1.0 : -1.0;
      const double effect = -a * dir;  // change of the basic per unit move
      if (up ? effect <= 0 : effect >= 0) continue;
      const double ratio = std::abs(reduced_[j]) / std::abs(a);
      if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_mag)) {
        best_ratio = ratio;
        best_mag = std::abs(a);
        enter = j;
      }
    }
    if (enter < 0) return Outcome::Infeasible;
    const double delta = (target - value_[b]) / -at(r, enter);
    value_[enter] += delta;
    for (int q = 0; q < m_; ++q) value_[basis_[q]] -= at(q, enter) * delta;
    value_[b] = target;
    pivot(r, enter);
  }
}

Result Simplex::result(long iterations) {
  Result res;
  res.iterations = iterations;
  res.x.assign(value_.begin(), value_.begin() + nv_);
  for (auto& v : res.x) v = std::min(1.0, std::max(0.0, v));
  for (int j = 0; j < nv_; ++j) res.objective += p_.objective[static_cast<size_t>(j)] * value_[j];
  return res;
}

Result Simplex::solve(const std::vector<double>& lo, const std::vector<double>& hi) {
  warm_ = false;
  const int m = m_, nv = nv_;
  // Structurals start at their lower bound; rows whose slack then starts
  // feasible need no artificial column.
  std::vector<double> residual(static_cast<size_t>(m));
  int n_slack = 0, n_art = 0;
  std::vector<int> art_of(static_cast<size_t>(m), -1);
  for (int r = 0; r < m; ++r) {
    const auto& row = p_.rows[static_cast<size_t>(r)];
    double res = row.rhs;
    for (const auto& t : row.terms) res -= t.coef * lo[static_cast<size_t>(t.var)];
    residual[static_cast<size_t>(r)] = res;
    if (row.sense != Sense::Equal) ++n_slack;
    const bool slack_ok =
        (row.sense == Sense::LessEqual && res >= 0) || (row.sense == Sense::GreaterEqual && res <= 0);
    if (!slack_ok) art_of[static_cast<size_t>(r)] = n_art++;
  }
  n_ = nv + n_slack + n_art;
  const int n = n_;
  tab_.assign(static_cast<size_t>(m) * n, 0.0);
  lo_.assign(static_cast<size_t>(n), 0.0);
  hi_.assign(static_cast<size_t>(n), 0.0);
  value_.assign(static_cast<size_t>(n), 0.0);
  row_of_.assign(static_cast<size_t>(n), -1);
  basis_.assign(static_cast<size_t>(m), -1);
  for (int j = 0; j < nv; ++j) {
    lo_[j] = lo[static_cast<size_t>(j)];
    hi_[j] = hi[static_cast<size_t>(j)];
    value_[j] = lo_[j];
  }

  int slack = nv;
  for (int r = 0; r < m; ++r) {
    const auto& row = p_.rows[static_cast<size_t>(r)];
    for (const auto& term : row.terms) at(r, term.var) += term.coef;
    const double res = residual[static_cast<size_t>(r)];
    int basic = -1;
    double sign = 1.0;
    if (row.sense != Sense::Equal) {
      at(r, slack) = 1.0;
      if (row.sense == Sense::LessEqual) {
        hi_[slack] = kInf;
        if (res >= 0) basic = slack;
      } else {
        lo_[slack] = -kInf;
        if (res <= 0) basic = slack;
      }
      ++slack;
    }
    if (basic < 0) {
      const int art = nv + n_slack + art_of[static_cast<size_t>(r)];
      sign = res < 0 ? -1.0 : 1.0;
      at(r, art) = sign;
      hi_[art] = res != 0.0 ? kInf : 0.0;
      basic = art;
    }
    if (sign < 0)
      for (int c = 0; c < n; ++c) at(r, c) = -at(r, c);
    basis_[r] = basic;
    row_of_[basic] = r;
    value_[basic] = res * sign;
  }

  long iterations = 0;
  const long limit = 200L * (m + n) + 1000;
  Result fail;

  // Phase 1: drive artificials to zero.
  cost_.assign(static_cast<size_t>(n), 0.0);
  bool need_phase1 = false;
  for (int art = nv + n_slack; art < n; ++art)
    if (hi_[art] > 0) {
      cost_[art] = -1.0;
      need_phase1 = true;
    }
  if (need_phase1) {
    compute_reduced();
    if (primal(iterations, limit) != Outcome::Optimal) {
      fail.status = Status::IterationLimit;
      return fail;
    }
    double infeas = 0.0;
    for (int art = nv + n_slack; art < n; ++art) infeas += value_[art];
    if (infeas > 1e-7) {
      fail.status = Status::Infeasible;
      return fail;
    }
    for (int art = nv + n_slack; art < n; ++art) {
      hi_[art] = 0.0;
      value_[art] = 0.0;
    }
  }

  // Phase 2.
  cost_.assign(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < nv; ++j) cost_[j] = p_.objective[static_cast<size_t>(j)];
  compute_reduced();
  if (primal(iterations, limit) != Outcome::Optimal) {
    fail.status = Status::IterationLimit;
    return fail;
  }
  warm_ = true;
  return result(iterations);
}

Result Simplex::fix(const std::vector<std::pair<int, double>>& fixes) {
  if (!warm_) {
    std::vector<double> lo(lo_.begin(), lo_.begin() + nv_), hi(hi_.begin(), hi_.begin() + nv_);
    for (const auto& [j, v] : fixes) lo[static_cast<size_t>(j)] = hi[static_cast<size_t>(j)] = v;
    return solve(lo, hi);
  }
  for (const auto& [j, v] : fixes) {
    if (row_of_[j] < 0) {
      const double delta = v - value_[j];
      if (delta != 0.0) {
        value_[j] = v;
        for (int q = 0; q < m_; ++q) value_[basis_[q]] -= at(q, j) * delta;
      }
    }
    lo_[j] = hi_[j] = v;
  }
  long iterations = 0;
  const long limit = 20L * (m_ + n_) + 1000;
  Outcome o = dual(iterations, limit);
  if (o == Outcome::Optimal) o = primal(iterations, limit);
  if (o == Outcome::Infeasible) {
    warm_ = false;
    Result r;
    r.status = Status::Infeasible;
    return r;
  }
  if (o == Outcome::Limit) {
    std::vector<double> lo(lo_.begin(), lo_.begin() + nv_), hi(hi_.begin(), hi_.begin() + nv_);
    return solve(lo, hi);
  }
  return result(iterations);
}

Result solve(const Problem& problem) {
  Simplex s(problem);
  return s.solve(std::vector<double>(static_cast<size_t>(problem.num_vars), 0.0),
                 std::vector<double>(static_cast<size_t>(problem.num_vars), 1.0));
}

}  // namespace brepchain::lp
