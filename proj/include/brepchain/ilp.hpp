#pragma once

// 0/1 integer linear programs: a small model container, the extraction model
// builder and a branch-and-bound solver.

#include "brepchain/types.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace brepchain {

struct ProbabilisticComplex;
struct ProximityMatrices;

enum class VarKind { F, E, O, V, FE, EV, FV, Y, Z };

std::string_view to_string(VarKind kind);

struct Variable {
  VarKind kind = VarKind::F;
  int i = -1, j = -1, k = -1;
  double objective = 0.0;
  /// Infinitesimal secondary objective used only for tie-breaking.
  double tiebreak = 0.0;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

/// Binary maximization problem.
class IlpModel {
 public:
  int add_variable(VarKind kind, int i, int j, int k, double objective, double tiebreak = 0.0);
  void add_constraint(std::vector<LinearTerm> terms, Sense sense, double rhs);

  /// Index of a registered variable or -1.
  int find(VarKind kind, int i, int j = -1, int k = -1) const;
  std::string name(int var) const;

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }

  double objective_value(std::span<const std::uint8_t> x) const;
  double tiebreak_value(std::span<const std::uint8_t> x) const;
  /// Exact check of every constraint; coefficients are small integers so a
  /// tolerance of 1e-9 is only a guard against representation noise.
  bool is_feasible(std::span<const std::uint8_t> x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::map<std::tuple<int, int, int, int>, int> index_;
};

struct IlpOptions {
  double w = 0.5;
  double unary_weight = 10.0;
  double binary_weight = 1.0;
  double validness_cutoff = 0.3;
  /// A face/edge, edge/vertex or face/vertex pair gets a variable only if its
  /// combined probability is at least 0.5 or its proximity fitness is at least
  /// this value. Zero keeps every pair.
  double pair_threshold = 0.05;
  double tiebreak_weight = 1e-7;
};

/// Candidate elements surviving the cutoff, as indices into the prediction.
struct IlpCandidates {
  std::vector<int> corners, curves, patches;
};

struct BuiltIlp {
  IlpModel model;
  IlpCandidates candidates;
};

/// Builds the linearized extraction program from combined probabilities and
/// proximity matrices. Variable indices (i, j, k) refer to the prediction's
/// element indices. Throws SolverError(EmptyCandidates) when nothing survives
/// the cutoff.
BuiltIlp build_ilp(const ProbabilisticComplex& p, const ProximityMatrices& s, const IlpOptions& options = {});

struct SolveOptions {
  double time_limit_s = 60.0;
  /// Connected components with at most this many variables are enumerated.
  int enumeration_limit = 20;
  bool force_branch_and_bound = false;
};

enum class SolveStatus { Optimal, TimeLimit };

struct IlpSolution {
  std::vector<std::uint8_t> x;
  double objective = 0.0;
  double bound = 0.0;  // upper bound on the objective
  double gap = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  long nodes = 0;
};

/// Maximizes the objective (ties broken by the secondary objective). Throws
/// SolverError(Infeasible) or SolverError(Timeout) when no incumbent exists.
IlpSolution solve_ilp(const IlpModel& model, const SolveOptions& options = {});

}  // namespace brepchain
