#include "brepchain/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

namespace brepchain {

namespace {

std::string coef(double c) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%+.17g", c);
  return buf;
}

/// CPLEX LP caps line length; wrap long rows.
void append_term(std::string& out, size_t& line_len, const std::string& term) {
  if (line_len + term.size() > 200) {
    out += "\n   ";
    line_len = 3;
  }
  out += term;
  line_len += term.size();
}

}  // namespace

std::string lp_text(const IlpModel& model) {
  std::string out = "\\ brepchain extraction model: " + std::to_string(model.num_variables()) + " binaries, " +
                    std::to_string(model.num_constraints()) + " constraints\n";
  out += "Maximize\n obj:";
  size_t len = 5;
  bool any = false;
  for (int v = 0; v < model.num_variables(); ++v) {
    double c = model.variables()[static_cast<size_t>(v)].objective;
    if (c == 0.0) continue;
    append_term(out, len, " " + coef(c) + " " + model.name(v));
    any = true;
  }
  if (!any && model.num_variables() > 0) out += " 0 " + model.name(0);
  out += "\nSubject To\n";
  for (int k = 0; k < model.num_constraints(); ++k) {
    const auto& con = model.constraints()[static_cast<size_t>(k)];
    std::string row = " c" + std::to_string(k) + ":";
    len = row.size();
    out += row;
    for (const auto& t : con.terms) append_term(out, len, " " + coef(t.coef) + " " + model.name(t.var));
    if (con.terms.empty()) out += " 0 " + model.name(0);
    const char* sense = con.sense == Sense::LessEqual ? " <= " : con.sense == Sense::Equal ? " = " : " >= ";
    char rhs[40];
    std::snprintf(rhs, sizeof rhs, "%.17g", con.rhs);
    out += sense + std::string(rhs) + "\n";
  }
  out += "Binary\n";
  for (int v = 0; v < model.num_variables(); ++v) out += " " + model.name(v) + "\n";
  out += "End\n";
  return out;
}

std::vector<std::uint8_t> parse_lp_solution(const IlpModel& model, std::string_view text) {
  std::unordered_map<std::string, int> index;
  for (int v = 0; v < model.num_variables(); ++v) index.emplace(model.name(v), v);
  std::vector<std::uint8_t> x(static_cast<size_t>(model.num_variables()), 0);
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    // The first known variable name on a line is followed by its value.
    for (size_t i = 0; i + 1 < tok.size(); ++i) {
      auto it = index.find(tok[i]);
      if (it == index.end()) continue;
      const std::string locus = "line " + std::to_string(lineno);
      double value = 0.0;
      size_t used = 0;
      try {
        value = std::stod(tok[i + 1], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok[i + 1].size()) throw ParseError(locus, "bad value '" + tok[i + 1] + "' for " + tok[i]);
      double r = std::round(value);
      if (std::abs(value - r) > 1e-6 || (r != 0.0 && r != 1.0))
        throw ParseError(locus, tok[i] + " = " + tok[i + 1] + " is not binary");
      x[static_cast<size_t>(it->second)] = r == 1.0 ? 1 : 0;
      break;
    }
  }
  return x;
}

}  // namespace brepchain
