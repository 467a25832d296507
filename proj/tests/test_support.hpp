#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pqlap/domain_mesh.hpp"
#include "pqlap/problem_model.hpp"

namespace pqlap::test {

inline DomainSpec unit_interval(double padding = 0.0) { return DomainSpec{1, {0.0, 0.0}, {1.0, 1.0}, padding}; }

inline DomainSpec interval(double a, double b, double padding = 0.0) {
  return DomainSpec{1, {a, 0.0}, {b, 1.0}, padding};
}

inline DomainSpec unit_square(double padding = 0.0) { return DomainSpec{2, {0.0, 0.0}, {1.0, 1.0}, padding}; }

// p = q = 2, α1 = β2 = -1/2, α2 = β1 = 1/2: Θ = 2.
inline ProblemParams positive_theta_reference() { return ProblemParams{}; }

// Same with β1 = α2 = 3/2: Θ = 0.
inline ProblemParams zero_theta_reference() {
  ProblemParams p;
  p.beta1 = 1.5;
  p.alpha2 = 1.5;
  return p;
}

struct EigenOracleRow {
  double r, L, shooting, closed_form;
};

inline std::vector<EigenOracleRow> eigen_oracle() {
  std::ifstream in(std::string(PQLAP_FIXTURE_DIR) + "/plap_eigen_oracle.txt");
  std::vector<EigenOracleRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    EigenOracleRow r{};
    s >> r.r >> r.L >> r.shooting >> r.closed_form;
    rows.push_back(r);
  }
  return rows;
}

inline double eigen_oracle_value(double r, double L) {
  for (const auto& row : eigen_oracle())
    if (row.r == r && row.L == L) return row.shooting;
  return 0.0;
}

// name -> u at x = 0.125, 0.25, 0.5
inline std::map<std::string, std::vector<double>> fd_oracle() {
  std::ifstream in(std::string(PQLAP_FIXTURE_DIR) + "/fd_oracle.txt");
  std::map<std::string, std::vector<double>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream s(line);
    std::string name;
    s >> name;
    double v;
    while (s >> v) out[name].push_back(v);
  }
  return out;
}

// Value of a 1D P1 field at a node coordinate that is a mesh node.
inline double value_at(const Field& f, double x) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.mesh().node(i)[0] - x) < 1e-12) return f[i];
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace pqlap::test
