#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pqlap/domain_mesh.hpp"
#include "pqlap/plaplace_core.hpp"
#include "pqlap/problem_model.hpp"

namespace pqlap {

/// Exponents of the auxiliary singular problems: θ1 in (max{-1, α1}, 0),
/// θ2 in (max{-1, β2}, 0), δ < min{(p-1)/θ1, k(q-1)/θ2} < 0.
struct AuxExponents {
  double theta1 = -0.25;
  double theta2 = -0.25;
  double delta = -8.0;
};

/// Midpoint θ's and δ = 2 min{(p-1)/θ1, k(q-1)/θ2}; explicit values replace the defaults.
AuxExponents aux_exponents(const ProblemParams& params, const Classification& cls,
                           std::optional<double> theta1 = std::nullopt, std::optional<double> theta2 = std::nullopt,
                           std::optional<double> delta = std::nullopt);

struct ComparisonConstants {
  double l1 = 0.0, l2 = 0.0;    // range of φq/φp over interior nodes
  double l = 0.0;               // min of min(φp, φq)/dist over interior nodes
  double M = 0.0;               // max of φp, φq
  double mu = 0.0;              // min of φp, φq away from the boundary strip
  double rho = 0.0;             // min of the enlarged-domain eigenfunctions on the closed domain
  double c1 = 0.0, c2 = 0.0;    // range of ξ1/(C^δ φ̃p) over enlarged interior nodes
  double c1p = 0.0, c2p = 0.0;  // same for ξ2/(C^δ φ̃q)
  AuxExponents aux;
  double C = 0.0;
};

/// Enlarged-domain fields are on their own mesh; φ fields and the strip on the domain mesh.
ComparisonConstants fit_comparison_constants(const EigenPair& eigp, const EigenPair& eigq, const EigenPair& eigp_tilde,
                                             const EigenPair& eigq_tilde, const Field& xi1, const Field& xi2,
                                             const RegionMask& strip, const AuxExponents& aux, double C);

std::string format_constants(const ComparisonConstants& k);

struct BarrierPair {
  Field lower_u, lower_v, upper_u, upper_v;
  double C = 2.0;
  double k = 1.0;
  int sigma = 0;
  double gamma = 2.0;

  double eps0() const;
};

/// (C^σ φp^γ, C^{σk} φq^γ).
std::pair<Field, Field> build_subsolution(const ProblemParams& params, const Classification& cls, const EigenPair& eigp,
                                          const EigenPair& eigq, double C);

/// C^{-δ}(ξ1, ξ2) transferred to the domain mesh. Throws if a transferred value is not positive.
std::pair<Field, Field> build_supersolution(const AuxExponents& aux, double C, const Field& xi1, const Field& xi2,
                                            const MeshPtr& mesh);

/// Worst nodal margin of one inequality, split between the boundary strip and the rest.
/// Margins are oriented so that >= 0 means satisfied.
struct InequalityMargin {
  std::string name;
  bool in_verdict = true;
  double strip_worst = 0.0;
  std::size_t strip_node = 0;
  bool strip_empty = true;
  double bulk_worst = 0.0;
  std::size_t bulk_node = 0;
  bool bulk_empty = true;

  double worst() const;
  std::size_t worst_node() const;
};

struct BarrierCertificate {
  std::vector<InequalityMargin> margins;
  double eps_sub = 0.0;    // ε at which the subsolution was checked
  double eps0 = 0.0;       // upper end of the certified ε range [0, ε0]
  double C = 0.0;
  double lambda = 0.0;
  bool pass = false;

  const InequalityMargin* worst() const;  // worst margin that enters the verdict
};

inline constexpr double kMarginTol = 1e-10;

/// Weak sub/supersolution inequalities tested against nonnegative hat functions
/// of interior nodes: subsolution at ε = eps, supersolution at ε = 0, plus
/// nodal ordering and positivity of the lower fields. Requires 0 <= eps <= ε0.
BarrierCertificate certify_barriers(const ProblemParams& params, double lambda, const BarrierPair& barriers, double eps,
                                    const std::optional<RegionMask>& strip = std::nullopt);

/// λ1 φ^r - |∇φ|^r <= 0 on the strip, reported as margins that do not enter any verdict.
std::vector<InequalityMargin> strip_diagnostics(const EigenPair& eigp, const EigenPair& eigq, const RegionMask& strip);

std::string format_certificate(const BarrierCertificate& cert, const Mesh& mesh);

struct BarrierOptions {
  std::optional<double> theta1, theta2, aux_delta;
  std::optional<double> strip_width;  // default 4 h
  int c_max_exponent = 30;            // C in {2, 4, ..., 2^c_max_exponent}
  double fixed_C = 2.0;               // used when Θ = 0
  double lambda_grid_ratio = 1.189207115002721;  // 2^{1/4}
  int lambda_grid_steps = 120;
  double lambda_grid_start = 1e-3;    // relative to λ1,p
  EigenOptions eigen;
  AuxiliaryOptions auxiliary;
};

/// Everything the barrier search needs that does not depend on C or λ.
/// The auxiliary fields are solved once with unit amplitude; other amplitudes
/// follow from the exact homothety ξ_A = A^{1/(r-1-θ)} ξ_1.
struct BarrierSetup {
  DomainSpec domain;
  int n = 0;
  MeshPtr mesh, tilde_mesh;
  EigenPair eigp, eigq, eigp_tilde, eigq_tilde;
  AuxExponents aux;
  Field xi1_unit, xi2_unit;
  double strip_width = 0.0;
  std::optional<RegionMask> strip;
};

BarrierSetup prepare_barriers(const DomainSpec& domain, int n, const ProblemParams& params, const Classification& cls,
                              const BarrierOptions& options = {});

/// ξ1, ξ2 on the enlarged mesh for amplitudes C^{δ(p-1)}, C^{δ(q-1)}.
std::pair<Field, Field> auxiliary_fields(const BarrierSetup& setup, const ProblemParams& params, double C);

BarrierPair make_barriers(const BarrierSetup& setup, const ProblemParams& params, const Classification& cls, double C);

struct SelectionResult {
  bool found = false;
  double C = 0.0;
  double lambda = 0.0;
  std::optional<BarrierPair> barriers;
  BarrierCertificate certificate;  // passing one, or the best failing one
  std::vector<std::pair<double, double>> trials;  // (C or λ, worst verdict margin)
  std::vector<InequalityMargin> diagnostics;
  std::string message;
  // Θ = 0 only: the λ range allowed by the sub- and supersolution inequalities
  // at this C, solved exactly since every margin is affine in λ.
  double lambda_sub_min = 0.0;
  double lambda_super_max = 0.0;
};

/// |Θ| > 0: first C = 2^j passing the certificate at ε = ε0 (subsolution) and ε = 0.
SelectionResult select_C(const BarrierSetup& setup, const ProblemParams& params, const Classification& cls,
                         double lambda, const BarrierOptions& options = {});

/// Θ = 0: C is fixed and the smallest passing λ on a geometric grid is returned.
SelectionResult select_lambda_min(const BarrierSetup& setup, const ProblemParams& params, const Classification& cls,
                                  const BarrierOptions& options = {});

}  // namespace pqlap
