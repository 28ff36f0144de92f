#pragma once

#include <optional>
#include <string>
#include <vector>

#include "brw/spectral.hpp"

namespace brw {

/// Lower branch W_{-1} of the Lambert function: W e^W = x with W <= -1.
/// DomainError outside [-1/e, 0).
double lambert_w_lower(double x);

enum class Quantity { GreenSmallLambda, GreenDeficit, Lambda0 };
enum class WalkClass { FiniteVariance, HeavyTail };

/// Leading-order shapes. With u the law variable:
///   Power         v ~ c u^p
///   Linear        v ~ c u
///   PowerTimesLog v ~ c u^p ln(1/u)^q
///   Log           v ~ c ln(1/u)
///   Exponential   v ~ exp(-c / u)
///   LambertW      v ~ exp(W_{-1}(-c u)), i.e. v ln v ~ -c u
enum class LawForm { Power, Linear, PowerTimesLog, Log, Exponential, LambertW };

/// lambda itself, the product N beta, or the excess beta - beta_c.
enum class LawVariable { Lambda, NBeta, BetaExcess };

struct AsymptoticLaw {
  Quantity quantity = Quantity::GreenSmallLambda;
  LawForm form = LawForm::Power;
  LawVariable variable = LawVariable::Lambda;
  double exponent = 0.0;
  int log_power = 0;
  std::optional<double> constant;  // set once fitted
  WalkClass walk_class = WalkClass::FiniteVariance;
  int dim = 0;
  std::optional<Rational> alpha;
  std::size_t sources = 1;
};

/// Regime table lookup. `alpha` is required for heavy tails and compared
/// exactly against the boundary values 1/2, 1, 3/2. UnsupportedRegime when no
/// law covers the combination.
AsymptoticLaw predicted_law(Quantity quantity, WalkClass walk_class, int d, std::optional<Rational> alpha,
                            std::size_t n_sources);
AsymptoticLaw predicted_law(Quantity quantity, const WalkSpec& walk, std::size_t n_sources);

struct PowerFit {
  double slope = 0.0;
  double constant = 0.0;  // exp(intercept)
  double r2 = 0.0;
};

/// Least squares of ln v on ln u. Needs at least 4 positive samples.
PowerFit fit_exponent(const std::vector<std::pair<double, double>>& samples);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit fit_linear(const std::vector<std::pair<double, double>>& samples);

/// Geometric grid from start to stop. For lambda laws the values are lambda;
/// for lambda0 they are beta / beta_c - 1 when beta_c > 0 and beta otherwise.
struct AsymptoteGrid {
  double start = 0.0;
  double stop = 0.0;
  int points = 0;

  std::vector<double> values() const;
};

struct AsymptoteReport {
  AsymptoticLaw law;
  double beta_c = 0.0;
  std::vector<double> u;  // law variable
  std::vector<double> v;  // computed quantity
  double predicted_exponent = 0.0;
  double fitted_exponent = 0.0;
  double difference = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  bool pass = false;
};

/// Computes the quantity on the grid, fits the predicted law and compares.
/// Power-type laws pass when |fitted - predicted| <= exponent_tol. Log,
/// Exponential and LambertW laws are fitted as linear relations over the last
/// decade of the grid (v against ln(1/u), -1/ln v against u, v ln v against
/// -u) and pass on r2 alone. InsufficientAsymptoticRange when r2 < 0.999.
AsymptoteReport check_asymptote(const WalkSpec& walk, const std::vector<Site>& sources, Quantity quantity,
                                const AsymptoteGrid& grid, double exponent_tol = 0.05);
AsymptoteReport check_asymptote(const std::shared_ptr<const GreenFunction>& green,
                                const std::vector<Site>& sources, Quantity quantity,
                                const AsymptoteGrid& grid, double exponent_tol = 0.05);

struct NDependenceRow {
  std::size_t n = 0;
  std::vector<double> beta;
  std::vector<double> ratio;  // lambda0(beta, N) / lambda0(N beta, 1), or the ratio of logs
  double worst_tail = 0.0;    // max |ratio - 1| over the smallest betas
  bool pass = false;
};

struct NDependenceReport {
  bool log_ratio = false;  // exponential regime compares ln lambda0
  std::vector<NDependenceRow> rows;
  bool pass = false;
};

/// For a recurrent walk, checks lambda0(beta, N) / lambda0(N beta, 1) -> 1 as
/// beta decreases. Sources for N are 0, s e1, ..., (N-1) s e1. The check uses
/// the `tail` smallest betas with tolerance `tol`.
NDependenceReport n_dependence_check(const WalkSpec& walk, const std::vector<double>& beta_grid,
                                     const std::vector<std::size_t>& n_list, long spacing = 5,
                                     double tol = 0.02, std::size_t tail = 3);

std::string to_string(Quantity q);
std::string to_string(LawForm f);
std::string to_string(LawVariable v);
Quantity parse_quantity(const std::string& text);

}  // namespace brw
