#include "qvpn/quantum_math.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qvpn/errors.hpp"
#include "qvpn/format.hpp"

namespace qvpn {

BellDiagonalState BellDiagonalState::werner(double fidelity) {
  const double rest = (1.0 - fidelity) / 3.0;
  return BellDiagonalState{{fidelity, rest, rest, rest}};
}

void BellDiagonalState::validate() const {
  double sum = 0.0;
  for (double c : coeffs) {
    if (!(c >= 0.0)) throw std::invalid_argument("Bell-diagonal coefficient is negative");
    sum += c;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("Bell-diagonal coefficients do not sum to 1");
}

void NoiseParams::validate() const {
  auto unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!unit(two_qubit_gate_fidelity) || !unit(measurement_fidelity) || !unit(swap_success_prob))
    throw std::invalid_argument("noise parameters must lie in (0,1]");
}

double swap_chain_fidelity(double link_fidelity, int num_links, const NoiseParams& noise) {
  if (num_links < 1) throw std::domain_error("swap chain needs at least one link");
  const double eta = noise.measurement_fidelity;
  const double swap_factor = noise.two_qubit_gate_fidelity * (4.0 * eta * eta - 1.0) / 3.0;
  const double link_factor = (4.0 * link_fidelity - 1.0) / 3.0;
  return 0.25 + 0.75 * std::pow(swap_factor, num_links - 1) * std::pow(link_factor, num_links);
}

double swap_chain_fidelity(std::span<const double> link_fidelities, const NoiseParams& noise) {
  if (link_fidelities.empty()) throw std::domain_error("swap chain needs at least one link");
  const double eta = noise.measurement_fidelity;
  const double swap_factor = noise.two_qubit_gate_fidelity * (4.0 * eta * eta - 1.0) / 3.0;
  double product = std::pow(swap_factor, static_cast<int>(link_fidelities.size()) - 1);
  for (double f : link_fidelities) product *= (4.0 * f - 1.0) / 3.0;
  return 0.25 + 0.75 * product;
}

PurifyOutcome purify_step(const BellDiagonalState& a, const BellDiagonalState& b) {
  const auto& [a1, b1, c1, d1] = a.coeffs;
  const auto& [a2, b2, c2, d2] = b.coeffs;
  const double p = (a1 + b1) * (a2 + b2) + (c1 + d1) * (c2 + d2);
  if (!(p >= 1e-12)) throw std::domain_error("purification success probability below 1e-12");
  PurifyOutcome out;
  out.success_prob = p;
  out.state.coeffs = {(a1 * a2 + b1 * b2) / p, (c1 * d2 + d1 * c2) / p,
                      (c1 * c2 + d1 * d2) / p, (a1 * b2 + b1 * a2) / p};
  return out;
}

OverheadResult purification_overhead(double input_fidelity, double target_fidelity,
                                     int max_rounds) {
  OverheadResult result;
  result.achieved_fidelity = input_fidelity;
  if (input_fidelity >= target_fidelity - kFidelityTolerance) return result;

  if (!(input_fidelity > 0.25 && input_fidelity <= 1.0)) {
    result.overhead = std::numeric_limits<double>::infinity();
    result.feasible = false;
    return result;
  }
  BellDiagonalState state = BellDiagonalState::werner(input_fidelity);
  double overhead = 1.0;
  for (int round = 1; round <= max_rounds; ++round) {
    const auto step = purify_step(state, state);
    state = step.state;
    overhead *= 2.0 / step.success_prob;
    if (state.fidelity() >= target_fidelity - kFidelityTolerance) {
      result.overhead = overhead;
      result.rounds = round;
      result.achieved_fidelity = state.fidelity();
      return result;
    }
  }
  result.overhead = std::numeric_limits<double>::infinity();
  result.rounds = max_rounds;
  result.achieved_fidelity = state.fidelity();
  result.feasible = false;
  return result;
}

PathOverhead path_overhead(std::span<const double> link_fidelities,
                           const DistillationStrategy& strategy, double user_threshold,
                           const NoiseParams& noise) {
  PathOverhead out;
  out.per_link.assign(link_fidelities.size(), std::numeric_limits<double>::infinity());
  if (link_fidelities.empty()) return out;

  std::vector<double> link_level(link_fidelities.size(), 1.0);
  std::vector<double> effective(link_fidelities.size());
  for (std::size_t i = 0; i < link_fidelities.size(); ++i) {
    const double f = link_fidelities[i];
    if (f >= strategy.link_threshold - kFidelityTolerance) {
      effective[i] = f;
      continue;
    }
    const auto g = purification_overhead(f, strategy.link_threshold, strategy.max_rounds);
    if (!g.feasible) return out;
    link_level[i] = g.overhead;
    effective[i] = strategy.link_threshold;
  }
  out.end_to_end_fidelity = swap_chain_fidelity(effective, noise);
  const auto e2e =
      purification_overhead(out.end_to_end_fidelity, user_threshold, strategy.max_rounds);
  out.e2e_rounds = e2e.rounds;
  if (!e2e.feasible) return out;
  for (std::size_t i = 0; i < link_level.size(); ++i) out.per_link[i] = link_level[i] * e2e.overhead;
  out.feasible = true;
  return out;
}

OverheadResult path_overhead_per_link(double link_fidelity, int path_length_links,
                                      const DistillationStrategy& strategy,
                                      double user_threshold, const NoiseParams& noise) {
  if (path_length_links < 1) throw std::domain_error("path needs at least one link");
  const std::vector<double> fids(static_cast<std::size_t>(path_length_links), link_fidelity);
  const auto path = path_overhead(fids, strategy, user_threshold, noise);
  OverheadResult r;
  r.feasible = path.feasible;
  r.overhead = path.per_link.front();
  r.rounds = path.e2e_rounds;
  if (path.feasible) {
    const auto e2e = purification_overhead(path.end_to_end_fidelity, user_threshold,
                                           strategy.max_rounds);
    r.achieved_fidelity = e2e.achieved_fidelity;
  } else {
    r.achieved_fidelity = path.end_to_end_fidelity;
  }
  return r;
}

StrategyCatalog::StrategyCatalog(std::vector<double> thresholds, int max_rounds)
    : thresholds_(std::move(thresholds)), max_rounds_(max_rounds) {
  if (thresholds_.empty()) throw ValidationError("strategy catalog is empty");
  if (max_rounds_ < 1) throw ValidationError("strategy max_rounds must be positive");
  for (std::size_t i = 0; i < thresholds_.size(); ++i) {
    const double t = thresholds_[i];
    if (!(t > 0.25 && t < 1.0))
      throw ValidationError("strategy threshold " + format_double(t) + " outside (0.25,1)");
    if (i > 0 && !(t > thresholds_[i - 1]))
      throw ValidationError("strategy thresholds must be strictly ascending");
  }
}

StrategyCatalog StrategyCatalog::uniform_default(std::size_t count) {
  constexpr std::size_t kGrid = 16;
  constexpr double kLow = 0.8;
  constexpr double kHigh = 0.998;
  if (count < 1 || count > kGrid)
    throw ValidationError("default strategy count must lie in [1,16]");
  auto grid = [](std::size_t i) {
    return kLow + (kHigh - kLow) * static_cast<double>(i) / static_cast<double>(kGrid - 1);
  };
  // Grid indices in refinement order; every prefix keeps the top point.
  constexpr std::array<std::size_t, kGrid> kOrder{15, 0, 5, 10, 2, 7, 12, 1,
                                                  3, 4, 6, 8, 9, 11, 13, 14};
  std::vector<std::size_t> picked(kOrder.begin(), kOrder.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(picked.begin(), picked.end());
  std::vector<double> out;
  for (auto idx : picked) out.push_back(grid(idx));
  return StrategyCatalog(std::move(out));
}

std::size_t StrategyCatalog::nearest(double value) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < thresholds_.size(); ++i) {
    if (std::abs(thresholds_[i] - value) <= std::abs(thresholds_[best] - value)) best = i;
  }
  return best;
}

StrategyCatalog load_strategy_catalog(std::istream& in) {
  std::vector<double> values;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto tok = tokenize_line(raw);
    if (tok.empty()) continue;
    if (tok.size() != 1) throw ParseError("expected one threshold per line", lineno);
    values.push_back(parse_double(tok[0], "threshold", lineno));
  }
  return StrategyCatalog(std::move(values));
}

StrategyCatalog load_strategy_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open strategy file '" + path.string() + "'");
  return load_strategy_catalog(in);
}

void save_strategy_catalog(std::ostream& out, const StrategyCatalog& catalog) {
  for (double t : catalog.thresholds()) out << format_double(t) << '\n';
}

}  // namespace qvpn
