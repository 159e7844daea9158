#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "qvpn/policy_network.hpp"
#include "qvpn/problem_context.hpp"
#include "qvpn/random.hpp"

namespace qvpn {

/// Contiguous logit blocks, one per user pair; softmax is taken inside each block.
struct PolicyGroups {
  std::vector<std::size_t> offset;
  std::vector<std::size_t> size;

  std::size_t count() const noexcept { return offset.size(); }
  std::size_t total() const noexcept {
    return offset.empty() ? 0 : offset.back() + size.back();
  }
  static PolicyGroups uniform(std::size_t groups, std::size_t per_group);
};

/// Chosen logit indices (local to each group) per group.
struct Action {
  std::vector<std::vector<std::size_t>> chosen;
  bool operator==(const Action&) const = default;
};

std::vector<double> group_softmax(std::span<const double> logits, const PolicyGroups& groups);
/// Sum of per-group Shannon entropies (natural log).
double group_entropy(std::span<const double> probs, const PolicyGroups& groups);

/// Draws min(per_group, group size) distinct entries from each group, sequentially without
/// replacement from the renormalised remaining mass.
Action sample_action(std::span<const double> probs, const PolicyGroups& groups,
                     std::size_t per_group, Rng& rng);
/// Top-`per_group` probabilities per group (ties go to the lower index).
Action greedy_action(std::span<const double> probs, const PolicyGroups& groups,
                     std::size_t per_group);

/// Surrogate objective J = (r - b) * sum_{chosen a} log pi(a) + beta * H(pi), the
/// factorised REINFORCE-with-baseline estimator plus entropy regularisation.
double surrogate_objective(std::span<const double> logits, const PolicyGroups& groups,
                           const Action& action, double advantage, double beta);
/// dJ/dlogits in closed form.
std::vector<double> surrogate_logit_gradient(std::span<const double> probs,
                                             const PolicyGroups& groups, const Action& action,
                                             double advantage, double beta);

/// Per-state running mean of observed rewards.
class BaselineTable {
 public:
  void observe(const std::string& state, double reward);
  /// Throws std::out_of_range if the state was never observed.
  double baseline(const std::string& state) const;
  std::size_t visits(const std::string& state) const;

 private:
  struct Entry {
    std::size_t visits = 0;
    double total = 0.0;
  };
  std::map<std::string, Entry> entries_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double decay_base = 0.96;
  int decay_every = 500;
  double learning_rate_floor = 1e-4;
  double entropy_beta = 0.1;
  int batch_size = 8;
  int epochs = 2000;
  std::vector<std::size_t> hidden{128};
  std::uint64_t seed = 1;
  /// Greedy-policy reward is recorded every this many epochs (and at the last epoch).
  int eval_every = 10;

  void validate() const;
  double learning_rate_at(int epoch) const;
};

struct EpochStats {
  int epoch = 0;
  double mean_reward = 0.0;
  double baseline = 0.0;
  double learning_rate = 0.0;
  bool greedy_evaluated = false;
  double greedy_reward = 0.0;
};

/// Reward of an action; must be pure (may be called concurrently).
using Environment = std::function<double(const Action&)>;

struct RlSetup {
  PolicyGroups groups;
  std::size_t paths_per_group = 1;
  std::vector<double> state_input;
  std::string state_key;
};

struct TrainResult {
  PolicyNetwork policy;
  std::vector<EpochStats> trace;
  BaselineTable baseline;
  Action greedy;
  double greedy_reward = 0.0;
  std::vector<std::vector<double>> batch_rewards;  ///< per epoch, in sample order
};

/// Mini-batch REINFORCE with an average-reward baseline and entropy regularisation.
/// Rewards of a batch are evaluated with the parallel kernel; the baseline and parameter
/// updates are serial. Sampling streams are keyed by (seed, epoch, batch index).
/// Throws DivergenceError when any weight becomes non-finite.
TrainResult train(PolicyNetwork policy, const RlSetup& setup, const TrainConfig& config,
                  const Environment& environment, Execution execution = Execution::Parallel);

/// Analytic parameter gradient of surrogate_objective.
std::vector<double> policy_gradient(const PolicyNetwork& policy, std::span<const double> input,
                                    const PolicyGroups& groups, const Action& action,
                                    double advantage, double beta);

/// Max relative error between policy_gradient and central finite differences of the
/// surrogate objective J: |a - n| / max(|a| + |n|, 1e-6 * max(1, |J|)). The floor tracks the
/// round-off of a central difference, which grows with |J|.
double gradient_check(const PolicyNetwork& policy, std::span<const double> input,
                      const PolicyGroups& groups, const Action& action, double reward,
                      double baseline, double beta, double step = 1e-5);

/// Glue between a ProblemContext and the trainer: one group per active pair, a single
/// fixed distillation strategy, cached LP rewards.
class ContextEnvironment {
 public:
  ContextEnvironment(const ProblemContext& context, std::size_t strategy);

  RlSetup setup() const;
  Selection decode(const Action& action) const;
  double operator()(const Action& action) const;
  std::size_t lp_solves() const;

 private:
  const ProblemContext* context_;
  std::size_t strategy_;
  mutable std::mutex mutex_;
  mutable std::map<Selection, double> cache_;
};

}  // namespace qvpn
