#include "qvpn/rl_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qvpn/errors.hpp"
#include "qvpn/kernels.hpp"

namespace qvpn {

namespace {
constexpr std::uint64_t kSampleStream = 0x73616d70ULL;
}

PolicyGroups PolicyGroups::uniform(std::size_t groups, std::size_t per_group) {
  PolicyGroups g;
  for (std::size_t i = 0; i < groups; ++i) {
    g.offset.push_back(i * per_group);
    g.size.push_back(per_group);
  }
  return g;
}

std::vector<double> group_softmax(std::span<const double> logits, const PolicyGroups& groups) {
  std::vector<double> probs(logits.size(), 0.0);
  for (std::size_t g = 0; g < groups.count(); ++g) {
    const auto begin = groups.offset[g];
    const auto end = begin + groups.size[g];
    const double mx = *std::max_element(logits.begin() + static_cast<std::ptrdiff_t>(begin),
                                        logits.begin() + static_cast<std::ptrdiff_t>(end));
    double sum = 0.0;
    for (auto i = begin; i < end; ++i) sum += (probs[i] = std::exp(logits[i] - mx));
    for (auto i = begin; i < end; ++i) probs[i] /= sum;
  }
  return probs;
}

double group_entropy(std::span<const double> probs, const PolicyGroups& groups) {
  double h = 0.0;
  for (std::size_t g = 0; g < groups.count(); ++g)
    for (auto i = groups.offset[g]; i < groups.offset[g] + groups.size[g]; ++i)
      if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
  return h;
}

Action sample_action(std::span<const double> probs, const PolicyGroups& groups,
                     std::size_t per_group, Rng& rng) {
  Action action;
  action.chosen.resize(groups.count());
  for (std::size_t g = 0; g < groups.count(); ++g) {
    const auto n = groups.size[g];
    std::vector<double> mass(probs.begin() + static_cast<std::ptrdiff_t>(groups.offset[g]),
                             probs.begin() + static_cast<std::ptrdiff_t>(groups.offset[g] + n));
    const auto draws = std::min(per_group, n);
    for (std::size_t d = 0; d < draws; ++d) {
      const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
      std::size_t pick = n;
      if (total > 0.0) {
        double target = rng.canonical() * total;
        for (std::size_t i = 0; i < n; ++i) {
          if (mass[i] <= 0.0) continue;
          pick = i;
          target -= mass[i];
          if (target < 0.0) break;
        }
      }
      if (pick == n) {
        // Remaining mass underflowed; fall back to the first unused entry.
        for (std::size_t i = 0; i < n && pick == n; ++i)
          if (std::find(action.chosen[g].begin(), action.chosen[g].end(), i) ==
              action.chosen[g].end())
            pick = i;
      }
      action.chosen[g].push_back(pick);
      mass[pick] = 0.0;
    }
  }
  return action;
}

Action greedy_action(std::span<const double> probs, const PolicyGroups& groups,
                     std::size_t per_group) {
  Action action;
  action.chosen.resize(groups.count());
  for (std::size_t g = 0; g < groups.count(); ++g) {
    std::vector<std::size_t> idx(groups.size[g]);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto off = groups.offset[g];
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return probs[off + a] > probs[off + b]; });
    idx.resize(std::min(per_group, idx.size()));
    action.chosen[g] = std::move(idx);
  }
  return action;
}

double surrogate_objective(std::span<const double> logits, const PolicyGroups& groups,
                           const Action& action, double advantage, double beta) {
  const auto probs = group_softmax(logits, groups);
  double log_prob = 0.0;
  for (std::size_t g = 0; g < groups.count(); ++g)
    for (auto a : action.chosen[g]) log_prob += std::log(probs[groups.offset[g] + a]);
  return advantage * log_prob + beta * group_entropy(probs, groups);
}

std::vector<double> surrogate_logit_gradient(std::span<const double> probs,
                                             const PolicyGroups& groups, const Action& action,
                                             double advantage, double beta) {
  std::vector<double> grad(probs.size(), 0.0);
  for (std::size_t g = 0; g < groups.count(); ++g) {
    const auto off = groups.offset[g];
    const auto n = groups.size[g];
    const double picks = static_cast<double>(action.chosen[g].size());
    // d/dz_j sum_a log p_a = [j chosen] - picks * p_j
    for (std::size_t j = 0; j < n; ++j) grad[off + j] -= advantage * picks * probs[off + j];
    for (auto a : action.chosen[g]) grad[off + a] += advantage;
    if (beta != 0.0) {
      double h = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (probs[off + j] > 0.0) h -= probs[off + j] * std::log(probs[off + j]);
      // dH/dz_j = -p_j (log p_j + H)
      for (std::size_t j = 0; j < n; ++j) {
        const double p = probs[off + j];
        if (p > 0.0) grad[off + j] += beta * (-p * (std::log(p) + h));
      }
    }
  }
  return grad;
}

void BaselineTable::observe(const std::string& state, double reward) {
  auto& e = entries_[state];
  ++e.visits;
  e.total += reward;
}

double BaselineTable::baseline(const std::string& state) const {
  const auto& e = entries_.at(state);
  return e.total / static_cast<double>(e.visits);
}

std::size_t BaselineTable::visits(const std::string& state) const {
  auto it = entries_.find(state);
  return it == entries_.end() ? 0 : it->second.visits;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("rl.learning_rate must be >= 0");
  if (!(learning_rate_floor >= 0.0)) throw ConfigError("rl.learning_rate_floor must be >= 0");
  if (!(decay_base > 0.0)) throw ConfigError("rl.decay_base must be positive");
  if (decay_every < 1) throw ConfigError("rl.decay_every must be >= 1");
  if (!(entropy_beta >= 0.0)) throw ConfigError("rl.entropy_beta must be >= 0");
  if (batch_size < 1) throw ConfigError("rl.batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("rl.epochs must be >= 1");
  if (eval_every < 1) throw ConfigError("rl.eval_every must be >= 1");
}

double TrainConfig::learning_rate_at(int epoch) const {
  if (learning_rate == 0.0) return 0.0;
  const double decayed = learning_rate * std::pow(decay_base, epoch / decay_every);
  return std::max(learning_rate_floor, decayed);
}

std::vector<double> policy_gradient(const PolicyNetwork& policy, std::span<const double> input,
                                    const PolicyGroups& groups, const Action& action,
                                    double advantage, double beta) {
  PolicyNetwork::Tape tape;
  const auto logits = policy.forward(input, &tape);
  const auto probs = group_softmax(logits, groups);
  return policy.backward(tape, surrogate_logit_gradient(probs, groups, action, advantage, beta));
}

double gradient_check(const PolicyNetwork& policy, std::span<const double> input,
                      const PolicyGroups& groups, const Action& action, double reward,
                      double baseline, double beta, double step) {
  const double advantage = reward - baseline;
  const auto analytic = policy_gradient(policy, input, groups, action, advantage, beta);
  PolicyNetwork probe = policy;
  auto params = policy.parameters();
  const double value = surrogate_objective(policy.forward(input), groups, action, advantage, beta);
  const double floor = 1e-6 * std::max(1.0, std::abs(value));
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    probe.set_parameters(params);
    const double up = surrogate_objective(probe.forward(input), groups, action, advantage, beta);
    params[i] = saved - step;
    probe.set_parameters(params);
    const double down =
        surrogate_objective(probe.forward(input), groups, action, advantage, beta);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), floor);
    worst = std::max(worst, err);
  }
  return worst;
}

TrainResult train(PolicyNetwork policy, const RlSetup& setup, const TrainConfig& config,
                  const Environment& environment, Execution execution) {
  config.validate();
  if (policy.output_dim() != setup.groups.total())
    throw ConfigError("policy output size does not match the candidate-path count");
  if (policy.input_dim() != setup.state_input.size())
    throw ConfigError("policy input size does not match the state encoding");

  TrainResult result;
  const auto batch = static_cast<std::size_t>(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    PolicyNetwork::Tape tape;
    const auto logits = policy.forward(setup.state_input, &tape);
    const auto probs = group_softmax(logits, setup.groups);

    std::vector<Action> actions;
    actions.reserve(batch);
    for (std::size_t t = 0; t < batch; ++t) {
      Rng rng(stream_seed({config.seed, kSampleStream, static_cast<std::uint64_t>(epoch), t}));
      actions.push_back(sample_action(probs, setup.groups, setup.paths_per_group, rng));
    }
    const auto rewards =
        parallel_map(batch, [&](std::size_t t) { return environment(actions[t]); }, execution);

    for (double r : rewards) result.baseline.observe(setup.state_key, r);
    const double b = result.baseline.baseline(setup.state_key);

    std::vector<double> logit_grad(logits.size(), 0.0);
    for (std::size_t t = 0; t < batch; ++t) {
      const auto g = surrogate_logit_gradient(probs, setup.groups, actions[t], rewards[t] - b,
                                              config.entropy_beta);
      for (std::size_t i = 0; i < g.size(); ++i) logit_grad[i] += g[i];
    }
    const double lr = config.learning_rate_at(epoch);
    policy.add_scaled(policy.backward(tape, logit_grad), lr);
    if (!policy.finite())
      throw DivergenceError("policy weights became non-finite at epoch " + std::to_string(epoch));

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_reward =
        std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(batch);
    stats.baseline = b;
    stats.learning_rate = lr;
    if (epoch % config.eval_every == 0 || epoch + 1 == config.epochs) {
      const auto after = group_softmax(policy.forward(setup.state_input), setup.groups);
      stats.greedy_evaluated = true;
      stats.greedy_reward =
          environment(greedy_action(after, setup.groups, setup.paths_per_group));
    }
    result.trace.push_back(stats);
    result.batch_rewards.push_back(rewards);
  }
  const auto final_probs = group_softmax(policy.forward(setup.state_input), setup.groups);
  result.greedy = greedy_action(final_probs, setup.groups, setup.paths_per_group);
  result.greedy_reward = environment(result.greedy);
  result.policy = std::move(policy);
  return result;
}

ContextEnvironment::ContextEnvironment(const ProblemContext& context, std::size_t strategy)
    : context_(&context), strategy_(strategy) {
  if (strategy >= context.catalog().size())
    throw ConfigError("rl strategy index outside the catalog");
}

RlSetup ContextEnvironment::setup() const {
  RlSetup s;
  std::size_t offset = 0;
  s.state_key = "pairs";
  for (auto u : context_->active_pairs()) {
    const auto n = context_->candidates(u).size();
    s.groups.offset.push_back(offset);
    s.groups.size.push_back(n);
    offset += n;
    s.state_key += ":" + std::to_string(u);
  }
  s.paths_per_group = context_->max_paths_per_pair();
  s.state_input.assign(context_->pair_count(), 0.0);
  for (auto u : context_->active_pairs()) s.state_input[u] = 1.0;
  return s;
}

Selection ContextEnvironment::decode(const Action& action) const {
  Selection sel(context_->pair_count());
  const auto& active = context_->active_pairs();
  if (action.chosen.size() != active.size())
    throw std::invalid_argument("action does not match the active pairs");
  for (std::size_t g = 0; g < active.size(); ++g)
    for (auto c : action.chosen[g]) sel[active[g]].push_back({c, strategy_});
  return ProblemContext::canonical(std::move(sel));
}

double ContextEnvironment::operator()(const Action& action) const {
  auto sel = decode(action);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(sel); it != cache_.end()) return it->second;
  }
  const double value = context_->wegr(sel);
  std::lock_guard lock(mutex_);
  cache_.emplace(std::move(sel), value);
  return value;
}

std::size_t ContextEnvironment::lp_solves() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace qvpn
