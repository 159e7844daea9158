#include "qvpn/ga_optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "qvpn/errors.hpp"
#include "qvpn/kernels.hpp"

namespace qvpn {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974ULL;
constexpr std::uint64_t kEvolveStream = 0x65766f6cULL;

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

void GaConfig::validate() const {
  if (population_size < 1) throw ConfigError("ga.population_size must be >= 1");
  if (generations < 1) throw ConfigError("ga.generations must be >= 1");
  if (elitism_count < 1 || elitism_count >= population_size)
    throw ConfigError("ga.elitism_count must satisfy 1 <= elitism < population_size");
  for (double p : {static_mutation, static_crossover, mutation_start, mutation_end,
                   crossover_start, crossover_end})
    if (!in_unit(p)) throw ConfigError("ga probabilities must lie in [0,1]");
  for (double p : {static_pool, pool_start, pool_end})
    if (!(p > 0.0 && p <= 1.0)) throw ConfigError("ga selection pools must lie in (0,1]");
}

ScheduleValues dynamic_schedule(const GaConfig& config, int generation, int total) {
  if (total < 1 || generation < 0 || generation >= total)
    throw std::out_of_range("dynamic_schedule: generation outside [0,total)");
  const double t =
      total == 1 ? 0.0 : static_cast<double>(generation) / static_cast<double>(total - 1);
  return {lerp(config.pool_start, config.pool_end, t),
          lerp(config.mutation_start, config.mutation_end, t),
          lerp(config.crossover_start, config.crossover_end, t)};
}

ScheduleValues schedule_for(const GaConfig& config, int generation, int total) {
  if (config.mode == GaMode::Dynamic) return dynamic_schedule(config, generation, total);
  return {config.static_pool, config.static_mutation, config.static_crossover};
}

GenomeLayout::GenomeLayout(const ProblemContext& context) : context_(&context) {
  for (auto u : context.active_pairs())
    for (std::size_t i = 0; i < context.max_paths_per_pair(); ++i) gene_pair_.push_back(u);
}

Selection GenomeLayout::decode(const Genome& genome) const {
  Selection sel(context_->pair_count());
  for (std::size_t g = 0; g < genome.genes.size(); ++g)
    sel[gene_pair_[g]].push_back({genome.genes[g].path, genome.genes[g].strategy});
  return ProblemContext::canonical(std::move(sel));
}

std::optional<Genome> GenomeLayout::encode(const Selection& selection) const {
  if (selection.size() != context_->pair_count()) return std::nullopt;
  Genome genome;
  const auto pmax = context_->max_paths_per_pair();
  for (auto u : context_->active_pairs()) {
    const auto& choices = selection[u];
    if (choices.empty() || choices.size() > pmax) return std::nullopt;
    for (std::size_t i = 0; i < pmax; ++i) {
      const auto& c = choices[std::min(i, choices.size() - 1)];
      genome.genes.push_back(
          {static_cast<std::uint32_t>(c.candidate), static_cast<std::uint32_t>(c.strategy)});
    }
  }
  if (!valid(genome)) return std::nullopt;
  return genome;
}

Genome GenomeLayout::random(Rng& rng) const {
  Genome genome;
  genome.genes.resize(length());
  const auto strategies = context_->catalog().size();
  for (std::size_t g = 0; g < length(); ++g) {
    genome.genes[g].path =
        static_cast<std::uint32_t>(rng.index(context_->candidates(gene_pair_[g]).size()));
    genome.genes[g].strategy = static_cast<std::uint32_t>(rng.index(strategies));
  }
  return genome;
}

void GenomeLayout::mutate(Genome& genome, double per_gene_prob, Rng& rng) const {
  const auto strategies = context_->catalog().size();
  for (std::size_t g = 0; g < genome.genes.size(); ++g) {
    if (!rng.bernoulli(per_gene_prob)) continue;
    if (rng.bernoulli(0.5)) {
      genome.genes[g].path =
          static_cast<std::uint32_t>(rng.index(context_->candidates(gene_pair_[g]).size()));
    } else {
      genome.genes[g].strategy = static_cast<std::uint32_t>(rng.index(strategies));
    }
  }
}

bool GenomeLayout::valid(const Genome& genome) const {
  if (genome.genes.size() != length()) return false;
  for (std::size_t g = 0; g < length(); ++g) {
    if (genome.genes[g].path >= context_->candidates(gene_pair_[g]).size()) return false;
    if (genome.genes[g].strategy >= context_->catalog().size()) return false;
  }
  return true;
}

Genome crossover(const Genome& first, const Genome& second, std::size_t cut) {
  if (first.genes.size() != second.genes.size() || cut > first.genes.size())
    throw std::invalid_argument("crossover: incompatible genomes or cut");
  Genome child = first;
  std::copy(second.genes.begin() + static_cast<std::ptrdiff_t>(cut), second.genes.end(),
            child.genes.begin() + static_cast<std::ptrdiff_t>(cut));
  return child;
}

std::vector<Genome> initialize_population(const ProblemContext& context, const GaConfig& config,
                                          std::span<const Selection> seed_heuristics) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.population_size);
  if (n < seed_heuristics.size())
    throw ConfigError("population_size " + std::to_string(n) + " is smaller than the " +
                      std::to_string(seed_heuristics.size()) + " injected heuristics");
  GenomeLayout layout(context);
  std::vector<Genome> population;
  population.reserve(n);
  for (std::size_t i = 0; i < seed_heuristics.size(); ++i) {
    auto genome = layout.encode(seed_heuristics[i]);
    if (!genome)
      throw ConfigError("heuristic selection " + std::to_string(i) +
                        " cannot be encoded as a genome");
    population.push_back(std::move(*genome));
  }
  for (std::size_t i = population.size(); i < n; ++i) {
    Rng rng(stream_seed({config.seed, kInitStream, i}));
    population.push_back(layout.random(rng));
  }
  return population;
}

GaTrace evolve(const ProblemContext& context, std::vector<Genome> population,
               const GaConfig& config, Execution execution) {
  config.validate();
  if (population.size() != static_cast<std::size_t>(config.population_size))
    throw ConfigError("population size does not match configuration");
  GenomeLayout layout(context);
  for (const auto& g : population)
    if (!layout.valid(g)) throw ValidationError("population contains an invalid genome");

  const auto start = std::chrono::steady_clock::now();
  std::map<Selection, double> cache;
  GaTrace trace;

  auto evaluate = [&](const std::vector<Genome>& pop) {
    std::vector<Selection> decoded;
    decoded.reserve(pop.size());
    for (const auto& g : pop) decoded.push_back(layout.decode(g));
    std::vector<Selection> pending;
    std::vector<std::size_t> pending_genome;
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      if (cache.count(decoded[i])) continue;
      if (std::find(pending.begin(), pending.end(), decoded[i]) != pending.end()) continue;
      pending.push_back(decoded[i]);
      pending_genome.push_back(i);
    }
    std::vector<double> values;
    try {
      values = evaluate_wegr_batch(context, pending, execution);
    } catch (const LpNumericalError& e) {
      throw LpNumericalError(std::string("fitness evaluation failed (batch index refers to "
                                         "unique genomes of this generation): ") + e.what());
    }
    trace.lp_solves += pending.size();
    for (std::size_t i = 0; i < pending.size(); ++i) cache.emplace(pending[i], values[i]);
    std::vector<double> fitness(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fitness[i] = cache.at(decoded[i]);
    return fitness;
  };

  const int total = config.generations;
  const auto n = population.size();
  std::vector<double> fitness = evaluate(population);
  bool have_best = false;

  for (int gen = 0; gen < total; ++gen) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

    GenerationStats stats;
    stats.generation = gen;
    stats.best = fitness[order.front()];
    stats.mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(n);
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.generations.push_back(stats);
    if (!have_best || stats.best > trace.best_fitness) {
      trace.best_fitness = stats.best;
      trace.best = population[order.front()];
      have_best = true;
    }
    if (gen + 1 == total) break;

    const auto sched = schedule_for(config, gen, total);
    const auto pool = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(sched.selection_pool * static_cast<double>(n))));
    double pool_fitness = 0.0;
    for (std::size_t i = 0; i < pool; ++i) pool_fitness += std::max(0.0, fitness[order[i]]);
    const bool proportional = config.mode == GaMode::Dynamic && pool_fitness > 0.0;

    auto pick = [&](Rng& rng) -> const Genome& {
      if (!proportional) return population[order[rng.index(pool)]];
      double target = rng.canonical() * pool_fitness;
      for (std::size_t i = 0; i < pool; ++i) {
        target -= std::max(0.0, fitness[order[i]]);
        if (target < 0.0) return population[order[i]];
      }
      return population[order[pool - 1]];
    };

    std::vector<Genome> next;
    next.reserve(n);
    const auto elites = static_cast<std::size_t>(config.elitism_count);
    for (std::size_t i = 0; i < elites; ++i) next.push_back(population[order[i]]);
    for (std::size_t i = elites; i < n; ++i) {
      Rng rng(stream_seed({config.seed, kEvolveStream, static_cast<std::uint64_t>(gen), i}));
      const Genome& first = pick(rng);
      const Genome& second = pick(rng);
      Genome child = first;
      if (layout.length() > 1 && rng.bernoulli(sched.crossover_prob))
        child = crossover(first, second, 1 + rng.index(layout.length() - 1));
      layout.mutate(child, sched.mutation_prob, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    fitness = evaluate(population);
  }
  trace.best_selection = layout.decode(trace.best);
  return trace;
}

}  // namespace qvpn
