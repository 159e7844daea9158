#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qvpn/problem_context.hpp"
#include "qvpn/random.hpp"

namespace qvpn {

struct Gene {
  std::uint32_t path = 0;
  std::uint32_t strategy = 0;
  bool operator==(const Gene&) const = default;
};

struct Genome {
  std::vector<Gene> genes;
  bool operator==(const Genome&) const = default;
};

enum class GaMode { Static, Dynamic };

struct GaConfig {
  int population_size = 100;
  int generations = 1000;
  GaMode mode = GaMode::Dynamic;
  int elitism_count = 1;
  std::uint64_t seed = 1;

  // Static mode: truncation selection from a fixed top fraction.
  double static_pool = 0.2;
  double static_mutation = 0.05;
  double static_crossover = 0.8;

  // Dynamic mode: linear decay from start to end over the run.
  double pool_start = 1.0, pool_end = 0.2;
  double mutation_start = 0.3, mutation_end = 0.02;
  double crossover_start = 0.9, crossover_end = 0.6;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct ScheduleValues {
  double selection_pool = 1.0;  ///< fraction of the ranked population eligible as parents
  double mutation_prob = 0.0;   ///< per gene
  double crossover_prob = 0.0;  ///< per child
};

/// Linear decay from the configured start values (generation 0) to the end values
/// (generation total-1).
ScheduleValues dynamic_schedule(const GaConfig& config, int generation, int total);
ScheduleValues schedule_for(const GaConfig& config, int generation, int total);

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double seconds = 0.0;  ///< wall-clock since the start of evolve()
};

struct GaTrace {
  std::vector<GenerationStats> generations;
  Genome best;
  Selection best_selection;
  double best_fitness = 0.0;
  std::size_t lp_solves = 0;
};

/// Flat gene list with one block of P_max genes per active pair.
class GenomeLayout {
 public:
  explicit GenomeLayout(const ProblemContext& context);

  std::size_t length() const noexcept { return gene_pair_.size(); }
  std::size_t pair_of_gene(std::size_t gene) const { return gene_pair_.at(gene); }

  /// Collapses duplicate path indices inside each block and returns a canonical selection.
  Selection decode(const Genome& genome) const;
  /// Fills each block with the pair's choices, repeating the last one to pad; nullopt when
  /// an active pair has no choice or more than P_max choices.
  std::optional<Genome> encode(const Selection& selection) const;
  Genome random(Rng& rng) const;
  void mutate(Genome& genome, double per_gene_prob, Rng& rng) const;
  bool valid(const Genome& genome) const;

 private:
  const ProblemContext* context_;
  std::vector<std::size_t> gene_pair_;
};

/// Single cut between genes `cut-1` and `cut`; tuples are never split.
Genome crossover(const Genome& first, const Genome& second, std::size_t cut);

/// Heuristic selections first (in order), then seeded random genomes.
std::vector<Genome> initialize_population(const ProblemContext& context, const GaConfig& config,
                                          std::span<const Selection> seed_heuristics);

/// Runs `config.generations` generations; row g of the trace describes population g.
GaTrace evolve(const ProblemContext& context, std::vector<Genome> population,
               const GaConfig& config, Execution execution = Execution::Parallel);

}  // namespace qvpn
