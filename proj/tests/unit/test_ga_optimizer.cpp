#include <doctest.h>

#include "context_fixture.hpp"
#include "qvpn/errors.hpp"
#include "qvpn/ga_optimizer.hpp"

using namespace qvpn;

namespace {
GaConfig small_config(int population, int generations, std::uint64_t seed = 4) {
  GaConfig c;
  c.population_size = population;
  c.generations = generations;
  c.seed = seed;
  return c;
}

std::vector<Selection> baselines(const ProblemContext& ctx) {
  std::vector<Selection> out;
  for (auto s : kAllSchemes) out.push_back(ctx.baseline(s));
  return out;
}
}  // namespace

TEST_CASE("dynamic schedule endpoints and midpoint") {
  GaConfig c;
  const auto first = dynamic_schedule(c, 0, 101);
  const auto mid = dynamic_schedule(c, 50, 101);
  const auto last = dynamic_schedule(c, 100, 101);
  CHECK(first.selection_pool == doctest::Approx(1.0));
  CHECK(first.mutation_prob == doctest::Approx(0.3));
  CHECK(first.crossover_prob == doctest::Approx(0.9));
  CHECK(last.selection_pool == doctest::Approx(0.2));
  CHECK(last.mutation_prob == doctest::Approx(0.02));
  CHECK(last.crossover_prob == doctest::Approx(0.6));
  CHECK(mid.selection_pool == doctest::Approx(0.6));
  CHECK(mid.mutation_prob == doctest::Approx(0.16));
  CHECK(mid.crossover_prob == doctest::Approx(0.75));
  CHECK_THROWS(dynamic_schedule(c, 101, 101));
  c.mode = GaMode::Static;
  CHECK(schedule_for(c, 10, 101).mutation_prob == doctest::Approx(c.static_mutation));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(small_config(1, 10).validate(), ConfigError);
  auto c = small_config(10, 10);
  c.mutation_start = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config(10, 0);
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("population made only of heuristics") {
  const auto ctx = test::desk_context(3);
  const auto seeds = baselines(ctx);
  const auto pop = initialize_population(ctx, small_config(3, 1), seeds);
  GenomeLayout layout(ctx);
  REQUIRE(pop.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(layout.decode(pop[i]) == ProblemContext::canonical(seeds[i]));
  CHECK_THROWS_AS(initialize_population(ctx, small_config(2, 1), seeds), ConfigError);
}

TEST_CASE("initial population is deterministic per seed") {
  const auto ctx = test::desk_context(3);
  const auto a = initialize_population(ctx, small_config(20, 1, 9), {});
  const auto b = initialize_population(ctx, small_config(20, 1, 9), {});
  const auto c = initialize_population(ctx, small_config(20, 1, 10), {});
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("random genomes always decode to valid selections") {
  const auto ctx = test::desk_context(4);
  GenomeLayout layout(ctx);
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    auto g = layout.random(rng);
    layout.mutate(g, 0.3, rng);
    REQUIRE(layout.valid(g));
    const auto sel = layout.decode(g);
    for (auto u : ctx.active_pairs()) {
      REQUIRE(!sel[u].empty());
      REQUIRE(sel[u].size() <= ctx.max_paths_per_pair());
      for (const auto& ch : sel[u]) {
        REQUIRE(ch.candidate < ctx.candidates(u).size());
        REQUIRE(ch.strategy < ctx.catalog().size());
      }
    }
  }
}

TEST_CASE("crossover") {
  const auto ctx = test::desk_context(4);
  GenomeLayout layout(ctx);
  Rng rng(6);
  const auto a = layout.random(rng);
  const auto b = layout.random(rng);
  for (std::size_t cut = 0; cut <= a.genes.size(); ++cut) {
    CHECK(crossover(a, a, cut) == a);
    const auto child = crossover(a, b, cut);
    for (std::size_t g = 0; g < a.genes.size(); ++g)
      CHECK(child.genes[g] == (g < cut ? a.genes[g] : b.genes[g]));
  }
  CHECK(crossover(a, b, 0) == b);
  CHECK_THROWS(crossover(a, b, a.genes.size() + 1));
}

TEST_CASE("pair with a single candidate pins its path gene") {
  const auto g = test::parse_topology(
      "qvpn-topology v1\nnode A\nnode B\nnode C\nnode D\nlink A B 5\nlink B C 5\nlink C D 5\n"
      "link D B 5\n");
  Workload w;
  w.orgs = {{"o", 1.0}};
  w.pairs = {{0, "A", "B", 0.5, 0.8, 0.0, 1e9}, {0, "A", "C", 0.5, 0.8, 0.0, 1e9}};
  const ProblemContext ctx(g, w, ContextOptions{});
  REQUIRE(ctx.candidates(0).size() == 1);
  REQUIRE(ctx.candidates(1).size() == 2);
  GenomeLayout layout(ctx);
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    auto genome = layout.random(rng);
    layout.mutate(genome, 1.0, rng);
    for (std::size_t k = 0; k < layout.length(); ++k)
      if (layout.pair_of_gene(k) == 0) CHECK(genome.genes[k].path == 0);
  }
}

TEST_CASE("elitism keeps the best fitness non-decreasing") {
  const auto ctx = test::desk_context(5);
  auto config = small_config(16, 30, 2);
  const auto seeds = baselines(ctx);
  const auto trace = evolve(ctx, initialize_population(ctx, config, seeds), config);
  REQUIRE(trace.generations.size() == 30);
  for (std::size_t i = 1; i < trace.generations.size(); ++i)
    CHECK(trace.generations[i].best >= trace.generations[i - 1].best);
  for (const auto& s : seeds) CHECK(trace.best_fitness >= ctx.wegr(s));
  CHECK(trace.best_fitness == doctest::Approx(ctx.wegr(trace.best_selection)));
  CHECK(trace.lp_solves > 0);
}

TEST_CASE("static mode without variation keeps the population's best fixed") {
  const auto ctx = test::desk_context(5);
  auto config = small_config(10, 8, 3);
  config.mode = GaMode::Static;
  config.static_mutation = 0.0;
  config.static_crossover = 0.0;
  const auto trace = evolve(ctx, initialize_population(ctx, config, {}), config);
  for (const auto& row : trace.generations) CHECK(row.best == trace.generations[0].best);
}

TEST_CASE("evolution is deterministic and matches serially") {
  const auto ctx = test::desk_context(6);
  auto config = small_config(12, 10, 8);
  const auto pop = initialize_population(ctx, config, baselines(ctx));
  const auto a = evolve(ctx, pop, config, Execution::Parallel);
  const auto b = evolve(ctx, pop, config, Execution::Serial);
  CHECK(a.best == b.best);
  REQUIRE(a.generations.size() == b.generations.size());
  for (std::size_t i = 0; i < a.generations.size(); ++i) {
    CHECK(a.generations[i].best == b.generations[i].best);
    CHECK(a.generations[i].mean == b.generations[i].mean);
  }
}
