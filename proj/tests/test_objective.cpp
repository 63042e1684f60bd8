#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "dagcache/catalog.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/trace.hpp"
#include "support/test_support.hpp"

using namespace dagcache;
using namespace dagcache::testing;

namespace {

// Literal restatement of the gain definition: expected work without caching
// minus expected work with the placement, evaluated per job by walking every
// node's successor path.
double gain_by_definition(const Catalog& cat, const Placement& x) {
  double gain = 0.0;
  for (JobId j = 0; j < cat.job_count(); ++j) {
    const JobDag& dag = cat.job_dag(j);
    auto entries = cat.job_entries(j);
    double saved = 0.0;
    for (NodeId v = 0; v < dag.size(); ++v) {
      bool covered = x.cached[entries[v]];
      for (NodeId u : dag.successors(v)) covered = covered || x.cached[entries[u]];
      if (covered) saved += dag.node(v).cost_s;
    }
    gain += cat.job_rate(j) * saved;
  }
  return gain;
}

}  // namespace

TEST_CASE("total work sums node costs") {
  Catalog cat = make_chain_catalog();
  REQUIRE(total_work(cat.job_dag(0)) == 110.0);
}

TEST_CASE("expected total work weighs jobs by rate, not by overlap") {
  Catalog one = make_chain_catalog();
  REQUIRE(expected_total_work(one) == 110.0);

  // Two identical jobs at unit rate each: the rates add even though the
  // catalog deduplicates their nodes.
  Catalog two;
  two.register_job(make_chain_dag(), 1.0);
  two.register_job(make_chain_dag(), 1.0);
  REQUIRE(expected_total_work(two) == 220.0);

  Catalog simple = simple_example_trace().build_catalog();
  REQUIRE(expected_total_work(simple) == Catch::Approx(55.0));
}

TEST_CASE("job work under a placement short-circuits covered chains") {
  Catalog cat = make_chain_catalog();
  REQUIRE(job_work_under_placement(cat, 0, cache_of(cat, {}, 1500)) == 110.0);
  REQUIRE(job_work_under_placement(cat, 0, cache_of(cat, {1}, 1500)) == 10.0);
  REQUIRE(job_work_under_placement(cat, 0, cache_of(cat, {2}, 1500)) == 0.0);
  REQUIRE(job_work_under_placement(cat, 0, cache_of(cat, {0}, 1500)) == 110.0);
}

TEST_CASE("caching gain on the chain") {
  Catalog cat = make_chain_catalog();
  REQUIRE(caching_gain(cat, cache_of(cat, {}, 1500)) == 0.0);
  REQUIRE(caching_gain(cat, cache_of(cat, {0}, 1500)) == 0.0);
  REQUIRE(caching_gain(cat, cache_of(cat, {1}, 1500)) == 100.0);
  REQUIRE(caching_gain(cat, cache_of(cat, {2}, 1500)) == 110.0);
  REQUIRE(caching_gain(cat, cache_of(cat, {1, 2}, 1500)) == 110.0);
}

TEST_CASE("relaxed and multilinear gains at a fractional point") {
  Catalog cat = make_chain_catalog();
  FractionalState s{{0.0, 0.5, 0.5}, 1500.0};
  REQUIRE(relaxed_gain(cat, s) == Catch::Approx(105.0));
  // P(heavy covered) = 1 - 0.5*0.5 = 0.75, P(light covered) = 0.5.
  REQUIRE(multilinear_gain(cat, s) == Catch::Approx(80.0));
  const double lower = (1.0 - 1.0 / std::exp(1.0)) * 105.0;
  REQUIRE(lower <= 80.0);
}

TEST_CASE("gain, relaxation, and multilinear form agree at integral points") {
  Catalog chain = make_chain_catalog();
  std::mt19937_64 rng(42);
  std::vector<Catalog> cats;
  cats.push_back(std::move(chain));
  for (int t = 0; t < 8; ++t)
    cats.push_back(random_catalog_max_entries(rng, 10, {.dyadic_rates = true}));

  for (const Catalog& cat : cats) {
    const std::size_t n = cat.entry_count();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      Placement x = Placement::empty(cat, 1e9);
      FractionalState s{std::vector<double>(n, 0.0), 1e9};
      for (std::size_t e = 0; e < n; ++e)
        if (mask & (1u << e)) {
          x.cached[e] = true;
          s.y[e] = 1.0;
        }
      const double f = caching_gain(cat, x);
      REQUIRE(f == Catch::Approx(gain_by_definition(cat, x)).margin(1e-12));
      REQUIRE(f == Catch::Approx(relaxed_gain(cat, s)).margin(1e-12));
      REQUIRE(f == Catch::Approx(multilinear_gain(cat, s)).margin(1e-12));
    }
  }
}

TEST_CASE("gain is monotone and submodular") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Catalog cat = random_catalog_max_entries(rng, 12);
    const std::size_t n = cat.entry_count();
    Placement a = Placement::empty(cat, 1e9);
    Placement b = Placement::empty(cat, 1e9);
    for (std::size_t e = 0; e < n; ++e) {
      const int r = static_cast<int>(rng() % 4);
      if (r == 0) a.cached[e] = b.cached[e] = true;  // A is a subset of B
      if (r == 1) b.cached[e] = true;
    }
    const EntryId v = static_cast<EntryId>(rng() % n);
    if (b.cached[v]) continue;
    Placement av = a, bv = b;
    av.cached[v] = true;
    bv.cached[v] = true;
    const double fa = caching_gain(cat, a), fav = caching_gain(cat, av);
    const double fb = caching_gain(cat, b), fbv = caching_gain(cat, bv);
    REQUIRE(fav - fa >= fbv - fb - 1e-9);  // diminishing returns
    REQUIRE(fbv >= fb - 1e-9);             // monotone
  }
}

TEST_CASE("supergradient on the chain") {
  Catalog cat = make_chain_catalog();

  auto z0 = supergradient(cat, {{0.0, 0.0, 0.0}, 1500.0});
  REQUIRE(z0 == std::vector<double>{0.0, 100.0, 110.0});

  // Every suffix sum is exactly 1 here; ties count as active so the
  // estimate stays an upper supergradient of the piecewise-linear gain.
  auto z1 = supergradient(cat, {{0.0, 0.0, 1.0}, 1500.0});
  REQUIRE(z1 == std::vector<double>{0.0, 100.0, 110.0});

  // Saturated suffixes contribute nothing.
  auto z2 = supergradient(cat, {{0.0, 0.5, 1.0}, 1500.0});
  REQUIRE(z2 == std::vector<double>{0.0, 0.0, 10.0});
}

TEST_CASE("supergradient satisfies the concave first-order bound") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Catalog cat = random_catalog(rng);
    const std::size_t n = cat.entry_count();
    FractionalState y{std::vector<double>(n), 1e9};
    for (auto& v : y.y) v = unit(rng);
    const double ly = relaxed_gain(cat, y);
    const auto z = supergradient(cat, y);
    for (int probe = 0; probe < 100; ++probe) {
      FractionalState yp{std::vector<double>(n), 1e9};
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        yp.y[i] = unit(rng);
        dot += z[i] * (yp.y[i] - y.y[i]);
      }
      REQUIRE(relaxed_gain(cat, yp) <= ly + dot + 1e-9);
    }
  }
}

TEST_CASE("brute force optimum on the introductory workload") {
  Catalog cat = simple_example_trace().build_catalog();
  REQUIRE(cat.entry_count() == 7);

  auto best = brute_force_optimum(cat, 500.0);
  REQUIRE(best.gain == Catch::Approx(50.0));  // the shared 100 s stage, rate 0.5
  auto chosen = best.placement.entries();
  REQUIRE(chosen.size() == 1);
  REQUIRE(cat.job_entries(0)[1] == chosen[0]);  // its entry is job 0's middle node

  auto nothing_fits = brute_force_optimum(cat, 100.0);
  REQUIRE(nothing_fits.gain == 0.0);
  REQUIRE(nothing_fits.placement.entries().empty());

  auto everything = brute_force_optimum(cat, 3500.0);
  REQUIRE(everything.gain == Catch::Approx(expected_total_work(cat)));
}

TEST_CASE("brute force refuses oversized universes") {
  JobDag big;
  for (int i = 0; i < 26; ++i) big.add_node({"n" + std::to_string(i), 1, 1, true});
  for (int i = 1; i < 26; ++i) big.add_edge(static_cast<NodeId>(i), static_cast<NodeId>(i - 1));
  Catalog cat;
  cat.register_job(std::move(big), 1.0);
  REQUIRE_THROWS_AS(brute_force_optimum(cat, 5.0), ValidationError);
}

TEST_CASE("placement and fractional validation") {
  Catalog cat = make_chain_catalog();
  Placement wrong{std::vector<bool>(2, false), 100.0};
  REQUIRE_THROWS_AS(validate_placement(cat, wrong), ValidationError);

  Placement over = cache_of(cat, {0, 1}, 600.0);  // 1000 MB into 600 MB
  REQUIRE_THROWS_AS(validate_placement(cat, over), ConsistencyError);

  FractionalState bad{{0.0, 1.5, 0.0}, 100.0};
  REQUIRE_THROWS_AS(validate_fractional(cat, bad), ValidationError);
  FractionalState ok{{0.0, 1.0, 0.25}, 100.0};
  REQUIRE_NOTHROW(validate_fractional(cat, ok));
}
