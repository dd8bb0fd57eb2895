#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "adjusted/bench/micro.hpp"
#include "adjusted/bench/retwis.hpp"
#include "adjusted/bench/social_graph.hpp"
#include "adjusted/bench/stats.hpp"
#include "adjusted/bench/zipf.hpp"

using namespace adjusted;
using namespace adjusted::bench;

namespace {

double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
  double stat = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - expected[i];
    stat += d * d / expected[i];
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Zipf weights straight from the definition.
std::vector<double> zipf_pmf(std::size_t n, double s) {
  std::vector<double> p(n);
  for (std::size_t k = 1; k <= n; ++k) p[k - 1] = std::pow(static_cast<double>(k), -s);
  const double z = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= z;
  return p;
}

MicroConfig quick(const std::string& object, int threads, std::uint64_t ops) {
  MicroConfig c;
  c.object = object;
  c.threads = threads;
  c.runs = 1;
  c.initial_size = 1024;
  c.key_range = 2048;
  c.max_ops = ops;
  return c;
}

RetwisConfig small_retwis(const std::string& variant, int threads, std::uint64_t ops) {
  RetwisConfig c;
  c.variant = variant;
  c.threads = threads;
  c.users = 1000;
  c.runs = 1;
  c.max_ops = ops;
  return c;
}

}  // namespace

TEST_CASE("pearson") {
  const std::vector<double> a{1, 4, 2, 8, 5};
  CHECK(pearson(a, a) == doctest::Approx(1.0));
  std::vector<double> neg;
  for (double x : a) neg.push_back(-x + 3);
  CHECK(pearson(a, neg) == doctest::Approx(-1.0));
  CHECK(pearson({1, 2, 3}, {6, 4, 2}) == doctest::Approx(-1.0));
  // Two-pass textbook formula on arbitrary data.
  const std::vector<double> x{3, 1, 4, 1, 5, 9}, y{2, 7, 1, 8, 2, 8};
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 6, my = std::accumulate(y.begin(), y.end(), 0.0) / 6;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 6; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(pearson(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), UndefinedCorrelation);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(pearson({1}, {1}), std::invalid_argument);
}

TEST_CASE("summary") {
  auto s = summarize({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(s.mean == doctest::Approx(5));
  CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7)));
  CHECK(s.min == 2);
  CHECK(s.max == 9);
}

TEST_CASE("zipf sampler") {
  CHECK(zipf_exponent(1.0) == doctest::Approx(1.2));
  CHECK(zipf_exponent(0.01) == doctest::Approx(0.012));
  for (double s : {0.012, 0.5, 1.0, 1.2, 2.0}) {
    CAPTURE(s);
    const std::size_t n = 20;
    ZipfSampler z(n, s);
    const auto pmf = zipf_pmf(n, s);
    double total = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      CHECK(z.probability(k) == doctest::Approx(pmf[k - 1]));
      total += z.probability(k);
    }
    CHECK(total == doctest::Approx(1.0));
    std::mt19937_64 rng(17);
    std::vector<double> counts(n, 0);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
      const auto k = z(rng);
      REQUIRE(k >= 1);
      REQUIRE(k <= n);
      ++counts[k - 1];
    }
    std::vector<double> expected;
    for (double p : pmf) expected.push_back(p * draws);
    CHECK(chi_square_p(counts, expected) > 0.001);
  }
}

TEST_CASE("jump consistent hash") {
  for (std::uint64_t key = 0; key < 2000; ++key) {
    for (std::int32_t n = 1; n < 20; ++n) {
      const auto a = jump_consistent_hash(key, n);
      const auto b = jump_consistent_hash(key, n + 1);
      REQUIRE(a >= 0);
      REQUIRE(a < n);
      REQUIRE((b == a || b == n));  // growing only moves keys to the new bucket
    }
  }
  std::vector<double> counts(8, 0);
  for (std::uint64_t key = 0; key < 80000; ++key) ++counts[static_cast<std::size_t>(jump_consistent_hash(key, 8))];
  CHECK(chi_square_p(counts, std::vector<double>(8, 10000)) > 0.001);
}

TEST_CASE("social graph") {
  SUBCASE("shape and determinism") {
    const auto g = build_social_graph(500, 1.0, 3);
    CHECK(g.users == 500);
    CHECK(std::is_sorted(g.edges.begin(), g.edges.end()));
    CHECK(std::adjacent_find(g.edges.begin(), g.edges.end()) == g.edges.end());
    for (const auto& [u, v] : g.edges) {
      REQUIRE(u != v);
      REQUIRE(u < 500);
      REQUIRE(v < 500);
    }
    const auto again = build_social_graph(500, 1.0, 3);
    CHECK(again.edges == g.edges);
    CHECK(again.popular == g.popular);
    CHECK(build_social_graph(500, 1.0, 4).edges != g.edges);
    std::vector<std::uint32_t> sorted = g.popular;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < 500; ++i) REQUIRE(sorted[i] == i);
  }
  SUBCASE("alpha = 1: top decile holds the majority of in-edges") {
    const auto g = build_social_graph(1000, 1.0, 1);
    const auto in = g.in_degrees();
    std::uint64_t top = 0, all = 0;
    for (std::size_t r = 0; r < 1000; ++r) {
      if (r < 100) top += in[g.popular[r]];
      all += in[g.popular[r]];
    }
    // Expected share of followee draws landing in the top decile, from the
    // law itself; duplicate edges redraw the follower, never the followee,
    // so only stubs dropped after repeated collisions lower it.
    const auto pmf = zipf_pmf(1000, zipf_exponent(1.0));
    const double expected = std::accumulate(pmf.begin(), pmf.begin() + 100, 0.0);
    const double share = static_cast<double>(top) / static_cast<double>(all);
    MESSAGE("top decile share " << share << ", law " << expected);
    CHECK(share > 0.5);
    CHECK(share <= expected + 0.02);
    // Out-degrees follow the same law over the activity order.
    const auto out = g.out_degrees();
    std::uint64_t top_out = 0;
    for (std::size_t r = 0; r < 100; ++r) top_out += out[g.active[r]];
    CHECK(static_cast<double>(top_out) / static_cast<double>(all) > 0.3);
  }
  SUBCASE("alpha = 0.01: in-degrees are statistically uniform") {
    const auto g = build_social_graph(1000, 0.01, 1);
    const auto in = g.in_degrees();
    std::vector<double> observed(in.begin(), in.end());
    const double mean = static_cast<double>(g.edges.size()) / 1000;
    CHECK(chi_square_p(observed, std::vector<double>(1000, mean)) > 0.01);
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS_AS(build_social_graph(1, 1.0, 1), UsageError);
    CHECK_THROWS_AS(build_social_graph(10, 0.0, 1), UsageError);
    CHECK_THROWS_AS(build_social_graph(10, 1.5, 1), UsageError);
  }
}

TEST_CASE("micro: one thread, per-thread equals aggregate") {
  auto r = micro_run(quick("counter.adjusted", 1, 50000));
  REQUIRE(r.per_thread.size() == 1);
  CHECK(r.per_thread[0] == doctest::Approx(r.aggregate));
  CHECK(r.total_ops == 50000);
}

TEST_CASE("micro: every object runs and accounts exactly") {
  for (const auto& object : micro_objects()) {
    CAPTURE(object);
    auto cfg = quick(object, 3, 20000);
    cfg.update_ratio = 50;
    cfg.runs = 2;
    auto r = micro_run(cfg);
    CHECK(r.total_ops == 3u * 2u * 20000u);
    std::uint64_t samples = 0, mixed = 0;
    for (const auto& s : r.samples) samples += s.ops;
    for (const auto& [k, v] : r.mix) mixed += v;
    CHECK(samples == r.total_ops);
    CHECK(mixed == r.total_ops);
    CHECK(r.samples.size() == 6);
    double sum = 0;
    for (double x : r.per_thread) sum += x;
    CHECK(sum == doctest::Approx(r.aggregate));
  }
}

TEST_CASE("micro: 75% updates on the hash map") {
  auto cfg = quick("hashmap.adjusted", 2, 100000);
  cfg.update_ratio = 75;
  cfg.initial_size = 16384;
  cfg.key_range = 32768;
  auto r = micro_run(cfg);
  const double total = static_cast<double>(r.total_ops);
  const double updates = static_cast<double>(r.mix["put"] + r.mix["remove"]);
  CHECK(std::abs(updates / total - 0.75) < 0.01);
  CHECK(std::abs(static_cast<double>(r.mix["get"]) / total - 0.25) < 0.01);
  CHECK(std::abs(static_cast<double>(r.mix["put"]) / updates - 0.5) < 0.01);
}

TEST_CASE("micro: timed runs exclude warmup") {
  MicroConfig cfg;
  cfg.object = "counter.baseline";
  cfg.threads = 2;
  cfg.runs = 2;
  cfg.warmup = 0.05;
  cfg.duration = 0.1;
  auto r = micro_run(cfg);
  for (const auto& s : r.samples) {
    CHECK(s.ops > 0);
    CHECK(s.seconds > 0);
    CHECK(s.seconds < cfg.duration + 0.1);
  }
}

TEST_CASE("micro: configuration errors") {
  auto cfg = quick("counter.adjusted", 1, 10);
  cfg.update_ratio = 101;
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg = quick("hashmap.adjusted", 1, 10);
  cfg.initial_size = cfg.key_range + 1;
  CHECK_THROWS_AS(validate(cfg), UsageError);
  CHECK_THROWS_AS(validate(quick("stack.adjusted", 1, 10)), UsageError);
  cfg = quick("hashmap.adjusted", 4, 10);
  cfg.route_keys = false;  // writers may collide on a key: not CWMR
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg.object = "hashmap.baseline";
  CHECK_NOTHROW(validate(cfg));
  CHECK(micro_contract("queue.adjusted").access_class == AccessClass::MWSR);
  CHECK(baseline_of("queue.adjusted") == "queue.baseline");
  CHECK_FALSE(baseline_of("queue.baseline").has_value());
}

TEST_CASE("micro: reports") {
  auto r = micro_run(quick("reference.adjusted", 2, 1000));
  auto b = micro_run(quick("reference.baseline", 2, 1000));
  attach_baseline(r, b);
  REQUIRE(r.ratio.has_value());
  CHECK(*r.ratio == doctest::Approx((r.aggregate / 2) / (b.aggregate / 2)));
  const auto csv = report_csv(r);
  CHECK(csv.rfind("run,thread,ops,seconds,ops_per_sec\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const auto j = report_json(r);
  CHECK(j["schema"] == "v1");
  CHECK(j["baseline"] == "reference.baseline");
}

TEST_CASE("retwis: mix parsing and validation") {
  CHECK(parse_mix("5,5,15,60,5,10") == kRetwisMix);
  CHECK_THROWS_AS(parse_mix("5,5,15,60,5"), UsageError);
  CHECK_THROWS_AS(parse_mix("5,5,15,60,5,11"), UsageError);
  CHECK_THROWS_AS(parse_mix("5,5,15,60,x,10"), UsageError);
  auto cfg = small_retwis("adjusted", 1, 10);
  cfg.mix = {50, 50, 0, 0, 0, 1};
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg = small_retwis("lockfree", 1, 10);
  CHECK_THROWS_AS(validate(cfg), UsageError);
}

TEST_CASE("retwis: realized mix follows the table") {
  auto res = retwis_run(small_retwis("adjusted", 1, 300000));
  const double total = static_cast<double>(res.report.total_ops);
  CHECK(res.report.total_ops == 300000);
  const auto& names = retwis_op_names();
  for (std::size_t k = 0; k < kRetwisOps; ++k) {
    CAPTURE(names[k]);
    const double share = static_cast<double>(res.report.mix[names[k]]) / total * 100;
    CHECK(std::abs(share - kRetwisMix[k]) < 1.0);
  }
  CHECK(res.audit.ok());
}

TEST_CASE("retwis: invariants hold for every variant") {
  for (const auto& v : retwis_variants()) {
    CAPTURE(v);
    auto res = retwis_run(small_retwis(v, 3, 20000));
    for (const auto& p : res.audit.problems) MESSAGE(p);
    CHECK(res.audit.ok());
    CHECK(res.audit.longest_timeline <= 50);
    CHECK(res.report.total_ops == 60000);
  }
}

TEST_CASE("retwis: follow/unfollow restores the graph") {
  for (const auto& v : std::vector<std::string>{"baseline", "adjusted"}) {
    auto cfg = small_retwis(v, 2, 5000);
    cfg.mix = {0, 100, 0, 0, 0, 0};
    auto res = retwis_run(cfg);
    CHECK(res.audit.ok());
    CHECK(res.audit.edges == build_social_graph(cfg.users, cfg.alpha, cfg.seed, cfg.avg_degree).edges.size());
  }
}

TEST_CASE("retwis: timeline cap") {
  auto cfg = small_retwis("baseline", 2, 20000);
  cfg.timeline_cap = 3;
  cfg.mix = {0, 0, 50, 50, 0, 0};
  auto res = retwis_run(cfg);
  CHECK(res.audit.ok());
  CHECK(res.audit.longest_timeline == 3);
}

TEST_CASE("retwis: one thread with a fixed seed is reproducible") {
  for (const auto& v : retwis_variants()) {
    CAPTURE(v);
    auto cfg = small_retwis(v, 1, 30000);
    cfg.seed = 7;
    auto a = retwis_run(cfg);
    auto b = retwis_run(cfg);
    CHECK(a.digests == b.digests);
    CHECK(a.report.mix == b.report.mix);
    cfg.seed = 8;
    CHECK(retwis_run(cfg).digests != a.digests);
  }
}
