#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "veli/data/preprocess.hpp"
#include "veli/data/standardize.hpp"
#include "veli/error.hpp"
#include "veli/eval/experiments.hpp"
#include "veli/eval/metrics.hpp"
#include "veli/eval/report.hpp"
#include "veli/synth/synth.hpp"

using namespace veli;
using namespace veli::eval;

namespace {

std::vector<double> noisy(std::size_t n, std::uint64_t seed, double na_rate) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> v(10, 4);
  std::bernoulli_distribution na(na_rate);
  std::vector<double> out(n);
  for (double& x : out) x = na(rng) ? kNA : v(rng);
  return out;
}

data::LocationDataset small_location(std::size_t hours, std::uint64_t seed) {
  synth::BaseSignalSpec spec;
  spec.length = hours;
  return synth::to_location(synth::inject_noise(synth::gen_base(spec, seed), synth::NoiseConfig::moderate(), 10, seed));
}

VeliFitConfig quick_fit() {
  VeliFitConfig cfg;
  cfg.train.epochs = 2;
  cfg.train.learning_rate = 1e-3;
  return cfg;
}

}  // namespace

TEST_SUITE("mae") {
  TEST_CASE("examples") {
    const std::vector<double> a{1, 2, 3};
    CHECK(mae(a, a) == 0.0);
    CHECK(mae(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == 1.5);
    CHECK(mae(std::vector<double>{1, kNA, 5}, std::vector<double>{2, 9, kNA}) == 1.0);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(mae(std::vector<double>{1, kNA}, std::vector<double>{kNA, 2}), DataError);
    CHECK_THROWS_AS(mae(std::vector<double>{1}, std::vector<double>{1, 2}), DimensionError);
  }

  TEST_CASE("brute force and symmetry on random NA patterns") {
    const auto p = noisy(10000, 1, 0.2), r = noisy(10000, 2, 0.2);
    double s = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!is_na(p[i]) && !is_na(r[i])) s += std::abs(p[i] - r[i]), ++n;
    CHECK(mae(p, r) == doctest::Approx(s / double(n)).epsilon(1e-13));
    CHECK(mae(p, r) == mae(r, p));
  }
}

TEST_SUITE("hit rate") {
  TEST_CASE("exact prediction hits at zero") {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> eps{0.0};
    CHECK(hit_rate_curve(a, a, eps)[0].fraction == 1.0);
  }

  TEST_CASE("monotone, bounded and complete at the maximum error") {
    const auto p = noisy(2000, 3, 0.1), r = noisy(2000, 4, 0.1);
    double max_err = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (!is_na(p[i]) && !is_na(r[i])) max_err = std::max(max_err, std::abs(p[i] - r[i])), ++n;
    auto grid = default_epsilon_grid();
    grid.push_back(max_err);
    std::sort(grid.begin(), grid.end());
    const auto curve = hit_rate_curve(p, r, grid);
    REQUIRE(curve.size() == grid.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
      CHECK(curve[k].fraction >= 0.0);
      CHECK(curve[k].fraction <= 1.0);
      if (k > 0) CHECK(curve[k].fraction >= curve[k - 1].fraction);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (!is_na(p[i]) && !is_na(r[i])) hits += std::abs(p[i] - r[i]) <= grid[k];
      CHECK(curve[k].fraction == double(hits) / double(n));
    }
    CHECK(curve.back().fraction == 1.0);
  }

  TEST_CASE("default grid") {
    const auto g = default_epsilon_grid();
    CHECK(g.size() == 101);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 25.0);
    CHECK(g[3] == 0.75);
  }
}

TEST_SUITE("autocorrelation") {
  TEST_CASE("a 24-hour periodic series correlates perfectly at lag 24") {
    std::vector<double> s(1000);
    for (std::size_t t = 0; t < s.size(); ++t) s[t] = std::sin(2 * std::numbers::pi * double(t) / 24.0) + 0.1 * double(t % 24 == 3);
    const auto acf = autocorrelation(s);
    REQUIRE(acf.size() == 48);
    CHECK(std::abs(acf[23] - 1.0) < 1e-9);
    CHECK(std::abs(acf[47] - 1.0) < 1e-9);
  }

  TEST_CASE("i.i.d. noise has negligible lag-1 correlation") {
    const auto s = noisy(10000, 5, 0.0);
    CHECK(std::abs(autocorrelation(s, 1)[0]) < 3.0 / std::sqrt(1e4) * 3.0);
  }

  TEST_CASE("AR(1) follows phi^lag") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> s(10000);
    double x = 0;
    for (int burn = 0; burn < 100; ++burn) x = 0.8 * x + n(rng);
    for (double& v : s) v = x = 0.8 * x + n(rng);
    const auto acf = autocorrelation(s, 10);
    for (std::size_t l = 1; l <= 10; ++l) CHECK(std::abs(acf[l - 1] - std::pow(0.8, double(l))) <= 0.05);
  }

  TEST_CASE("bounded on random series with gaps") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto s = noisy(500, seed, 0.3);
      for (std::size_t t = 1; t < s.size(); ++t)
        if (!is_na(s[t]) && !is_na(s[t - 1])) s[t] = 0.5 * s[t] + 0.5 * s[t - 1];
      for (double a : autocorrelation(s)) {
        CHECK(a >= -1.0);
        CHECK(a <= 1.0);
      }
    }
  }

  TEST_CASE("constant series is rejected") {
    try {
      autocorrelation(std::vector<double>(100, 3.0));
      FAIL("expected DataError");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("constant series") != std::string::npos);
    }
  }
}

TEST_SUITE("summaries") {
  TEST_CASE("mean and sample std") {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    const auto ms = mean_std(v);
    CHECK(ms.mean == 5.0);
    double ss = 0;
    for (double x : v) ss += (x - 5) * (x - 5);
    CHECK(ms.std == doctest::Approx(std::sqrt(ss / 7)));
    CHECK(ms.count == 8);
    CHECK(mean_std(std::vector<double>{3.0}).std == 0.0);
  }

  TEST_CASE("row mean ignores NA") {
    const std::vector<double> m{1, kNA, 3, kNA, kNA, kNA};
    const auto r = row_mean(m, 3);
    CHECK(r[0] == 2.0);
    CHECK(is_na(r[1]));
  }

  TEST_CASE("isotonic fit") {
    CHECK(isotonic_increasing(std::vector<double>{1, 3, 2, 4}) == std::vector<double>{1, 2.5, 2.5, 4});
    CHECK(isotonic_increasing(std::vector<double>{5, 4, 3}) == std::vector<double>{4, 4, 4});
    const std::vector<double> sorted{1, 2, 2, 7};
    CHECK(isotonic_increasing(sorted) == sorted);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> v(40);
    for (double& x : v) x = n(rng);
    const auto fit = isotonic_increasing(v);
    CHECK(count_descents(fit) == 0);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < v.size(); ++i) a += v[i], b += fit[i];
    CHECK(a == doctest::Approx(b));
  }

  TEST_CASE("descents") {
    CHECK(count_descents(std::vector<double>{1, 2, 3}) == 0);
    CHECK(count_descents(std::vector<double>{1, 3, 2, 4, 3}) == 2);
  }

  TEST_CASE("histogram covers every observed value") {
    const auto v = noisy(1000, 8, 0.1);
    const auto h = histogram(v);
    std::size_t total = 0, observed = 0;
    for (const auto& b : h) {
      total += b.count;
      CHECK(b.hi > b.lo);
    }
    for (double x : v) observed += !is_na(x);
    CHECK(total == observed);
    CHECK(histogram(std::vector<double>(10, 2.0)).size() == 1);
  }

  TEST_CASE("block average") {
    const std::vector<double> s{1, 3, kNA, kNA, 5};
    const auto b = block_average(s, 2);
    REQUIRE(b.size() == 3);
    CHECK(b[0] == 2.0);
    CHECK(is_na(b[1]));
    CHECK(b[2] == 5.0);
  }
}

TEST_SUITE("report") {
  TEST_CASE("round trip is exact") {
    EvalReport r;
    r.location_id = "utrecht";
    r.method = "veli";
    r.mae_raw_mean = 24.77 + 1e-13;
    r.mae_method = 1.0 / 3.0;
    r.hit_rate = {{0.0, 0.1}, {0.25, 0.2}};
    r.autocorr = {0.9, -0.1, 1.0 / 7.0};
    r.seed_stats = MeanStd{5.25, 0.125, 5};
    r.add("note", std::string("fine tuned"));
    r.add("n", 3.0);
    r.tables.push_back({"mae_by_n", {"n", "mae"}, {{1, 2.5}, {3, 2.75}}});
    const auto text = format_report(r);
    const auto back = parse_report(text);
    CHECK(back.location_id == r.location_id);
    CHECK(back.method == r.method);
    CHECK(back.mae_raw_mean == r.mae_raw_mean);
    CHECK(back.mae_method == r.mae_method);
    CHECK(back.hit_rate == r.hit_rate);
    CHECK(back.autocorr == r.autocorr);
    REQUIRE(back.seed_stats.has_value());
    CHECK(back.seed_stats->std == 0.125);
    CHECK(back.extra == r.extra);
    CHECK(back.tables == r.tables);
    CHECK(format_report(back) == text);
    CHECK(r.recovered());
  }

  TEST_CASE("recovery threshold") {
    EvalReport r;
    r.mae_raw_mean = 10;
    r.mae_method = 9;
    CHECK(r.recovered());
    r.mae_method = 9.0001;
    CHECK_FALSE(r.recovered());
  }

  TEST_CASE("malformed reports are data errors") {
    CHECK_THROWS_AS(parse_report("mae_method = abc\n"), DataError);
    CHECK_THROWS_AS(parse_report("[table t]\na,b\n1,2\n"), DataError);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("inject_na forces exactly n channels per row") {
    const auto loc = small_location(200, 1);
    for (std::size_t n : {1u, 5u, 9u}) {
      const auto inj = inject_na(loc.readings, n, 7);
      REQUIRE(inj.forced.size() == 200);
      for (std::size_t t = 0; t < 200; ++t) {
        auto f = inj.forced[t];
        CHECK(f.size() == n);
        std::sort(f.begin(), f.end());
        CHECK(std::adjacent_find(f.begin(), f.end()) == f.end());
        for (std::size_t c : f) CHECK(is_na(inj.readings(t, c)));
        for (std::size_t c = 0; c < 10; ++c)
          if (!std::binary_search(f.begin(), f.end(), c)) {
            const double a = inj.readings(t, c), b = loc.readings(t, c);
            CHECK((is_na(a) ? is_na(b) : a == b));
          }
      }
    }
    CHECK(inject_na(loc.readings, 0, 7).readings == loc.readings);
    CHECK_THROWS_AS(inject_na(loc.readings, 10, 7), ConfigError);
    CHECK(inject_na(loc.readings, 4, 3).readings == inject_na(loc.readings, 4, 3).readings);
  }

  TEST_CASE("n = 0 injection equals plain evaluation") {
    const auto loc = small_location(300, 2);
    model::ModelConfig mc;
    const model::VeliModel m(mc, 2);
    const auto plain = evaluate_veli(m, loc);
    const auto zero = run_na_injection(m, loc, 0, 9);
    CHECK(zero.mae_method == plain.mae_method);
    CHECK(zero.hit_rate == plain.hit_rate);
  }

  TEST_CASE("evaluation drivers are reproducible") {
    const auto loc = small_location(400, 3);
    CHECK(format_report(evaluate_kalman(loc)) == format_report(evaluate_kalman(loc)));
    CHECK(format_report(evaluate_pca(loc)) == format_report(evaluate_pca(loc)));
    const auto fused = veli_fused(model::VeliModel(model::ModelConfig{}, 4), loc.readings);
    const auto a = evaluate_series(loc, "x", fused), b = evaluate_series(loc, "x", fused);
    CHECK(format_report(a) == format_report(b));
    CHECK(a.mae_raw_mean == mae(row_mean(loc.readings.data(), 10), loc.reference));
  }

  TEST_CASE("sensor subsets drop rows below half observed") {
    auto loc = small_location(300, 5);
    // Rows 0..9 keep only channel 0 in the first three channels.
    for (std::size_t t = 0; t < 10; ++t)
      for (std::size_t c = 1; c < 10; ++c) loc.readings(t, c) = kNA;
    const auto split = data::chronological_split(loc, 0.8);
    auto cfg = quick_fit();
    cfg.train.epochs = 1;
    const auto res = run_sensor_subset(split.train, split.test, {3, 10}, cfg, 1);
    REQUIRE(res.size() == 2);
    CHECK(res[0].sensors == 3);
    CHECK(res[1].sensors == 10);
    // s = 3 needs one observed channel, so the sparse rows stay; s = 10 needs five.
    std::size_t rows3 = 0, rows10 = 0;
    for (std::size_t t = 0; t < split.train.hours(); ++t) {
      std::size_t obs3 = 0, obs10 = 0;
      for (std::size_t c = 0; c < 10; ++c) {
        const bool o = !is_na(split.train.readings(t, c));
        obs10 += o;
        if (c < 3) obs3 += o;
      }
      rows3 += obs3 >= 1;
      rows10 += obs10 >= 5;
    }
    CHECK(res[0].training_rows == rows3);
    CHECK(res[1].training_rows == rows10);
  }

  TEST_CASE("unit sweep scale reproduces the default fit") {
    const auto loc = small_location(300, 6);
    const auto split = data::chronological_split(loc, 0.8);
    const auto cfg = quick_fit();
    const auto sweep = run_loss_weight_sweep(split.train, split.test, {WeightScale{}}, cfg, 3);
    const auto fit = fit_veli(split.train, cfg, 3);
    const auto direct = evaluate_veli(fit.model, split.test);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].weights == model::LossWeights{});
    CHECK(sweep[0].report.mae_method == direct.mae_method);
  }

  TEST_CASE("a zero beta_y request is rejected before training") {
    const auto loc = small_location(100, 7);
    const auto split = data::chronological_split(loc, 0.8);
    try {
      run_loss_weight_sweep(split.train, split.test, {WeightScale{}, WeightScale{1, 1, 0}}, quick_fit(), 1);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("beta_y") != std::string::npos);
    }
  }

  TEST_CASE("default sweep grid is the balanced 3x3") {
    const auto g = default_sweep_grid();
    CHECK(g.size() == 9);
    for (const auto& s : g) CHECK(s.beta_z == s.beta_y);
  }

  TEST_CASE("seed repetition") {
    const auto flat = seed_repeat([](std::uint64_t) { return 4.0; });
    CHECK(flat.mean == 4.0);
    CHECK(flat.std == 0.0);
    CHECK(flat.count == 5);
    const auto lin = seed_repeat([](std::uint64_t s) { return double(s * s); }, {1, 2, 3});
    const double mean = 14.0 / 3.0;
    const double var = ((1 - mean) * (1 - mean) + (4 - mean) * (4 - mean) + (9 - mean) * (9 - mean)) / 2.0;
    CHECK(lin.mean == doctest::Approx(mean));
    CHECK(lin.std == doctest::Approx(std::sqrt(var)));
  }
}
