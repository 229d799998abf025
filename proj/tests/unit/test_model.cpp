#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "veli/data/standardize.hpp"
#include "veli/error.hpp"
#include "veli/model/batch_gradient.hpp"
#include "veli/model/gaussian.hpp"
#include "veli/model/inference.hpp"
#include "veli/model/model_io.hpp"
#include "veli/model/trainer.hpp"
#include "veli/model/veli_model.hpp"
#include "veli/synth/synth.hpp"

using namespace veli;
using namespace veli::model;

namespace {

GaussianParams gp(std::vector<double> m, std::vector<double> lv) { return {std::move(m), std::move(lv)}; }

ModelConfig tiny_config() {
  ModelConfig c;
  c.sensors = 3;
  c.latent = 2;
  c.hidden = 4;
  return c;
}

SensorSnapshot random_snapshot(std::size_t d, std::mt19937_64& rng, bool random_mask = true) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution keep(0.7);
  SensorSnapshot s;
  s.x.resize(d);
  s.mask.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    s.mask[i] = !random_mask || keep(rng) ? 1.0 : 0.0;
    s.x[i] = s.mask[i] != 0.0 ? n(rng) : 0.0;
  }
  if (s.observed() == 0) {
    s.mask[0] = 1.0;
    s.x[0] = n(rng);
  }
  return s;
}

// Random non-zero biases so every path through the heads is exercised.
void jitter(VeliModel& m, std::mt19937_64& rng, double sd = 0.3) {
  auto p = m.parameters();
  std::normal_distribution<double> n(0.0, sd);
  for (double& v : p) v += n(rng);
  m.set_parameters(p);
}

double loss_at(VeliModel m, const std::vector<double>& params, const SensorSnapshot& snap, const SampleNoise& noise) {
  m.set_parameters(params);
  return loss(forward(m, snap, noise), snap, m.weights()).total;
}

std::vector<SensorSnapshot> synthetic_snapshots(std::size_t hours, std::uint64_t seed, data::ChannelStats* stats_out = nullptr,
                                                synth::BaseKind kind = synth::BaseKind::kSinusoid) {
  synth::BaseSignalSpec spec;
  spec.kind = kind;
  spec.length = hours;
  const auto s = synth::inject_noise(synth::gen_base(spec, seed), synth::NoiseConfig::moderate(), 10, seed);
  const auto stats = data::standardize_fit(s.channels);
  if (stats_out) *stats_out = stats;
  return data::make_snapshots(s.channels, stats);
}

}  // namespace

TEST_SUITE("gaussian") {
  TEST_CASE("KL of identical distributions is zero") {
    CHECK(kl_diag_gaussian(gp({0, 0}, {0, 0}), gp({0, 0}, {0, 0})) == 0.0);
    const auto q = gp({1.5, -2.0, 0.3}, {0.4, -1.0, 2.0});
    CHECK(kl_diag_gaussian(q, q) == 0.0);
  }

  TEST_CASE("KL(N(1,1) || N(0,1)) = 1/2") {
    CHECK(std::abs(kl_diag_gaussian(gp({1}, {0}), gp({0}, {0})) - 0.5) < 1e-12);
  }

  TEST_CASE("KL(N(0,2) || N(0,1)) matches quadrature") {
    const double kl = kl_diag_gaussian(gp({0}, {std::log(2.0)}), gp({0}, {0}));
    CHECK(kl == doctest::Approx(0.5 * (2.0 - 1.0 - std::log(2.0))).epsilon(1e-12));
    CHECK(std::abs(kl - oracle::kl_quadrature(0, 2, 0, 1)) < 1e-6);
  }

  TEST_CASE("KL matches quadrature on random pairs and is non-negative") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> mu(-2, 2), lv(-1.5, 1.5);
    for (int i = 0; i < 50; ++i) {
      const double mq = mu(rng), lq = lv(rng), mp = mu(rng), lp = lv(rng);
      const double kl = kl_diag_gaussian(gp({mq}, {lq}), gp({mp}, {lp}));
      CHECK(std::abs(kl - oracle::kl_quadrature(mq, std::exp(lq), mp, std::exp(lp))) < 1e-6);
      CHECK(kl >= -1e-9);
    }
  }

  TEST_CASE("KL dimension mismatch throws") {
    CHECK_THROWS_AS(kl_diag_gaussian(gp({0, 0}, {0, 0}), gp({0}, {0})), DimensionError);
  }

  TEST_CASE("KL partial derivatives match central differences") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> v(8);
      for (double& e : v) e = u(rng);
      auto f = [](const std::vector<double>& a) {
        return kl_diag_gaussian(gp({a[0], a[1]}, {a[2], a[3]}), gp({a[4], a[5]}, {a[6], a[7]}));
      };
      std::vector<double> g(8, 0.0);
      kl_diag_gaussian_grad(gp({v[0], v[1]}, {v[2], v[3]}), gp({v[4], v[5]}, {v[6], v[7]}), 1.0,
                            std::span(g).subspan(0, 2), std::span(g).subspan(2, 2), std::span(g).subspan(4, 2),
                            std::span(g).subspan(6, 2));
      for (std::size_t i = 0; i < 8; ++i)
        CHECK(g[i] == doctest::Approx(oracle::central_difference(f, v, i, 1e-6)).epsilon(1e-6).scale(1.0));
    }
  }

  TEST_CASE("reparameterization at the variance floor stays near the mean") {
    const auto p = gp({3.0}, {kLogVarianceMin});
    for (double u : {-3.0, -1.0, 0.0, 2.0, 3.0}) CHECK(std::abs(reparameterize(p, std::vector<double>{u})[0] - 3.0) <= 0.03);
  }

  TEST_CASE("reparameterized samples are seed-deterministic") {
    const auto p = gp({1, 2, 3}, {0.1, -0.2, 0.3});
    std::mt19937_64 a(99), b(99);
    CHECK(reparam_sample(p, a) == reparam_sample(p, b));
  }

  TEST_CASE("reparameterized N(2, 4) has the right mean") {
    const auto p = gp({2.0}, {std::log(4.0)});
    std::mt19937_64 rng(123);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += reparam_sample(p, rng)[0];
    CHECK(std::abs(sum / n - 2.0) <= 3.0 * 2.0 / std::sqrt(double(n)));
  }

  TEST_CASE("log-variance clamp") {
    CHECK(clamp_log_variance(-50) == kLogVarianceMin);
    CHECK(clamp_log_variance(50) == kLogVarianceMax);
    CHECK(clamp_log_variance(1.25) == 1.25);
  }

  TEST_CASE("reconstruction term examples") {
    const std::vector<double> one{1.0};
    CHECK(reconstruction_nll(std::vector<double>{0.5}, one, std::vector<double>{0.5},
                             gp({0.0}, {std::log(1.0 / (2.0 * std::numbers::pi))})) == doctest::Approx(0.0).scale(1.0));
    CHECK(reconstruction_nll(std::vector<double>{2.0}, one, std::vector<double>{1.0}, gp({0.0}, {0.0})) ==
          doctest::Approx(2.837877066409345).epsilon(1e-12));
    CHECK(reconstruction_nll(std::vector<double>{5, -3}, std::vector<double>{0, 0}, std::vector<double>{1, 1},
                             gp({0.2, 0.1}, {1, -1})) == 0.0);
  }

  TEST_CASE("reconstruction gradient matches central differences") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0, 1);
    const std::vector<double> x{0.5, -1.0, 2.0}, mask{1, 0, 1};
    std::vector<double> v(9);
    for (double& e : v) e = n(rng);
    auto f = [&](const std::vector<double>& a) {
      return reconstruction_nll(x, mask, std::span(a).subspan(0, 3), gp({a[3], a[4], a[5]}, {a[6], a[7], a[8]}));
    };
    std::vector<double> g(9, 0.0);
    reconstruction_nll_grad(x, mask, std::span(v).subspan(0, 3), gp({v[3], v[4], v[5]}, {v[6], v[7], v[8]}), 1.0,
                            std::span(g).subspan(0, 3), std::span(g).subspan(3, 3), std::span(g).subspan(6, 3));
    for (std::size_t i = 0; i < 9; ++i)
      CHECK(g[i] == doctest::Approx(oracle::central_difference(f, v, i, 1e-6)).epsilon(1e-6).scale(1.0));
    CHECK(g[1] == 0.0);
  }
}

TEST_SUITE("veli-model") {
  TEST_CASE("config validation") {
    ModelConfig c = tiny_config();
    c.latent = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    LossWeights w;
    w.beta_y = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    CHECK_NOTHROW(LossWeights{}.validate());
    CHECK(LossWeights{} == LossWeights{1.0, 10.0, 0.1});
  }

  TEST_CASE("forward shapes") {
    ModelConfig c;
    c.sensors = 6;
    c.latent = 3;
    c.samples = 2;
    VeliModel m(c, 1);
    std::mt19937_64 rng(1);
    const auto snap = random_snapshot(6, rng);
    const auto f = forward(m, snap, rng, 2);
    CHECK(f.q_z.size() == 3);
    CHECK(f.p_z.size() == 3);
    REQUIRE(f.samples.size() == 2);
    for (const auto& s : f.samples) {
      CHECK(s.z.size() == 3);
      CHECK(s.q_y.size() == 6);
      CHECK(s.p_y.size() == 6);
      CHECK(s.sens.size() == 6);
      CHECK(s.y.size() == 6);
    }
    SensorSnapshot bad = snap;
    bad.x.pop_back();
    CHECK_THROWS_AS(forward(m, bad, rng, 1), DimensionError);
  }

  TEST_CASE("zero weights: every head emits its bias") {
    VeliModel m(tiny_config(), 3);
    m.set_parameters(std::vector<double>(m.param_count(), 0.0));
    for (std::size_t h = 0; h < kHeadCount; ++h) {
      auto& head = m.head(Head(h));
      double b = 0.1 * double(h + 1);
      for (double& e : head.mean_layer().bias(0)) e = (b += 0.5);
      for (double& e : head.log_variance_layer().bias(0)) e = -b;
    }
    std::mt19937_64 rng(2);
    const auto f = forward(m, random_snapshot(3, rng), rng, 1);
    auto check_bias = [](const GaussianParams& p, const GaussianHead& head) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.mean[i] == head.mean_layer().bias(0)[i]);
        CHECK(p.log_variance[i] == head.log_variance_layer().bias(0)[i]);
      }
    };
    check_bias(f.q_z, m.head(Head::kEncoder));
    check_bias(f.p_z, m.head(Head::kPriorZ));
    check_bias(f.samples[0].q_y, m.head(Head::kDecoder));
    check_bias(f.samples[0].p_y, m.head(Head::kPriorY));
    check_bias(f.samples[0].sens, m.head(Head::kNoise));
  }

  TEST_CASE("forward is deterministic for a fixed seed") {
    VeliModel m(tiny_config(), 5);
    std::mt19937_64 r0(3);
    const auto snap = random_snapshot(3, r0);
    std::mt19937_64 a(77), b(77);
    const auto fa = forward(m, snap, a, 3), fb = forward(m, snap, b, 3);
    CHECK(fa.q_z == fb.q_z);
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(fa.samples[k].z == fb.samples[k].z);
      CHECK(fa.samples[k].y == fb.samples[k].y);
      CHECK(fa.samples[k].sens == fb.samples[k].sens);
    }
  }

  TEST_CASE("weighted sum of loss components") {
    // Weights (1, 10, 0.1) paired positionally with (kl_z, kl_y, recon).
    CHECK(combine_loss(1, 2, 3, LossWeights{0.1, 1.0, 10.0}) == doctest::Approx(21.3).epsilon(1e-15));
    // Default weights: 10 * 1 + 0.1 * 2 + 1 * 3.
    CHECK(combine_loss(1, 2, 3, LossWeights{}) == doctest::Approx(13.2).epsilon(1e-15));
  }

  TEST_CASE("loss is zero when q = p and the residual vanishes") {
    VeliModel m(tiny_config(), 3);
    m.set_parameters(std::vector<double>(m.param_count(), 0.0));
    const SensorSnapshot snap{{0.4, -1.2, 2.0}, {1, 1, 1}, 0};
    auto& noise_head = m.head(Head::kNoise);
    for (std::size_t i = 0; i < 3; ++i) {
      noise_head.mean_layer().bias(0)[i] = snap.x[i];
      noise_head.log_variance_layer().bias(0)[i] = std::log(1.0 / (2.0 * std::numbers::pi));
    }
    SampleNoise noise{{{0.0, 0.0}}, {{0.0, 0.0, 0.0}}};
    const auto l = loss(forward(m, snap, noise), snap, m.weights());
    CHECK(l.kl_z == 0.0);
    CHECK(l.kl_y == 0.0);
    CHECK(std::abs(l.recon_nll) < 1e-14);
    CHECK(std::abs(l.total) < 1e-14);
  }

  TEST_CASE("loss equals its standalone components") {
    VeliModel m(tiny_config(), 9);
    std::mt19937_64 rng(9);
    jitter(m, rng);
    const auto snap = random_snapshot(3, rng);
    const auto f = forward(m, snap, rng, 3);
    const LossWeights w{1.0, 10.0, 0.1};
    const auto l = loss(f, snap, w);
    double kl_y = 0.0, rec = 0.0;
    for (const auto& s : f.samples) {
      kl_y += kl_diag_gaussian(s.q_y, s.p_y);
      rec += reconstruction_nll(snap.x, snap.mask, s.y, s.sens);
    }
    kl_y /= 3.0;
    rec /= 3.0;
    const double kl_z = kl_diag_gaussian(f.q_z, f.p_z);
    CHECK(l.kl_z == doctest::Approx(kl_z).epsilon(1e-14));
    CHECK(l.kl_y == doctest::Approx(kl_y).epsilon(1e-14));
    CHECK(l.recon_nll == doctest::Approx(rec).epsilon(1e-14));
    CHECK(l.total == doctest::Approx(w.beta_z * kl_z + w.beta_y * kl_y + w.alpha * rec).epsilon(1e-14));
    CHECK(l.kl_z >= -1e-9);
    CHECK(l.kl_y >= -1e-9);
  }

  TEST_CASE("total is linear in each weight") {
    VeliModel m(tiny_config(), 2);
    std::mt19937_64 rng(2);
    const auto snap = random_snapshot(3, rng);
    const auto f = forward(m, snap, rng, 1);
    const auto base = loss(f, snap, {1, 1, 1});
    const auto doubled = loss(f, snap, {2, 1, 1});
    CHECK(doubled.total - base.total == doctest::Approx(base.recon_nll));
    const auto bz = loss(f, snap, {1, 3, 1});
    CHECK(bz.total - base.total == doctest::Approx(2 * base.kl_z));
  }

  TEST_CASE("analytic gradient matches central differences on tiny models") {
    std::mt19937_64 rng(2024);
    std::size_t checked = 0, good = 0;
    for (int trial = 0; trial < 8; ++trial) {
      ModelConfig c = tiny_config();
      c.samples = 1 + trial % 2;
      VeliModel m(c, 100 + trial);
      jitter(m, rng);
      const auto snap = random_snapshot(3, rng);
      const auto noise = draw_noise(m, c.samples, rng);
      std::vector<double> grad(m.param_count(), 0.0);
      const auto l = loss_gradient(m, snap, noise, grad);
      const auto p = m.parameters();
      CHECK(l.total == doctest::Approx(loss_at(m, p, snap, noise)).epsilon(1e-13));
      auto f = [&](const std::vector<double>& q) { return loss_at(m, q, snap, noise); };
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double fd = oracle::central_difference(f, p, i, 1e-5);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
        ++checked;
        good += std::abs(fd - grad[i]) / denom < 1e-3 ? 1 : 0;
      }
    }
    CHECK(double(good) >= 0.99 * double(checked));
  }

  TEST_CASE("log-variance gradient vanishes outside the clamp") {
    VeliModel m(tiny_config(), 1);
    m.head(Head::kNoise).log_variance_layer().bias(0)[0] = 25.0;  // pinned at the ceiling
    std::mt19937_64 rng(1);
    const SensorSnapshot snap{{1.0, 0.5, -0.5}, {1, 1, 1}, 0};
    const auto noise = draw_noise(m, 1, rng);
    std::vector<double> grad(m.param_count(), 0.0);
    loss_gradient(m, snap, noise, grad);
    const auto seg = m.segment(Head::kNoise);
    const auto& head = m.head(Head::kNoise);
    const std::size_t lv_offset = seg.offset + head.trunk().param_count() + head.mean_layer().param_count();
    const std::size_t lv_in = head.log_variance_layer().layer(0).in;
    // Row 0 of W and bias 0 of the log-variance layer feed only the clamped output.
    for (std::size_t i = 0; i < lv_in; ++i) CHECK(grad[lv_offset + i] == 0.0);
    CHECK(grad[lv_offset + lv_in * 3 + 0] == 0.0);
  }

  TEST_CASE("masked raw values never reach the model") {
    VeliModel m(ModelConfig{}, 4);
    const auto stats = data::ChannelStats::identity(10);
    std::vector<double> raw(10, 3.0), mask(10, 1.0);
    mask[2] = 0.0;
    raw[2] = 123.0;
    const auto a = data::make_snapshot(raw, mask, stats);
    raw[2] = -9e9;
    const auto b = data::make_snapshot(raw, mask, stats);
    raw[2] = std::numeric_limits<double>::quiet_NaN();
    const auto c = data::make_snapshot(raw, mask, stats);
    CHECK(a == b);
    CHECK(a == c);
    CHECK(a.x[2] == 0.0);
    CHECK(infer(m, a) == infer(m, b));
  }

  TEST_CASE("parallel and serial batch gradients are bitwise equal") {
    VeliModel m(ModelConfig{}, 6);
    const auto data = synthetic_snapshots(300, 6);
    std::mt19937_64 rng(6);
    std::vector<std::size_t> idx;
    std::vector<SampleNoise> noise;
    for (std::size_t i = 0; i < 200; ++i) {
      idx.push_back((i * 7) % data.size());
      noise.push_back(draw_noise(m, 1, rng));
    }
    const auto s = batch_gradient(m, data, idx, noise, Execution::kSerial);
    const auto p = batch_gradient(m, data, idx, noise, Execution::kParallel);
    CHECK(s.grad == p.grad);
    CHECK(s.mean_loss == p.mean_loss);
  }
}

TEST_SUITE("training") {
  TEST_CASE("zero epochs leave the model untouched") {
    VeliModel m(ModelConfig{}, 1);
    const auto before = m;
    const auto data = synthetic_snapshots(100, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto r = train(m, data, cfg);
    CHECK(r.history.empty());
    CHECK(m == before);
  }

  TEST_CASE("training rejects empty data and unobserved snapshots") {
    VeliModel m(ModelConfig{}, 1);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(m, std::vector<SensorSnapshot>{}, cfg), DataError);
    std::vector<SensorSnapshot> data{SensorSnapshot{std::vector<double>(10, 0.0), std::vector<double>(10, 0.0), 0}};
    CHECK_THROWS_AS(train(m, data, cfg), DataError);
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("same seed and data give bitwise identical parameters") {
    const auto data = synthetic_snapshots(400, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 1e-3;
    cfg.seed = 5;
    VeliModel a(ModelConfig{}, 5), b(ModelConfig{}, 5);
    const auto ra = train(a, data, cfg);
    cfg.execution = Execution::kSerial;
    const auto rb = train(b, data, cfg);
    CHECK(a.parameters() == b.parameters());
    CHECK(ra.history == rb.history);
  }

  TEST_CASE("thirty epochs at the default learning rate lower the loss") {
    const auto data = synthetic_snapshots(2000, 3);
    VeliModel m(ModelConfig{}, 3);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 3;
    const auto r = train(m, data, cfg);
    REQUIRE(r.history.size() == 30);
    CHECK(r.history.back().total < r.history.front().total);
  }

  TEST_CASE("non-finite loss aborts and keeps the last finite parameters") {
    const auto data = synthetic_snapshots(200, 4);
    VeliModel m(ModelConfig{}, 4);
    auto p = m.parameters();
    p[m.segment(Head::kNoise).offset] = std::numeric_limits<double>::quiet_NaN();
    m.set_parameters(p);
    const auto before = m.parameters();
    TrainConfig cfg;
    cfg.epochs = 2;
    try {
      train(m, data, cfg);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("epoch") != std::string::npos);
      CHECK(std::string(e.what()).find("batch") != std::string::npos);
    }
    const auto after = m.parameters();
    for (std::size_t i = 0; i < after.size(); ++i)
      CHECK((after[i] == before[i] || (std::isnan(after[i]) && std::isnan(before[i]))));
  }

  TEST_CASE("fine-tuning moves only the encoder") {
    const auto data = synthetic_snapshots(300, 5);
    VeliModel m(ModelConfig{}, 5);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.learning_rate = 1e-3;
    train(m, data, cfg);
    const auto before = m;
    fine_tune(m, data, cfg);
    CHECK(m.head(Head::kDecoder) == before.head(Head::kDecoder));
    CHECK(m.head(Head::kPriorZ) == before.head(Head::kPriorZ));
    CHECK(m.head(Head::kPriorY) == before.head(Head::kPriorY));
    CHECK(m.head(Head::kNoise) == before.head(Head::kNoise));
    CHECK_FALSE(m.head(Head::kEncoder) == before.head(Head::kEncoder));
  }
}

TEST_SUITE("inference") {
  TEST_CASE("infer is deterministic with positive widths") {
    VeliModel m(ModelConfig{}, 8);
    std::mt19937_64 rng(8);
    const auto snap = random_snapshot(10, rng);
    const auto a = infer(m, snap), b = infer(m, snap);
    CHECK(a == b);
    for (double s : a.y_std) CHECK(s > 0.0);
    CHECK(a.z_mean.size() == 4);
  }

  TEST_CASE("infer de-standardizes with the stored statistics") {
    VeliModel m(ModelConfig{}, 8);
    m.set_parameters(std::vector<double>(m.param_count(), 0.0));
    for (std::size_t i = 0; i < 10; ++i) {
      m.head(Head::kDecoder).mean_layer().bias(0)[i] = 1.0;
      m.head(Head::kDecoder).log_variance_layer().bias(0)[i] = std::log(4.0);
    }
    data::ChannelStats st{std::vector<double>(10, 20.0), std::vector<double>(10, 5.0)};
    m.set_standardization(st);
    const auto r = infer(m, SensorSnapshot{std::vector<double>(10, 0.0), std::vector<double>(10, 1.0), 0});
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(r.y_hat[i] == doctest::Approx(25.0));
      CHECK(r.y_std[i] == doctest::Approx(10.0));
    }
    CHECK(r.fused() == doctest::Approx(25.0));
  }

  TEST_CASE("batched inference matches single calls") {
    VeliModel m(ModelConfig{}, 2);
    const auto data = synthetic_snapshots(64, 2);
    const auto par = infer_batch(m, data, Execution::kParallel);
    const auto ser = infer_batch(m, data, Execution::kSerial);
    REQUIRE(par.size() == data.size());
    CHECK(par == ser);
    CHECK(par[17] == infer(m, data[17]));
  }

  TEST_CASE("masking channels widens the band after training with missing data") {
    data::ChannelStats stats;
    const auto data = synthetic_snapshots(2000, 12, &stats);
    VeliModel m(ModelConfig{}, 12);
    m.set_standardization(stats);
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.learning_rate = 1e-3;
    cfg.seed = 12;
    train(m, data, cfg);
    int wider = 0, total = 0;
    for (std::size_t t = 0; t < data.size(); t += 50) {
      SensorSnapshot full = data[t];
      if (full.observed() < 10) continue;
      SensorSnapshot sparse = full;
      for (std::size_t i = 1; i < 10; ++i) {
        sparse.x[i] = 0.0;
        sparse.mask[i] = 0.0;
      }
      const auto a = infer(m, full), b = infer(m, sparse);
      double sa = 0, sb = 0;
      for (std::size_t i = 0; i < 10; ++i) {
        sa += a.y_std[i];
        sb += b.y_std[i];
      }
      ++total;
      wider += sb >= sa ? 1 : 0;
    }
    REQUIRE(total > 0);
    CHECK(wider == total);
  }
}

TEST_SUITE("model-io") {
  TEST_CASE("save/load round-trips the full model") {
    ModelConfig c;
    c.sensors = 5;
    c.latent = 3;
    c.hidden = 7;
    c.samples = 2;
    c.weights = {0.5, 3.0, 0.3};
    VeliModel m(c, 77);
    std::mt19937_64 rng(1);
    jitter(m, rng);
    m.set_standardization({{1.0 / 3.0, 2, 3, 4, 5}, {0.1, 0.2, 0.3, 0.4, 0.5}});
    std::stringstream ss;
    save_model(ss, m, "abc123");
    const auto back = load_model(ss);
    CHECK(back == m);
    CHECK(back.config() == c);
    CHECK(back.seed() == 77);
  }

  TEST_CASE("corrupted checkpoints are data errors") {
    VeliModel m(tiny_config(), 1);
    std::stringstream ss;
    save_model(ss, m);
    std::string text = ss.str();
    text.replace(text.find("meta sensors 3"), 14, "meta sensors 4");
    std::stringstream bad(text);
    CHECK_THROWS_AS(load_model(bad), DataError);
  }
}
