#include <doctest.h>

#include <cmath>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "ssig/backprop.hpp"
#include "ssig/data.hpp"
#include "ssig/distributions.hpp"
#include "ssig/error.hpp"
#include "ssig/model.hpp"
#include "ssig/objective.hpp"

using namespace ssig;

namespace {

PriorConfig prior_for(const Architecture& arch, double lam = 0.2) {
  PriorConfig p;
  p.lambda.assign(arch.num_layers(), lam);
  p.lambda.back() = 1.0;
  return p;
}

RealizedSample sample_from(std::vector<Matrix> weights) {
  RealizedSample s;
  for (auto& w : weights) {
    LayerSample ls;
    ls.weights = std::move(w);
    s.layers.push_back(std::move(ls));
  }
  return s;
}

struct Toy {
  Matrix x;
  std::vector<double> y;
};

Toy toy_data(std::size_t n, std::size_t p, std::uint64_t seed) {
  RandomStream rs(seed, 3);
  Toy t{Matrix(n, p), std::vector<double>(n)};
  for (double& v : t.x.values()) v = 2.0 * rs.next_uniform() - 1.0;
  for (double& v : t.y) v = rs.next_normal();
  return t;
}

}  // namespace

TEST_CASE("enum names round trip") {
  for (Activation a : {Activation::sigmoid, Activation::swish, Activation::tanh, Activation::relu}) {
    CHECK(parse_activation(to_string(a)) == a);
  }
  for (MaskMode m : {MaskMode::hard, MaskMode::soft, MaskMode::mean}) {
    CHECK(parse_mask_mode(to_string(m)) == m);
  }
  CHECK(parse_mode(to_string(Mode::dense)) == Mode::dense);
  CHECK(parse_task(to_string(Task::classification)) == Task::classification);
  CHECK(parse_init_scheme(to_string(InitScheme::fan_in_uniform)) == InitScheme::fan_in_uniform);
  CHECK_THROWS(parse_activation("gelu"));
}

TEST_CASE("activation derivatives") {
  for (Activation a : {Activation::sigmoid, Activation::swish, Activation::tanh, Activation::relu}) {
    for (double x : {-3.0, -0.7, 0.4, 2.5}) {
      const double h = 1e-6;
      const double fd = (activate(a, x + h) - activate(a, x - h)) / (2 * h);
      CHECK(activate_derivative(a, x) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  CHECK(activate_derivative(Activation::relu, 0.0) == 0.0);
  CHECK(activate(Activation::sigmoid, 0.0) == 0.5);
  CHECK(activate(Activation::swish, 1.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("architecture validation") {
  CHECK_THROWS_AS((Architecture{{3}}.validate()), ArgumentError);
  CHECK_THROWS_AS((Architecture{{3, 0, 1}}.validate()), ArgumentError);
  CHECK_NOTHROW((Architecture{{3, 1}}.validate()));
  const Architecture a{{5, 20, 20, 1}};
  CHECK(a.depth() == 2);
  CHECK(a.num_layers() == 3);
}

TEST_CASE("init_state") {
  const Architecture arch{{2, 4, 3, 1}};
  const VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 17);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& p = s.layers[l];
    CHECK(p.mu.rows() == arch.widths[l + 1]);
    CHECK(p.mu.cols() == arch.widths[l] + 1);
    for (double r : p.rho.values()) CHECK(softplus(r) == doctest::Approx(0.00247569).epsilon(1e-6));
    for (double m : p.mu.values()) CHECK(std::abs(m) <= 0.6);
    for (std::size_t j = 0; j < p.mu.rows(); ++j) {
      CHECK(s.gamma(l, j) == doctest::Approx(l < 2 ? 0.99 : 1.0).epsilon(1e-14));
    }
  }
  CHECK(s.layers.back().phi.empty());
  CHECK(init_state(arch, prior_for(arch), Mode::ssig, 17) == s);
  CHECK_FALSE(init_state(arch, prior_for(arch), Mode::ssig, 18) == s);

  InitOptions fan;
  fan.scheme = InitScheme::fan_in_uniform;
  const VariationalState f = init_state(arch, prior_for(arch), Mode::ssig, 17, fan);
  for (std::size_t l = 0; l < 3; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(arch.widths[l]));
    for (double m : f.layers[l].mu.values()) CHECK(std::abs(m) <= bound);
  }

  PriorConfig bad = prior_for(arch);
  bad.lambda.pop_back();
  CHECK_THROWS(init_state(arch, bad, Mode::ssig, 1));
  bad = prior_for(arch);
  bad.lambda.back() = 0.5;
  CHECK_THROWS(init_state(arch, bad, Mode::ssig, 1));

  const VariationalState d = init_state(arch, prior_for(arch), Mode::dense, 17);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(d.layers[l].phi.empty());
    CHECK(d.gamma(l, 0) == 1.0);
  }
}

TEST_CASE("draw_sample realizations") {
  const Architecture arch{{3, 6, 1}};
  VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 5);
  for (double& f : s.layers[0].phi) f = 0.3;

  RandomStream a(9, 1), b(9, 1);
  const RealizedSample hard = draw_sample(s, a, MaskMode::hard, 0.5);
  const RealizedSample soft = draw_sample(s, b, MaskMode::soft, 0.5);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(hard.layers[l].zeta == soft.layers[l].zeta);
    CHECK(hard.layers[l].u == soft.layers[l].u);
    const auto& p = s.layers[l];
    for (std::size_t j = 0; j < p.mu.rows(); ++j) {
      const double zh = hard.layers[l].z_hard[j];
      const double zs = soft.layers[l].z_soft[j];
      CHECK(hard.layers[l].z[j] == zh);
      CHECK(soft.layers[l].z[j] == zs);
      for (std::size_t c = 0; c < p.mu.cols(); ++c) {
        const double w = p.mu(j, c) + softplus(p.rho(j, c)) * hard.layers[l].zeta(j, c);
        CHECK(hard.layers[l].weights(j, c) == zh * w);
        CHECK(soft.layers[l].weights(j, c) == zs * w);
      }
    }
  }
  for (double z : hard.layers[1].z) CHECK(z == 1.0);

  VariationalState mean_state = init_state(arch, prior_for(arch), Mode::ssig, 5);
  RandomStream c(9, 1);
  const RealizedSample mean = draw_sample(mean_state, c, MaskMode::mean, 0.5);
  for (std::size_t l = 0; l < 2; ++l) CHECK(mean.layers[l].weights == mean_state.layers[l].mu);

  CHECK_THROWS(draw_sample(s, c, MaskMode::hard, 0.0));
}

TEST_CASE("dense mode ignores the uniforms") {
  const Architecture arch{{3, 8, 1}};
  const VariationalState s = init_state(arch, prior_for(arch), Mode::dense, 5);
  RandomStream rs(2, 2);
  for (int i = 0; i < 100; ++i) {
    const RealizedSample smp = draw_sample(s, rs, MaskMode::hard, 0.5);
    for (auto z : smp.layers[0].z_hard) REQUIRE(z == 1);
  }
}

TEST_CASE("hard masks follow gamma") {
  const Architecture arch{{2, 10, 1}};
  const VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 5);
  RandomStream rs(3, 3);
  double active = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const RealizedSample smp = draw_sample(s, rs, MaskMode::hard, 0.5);
    for (auto z : smp.layers[0].z_hard) active += z;
  }
  CHECK(std::abs(active / (draws * 10.0) - 0.99) < 0.01);
}

TEST_CASE("forward on the Sim I teacher") {
  const Architecture arch = sim1_teacher_architecture();
  const RealizedSample smp = sample_from(sim1_teacher_weights());
  const auto out = forward(arch, smp, std::vector<double>{0.0, 0.0});
  REQUIRE(out.size() == 1);
  CHECK(out[0] == doctest::Approx(6.9598426).epsilon(1e-7));
  CHECK(out[0] == doctest::Approx(oracle::teacher(0.0, 0.0)).epsilon(1e-14));
  RandomStream rs(4, 4);
  for (int i = 0; i < 50; ++i) {
    const double x1 = 2.0 * rs.next_uniform() - 1.0, x2 = 2.0 * rs.next_uniform() - 1.0;
    CHECK(forward(arch, smp, std::vector<double>{x1, x2})[0] ==
          doctest::Approx(oracle::teacher(x1, x2)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(forward(arch, smp, std::vector<double>{1.0}), ShapeError);
}

TEST_CASE("single affine layer with identity weights") {
  const Architecture arch{{3, 3}};
  Matrix w(3, 4);
  for (std::size_t i = 0; i < 3; ++i) w(i, i + 1) = 1.0;
  const std::vector<double> x{0.25, -1.5, 3.0};
  CHECK(forward(arch, sample_from({w}), x) == x);
}

TEST_CASE("masking zeroes a weight row") {
  const Architecture arch{{2, 3, 2, 1}};
  VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 3);
  s.layers[0].phi[1] = -30.0;  // gamma clamped near 0: node 1 of hidden layer 1 is always off
  RandomStream rs(1, 1);
  RealizedSample smp = draw_sample(s, rs, MaskMode::hard, 0.5);
  REQUIRE(smp.layers[0].z_hard[1] == 0);

  // Same draw with the mask forced on, then row 1 zeroed by hand.
  RealizedSample manual = smp;
  for (std::size_t c = 0; c < 3; ++c) manual.layers[0].weights(1, c) = 0.0;
  RandomStream pts(2, 2);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> x{pts.next_normal(), pts.next_normal()};
    const auto a = forward(arch, smp, x);
    const auto b = forward(arch, manual, x);
    CHECK(a[0] == b[0]);
  }

  // The pruned node's activation is psi(0), not 0.
  const Matrix x{{0.3, -0.8}, {1.0, 2.0}};
  std::vector<Matrix> weights;
  for (auto& l : smp.layers) weights.push_back(l.weights);
  const ForwardCache cache = forward_batch(arch, weights, x);
  CHECK(cache.act[1](0, 1) == 0.5);
  CHECK(cache.act[1](1, 1) == 0.5);
}

TEST_CASE("forward is deterministic and batch agrees with single rows") {
  const Architecture arch{{4, 5, 3, 2}, Activation::swish};
  const VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 8);
  RandomStream rs(6, 6);
  const RealizedSample smp = draw_sample(s, rs, MaskMode::hard, 0.5);
  const Toy t = toy_data(9, 4, 1);
  const Matrix out = forward_batch(arch, smp, t.x);
  CHECK(forward_batch(arch, smp, t.x) == out);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto o = forward(arch, smp, t.x.row(i));
    CHECK(o[0] == doctest::Approx(out(i, 0)).epsilon(1e-14));
    CHECK(o[1] == doctest::Approx(out(i, 1)).epsilon(1e-14));
  }
}

TEST_CASE("soft-mode gradients match finite differences") {
  for (Activation act : {Activation::sigmoid, Activation::tanh, Activation::swish}) {
    const Architecture arch{{2, 3, 1}, act};
    const Toy t = toy_data(8, 2, 10);
    const BatchView batch{t.x, t.y, {}};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const VariationalState s = gradcheck::random_state(arch, seed);
      const RandomStream stream(seed, 99);
      const gradcheck::Result r =
          gradcheck::check(s, batch, 8, 1, 0.5, stream, MaskMode::soft);
      CHECK(r.mu < 1e-4);
      CHECK(r.rho < 1e-4);
      CHECK(r.phi < 1e-4);
    }
  }
}

TEST_CASE("gradients with minibatch scaling, several draws and two hidden layers") {
  const Architecture arch{{3, 4, 3, 1}};
  const Toy t = toy_data(12, 3, 11);
  const std::vector<std::size_t> rows{1, 4, 5, 9, 11};
  const BatchView batch{t.x, t.y, rows};
  const VariationalState s = gradcheck::random_state(arch, 4);
  const gradcheck::Result r = gradcheck::check(s, batch, 12, 3, 0.5, RandomStream(4, 4), MaskMode::soft);
  CHECK(r.max() < 1e-4);
}

TEST_CASE("classification gradients") {
  const Architecture arch{{2, 3, 3}, Activation::sigmoid, Task::classification};
  Toy t = toy_data(8, 2, 12);
  for (std::size_t i = 0; i < 8; ++i) t.y[i] = static_cast<double>(i % 3);
  const BatchView batch{t.x, t.y, {}};
  const VariationalState s = gradcheck::random_state(arch, 6);
  CHECK(gradcheck::check(s, batch, 8, 1, 0.5, RandomStream(6, 6), MaskMode::soft).max() < 1e-4);
}

TEST_CASE("hard-mode gradients are those of the coupled relaxation") {
  const Architecture arch{{2, 5, 4, 1}};
  const Toy t = toy_data(10, 2, 13);
  const BatchView batch{t.x, t.y, {}};
  const VariationalState s = gradcheck::random_state(arch, 7);
  RandomStream a(7, 7), b(7, 7);
  const auto hard = loss_and_gradients(s, batch, 10, 2, 0.5, a, MaskMode::hard);
  const auto soft = loss_and_gradients(s, batch, 10, 2, 0.5, b, MaskMode::soft);
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t i = 0; i < hard.grads.layers[l].mu.size(); ++i) {
      CHECK(hard.grads.layers[l].mu.values()[i] ==
            doctest::Approx(soft.grads.layers[l].mu.values()[i]).epsilon(1e-13));
      CHECK(hard.grads.layers[l].rho.values()[i] ==
            doctest::Approx(soft.grads.layers[l].rho.values()[i]).epsilon(1e-13));
    }
    for (std::size_t j = 0; j < hard.grads.layers[l].phi.size(); ++j) {
      CHECK(hard.grads.layers[l].phi[j] ==
            doctest::Approx(soft.grads.layers[l].phi[j]).epsilon(1e-13));
    }
  }
  CHECK(hard.grads.layers.back().phi.empty());
  CHECK(hard.loss.kl_bern == soft.loss.kl_bern);
  CHECK(hard.loss.kl_gauss == soft.loss.kl_gauss);
}

TEST_CASE("hard and soft losses agree when the relaxation is sharp") {
  const Architecture arch{{2, 6, 1}};
  const Toy t = toy_data(10, 2, 14);
  const BatchView batch{t.x, t.y, {}};
  VariationalState s = gradcheck::random_state(arch, 8);
  for (std::size_t j = 0; j < 6; ++j) s.layers[0].phi[j] = j % 2 == 0 ? 12.0 : -12.0;
  int checked = 0;
  for (std::uint64_t k = 0; k < 40; ++k) {
    RandomStream probe(k, 5);
    const RealizedSample smp = draw_sample(s, probe, MaskMode::hard, 0.05);
    bool sharp = true;
    for (std::size_t j = 0; j < 6; ++j) {
      sharp = sharp && std::abs(smp.layers[0].z_soft[j] - smp.layers[0].z_hard[j]) < 1e-4;
    }
    if (!sharp) continue;
    RandomStream a(k, 5), b(k, 5);
    const double lh = loss_and_gradients(s, batch, 10, 1, 0.05, a, MaskMode::hard).loss.total;
    const double ls = loss_and_gradients(s, batch, 10, 1, 0.05, b, MaskMode::soft).loss.total;
    CHECK(std::abs(lh - ls) < 1e-3);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("KL terms vanish at the prior") {
  const Architecture arch{{2, 3, 1}};
  VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 1);
  const double rho = 0.0;
  const double sigma = softplus(rho);
  s.prior.sigma0_2 = sigma * sigma;
  for (auto& p : s.layers) {
    p.mu.fill(0.0);
    p.rho.fill(rho);
    for (double& f : p.phi) f = 40.0;
  }
  s.prior.lambda[0] = s.gamma(0, 0);
  const KlTerms kl = kl_terms(s);
  CHECK(kl.bern == 0.0);
  CHECK(std::abs(kl.gauss) < 1e-14);
  Gradients g = Gradients::zeros_like(s);
  add_kl_gradients(s, g);
  for (auto block : gradient_blocks(g)) {
    for (double v : block) CHECK(std::abs(v) < 1e-14);
  }
}

TEST_CASE("dense mode loss equals likelihood plus Gaussian KL") {
  const Architecture arch{{2, 4, 1}};
  const Toy t = toy_data(8, 2, 15);
  const BatchView batch{t.x, t.y, {}};
  VariationalState s = gradcheck::random_state(arch, 9);
  s.mode = Mode::dense;
  for (auto& p : s.layers) p.phi.clear();
  s.prior.sigma0_2 = 0.7;

  RandomStream rs(3, 3);
  const auto lg = loss_and_gradients(s, batch, 8, 1, 0.5, rs, MaskMode::hard);

  // Reassemble by hand from the same draws.
  RandomStream rep(3, 3);
  std::vector<Matrix> w;
  for (const auto& p : s.layers) {
    Matrix zeta(p.mu.rows(), p.mu.cols());
    rep.fill_normal(zeta.values());
    std::vector<double> u(p.mu.rows());
    rep.fill_uniform(u);
    Matrix wl(p.mu.rows(), p.mu.cols());
    for (std::size_t i = 0; i < wl.size(); ++i) {
      wl.values()[i] = p.mu.values()[i] + std::log1p(std::exp(p.rho.values()[i])) * zeta.values()[i];
    }
    w.push_back(wl);
  }
  double nll = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    double out = w[1](0, 0);
    for (std::size_t j = 0; j < 4; ++j) {
      const double pre = w[0](j, 0) + w[0](j, 1) * t.x(i, 0) + w[0](j, 2) * t.x(i, 1);
      out += w[1](0, j + 1) * oracle::logistic(pre);
    }
    const double r = t.y[i] - out;
    nll += 0.5 * std::log(2.0 * 3.14159265358979323846) + 0.5 * r * r;
  }
  double klg = 0.0;
  for (const auto& p : s.layers) {
    std::vector<double> mu(p.mu.values().begin(), p.mu.values().end());
    std::vector<double> s2;
    for (double r : p.rho.values()) s2.push_back(std::pow(std::log1p(std::exp(r)), 2));
    klg += oracle::kl_gaussian(mu, s2, 0.7);
  }
  CHECK(lg.loss.kl_bern == 0.0);
  CHECK(lg.loss.nll == doctest::Approx(nll).epsilon(1e-12));
  CHECK(lg.loss.kl_gauss == doctest::Approx(klg).epsilon(1e-12));
  CHECK(lg.loss.total == doctest::Approx(nll + klg).epsilon(1e-12));
}

TEST_CASE("loss_and_gradients argument checks") {
  const Architecture arch{{2, 3, 1}};
  const VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 1);
  const Toy t = toy_data(4, 2, 1);
  const std::vector<std::size_t> none;
  RandomStream rs(1, 1);
  const std::vector<std::size_t> one{0};
  CHECK_THROWS_AS(loss_and_gradients(s, BatchView{t.x, t.y, one}, 4, 0, 0.5, rs, MaskMode::hard),
                  ArgumentError);
  const Matrix empty(0, 2);
  CHECK_THROWS_AS(loss_and_gradients(s, BatchView{empty, {}, none}, 4, 1, 0.5, rs, MaskMode::hard),
                  ArgumentError);
}

TEST_CASE("parameter blocks are ordered mu, rho, phi per layer") {
  const Architecture arch{{2, 3, 4, 1}};
  VariationalState s = init_state(arch, prior_for(arch), Mode::ssig, 1);
  auto blocks = parameter_blocks(s);
  REQUIRE(blocks.size() == 8);
  CHECK(blocks[0].data() == s.layers[0].mu.data());
  CHECK(blocks[1].data() == s.layers[0].rho.data());
  CHECK(blocks[2].data() == s.layers[0].phi.data());
  CHECK(blocks[7].data() == s.layers[2].rho.data());
  Gradients g = Gradients::zeros_like(s);
  CHECK(gradient_blocks(g).size() == 8);
}
