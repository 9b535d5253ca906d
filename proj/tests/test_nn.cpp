#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include "cagnet/checkpoint.hpp"
#include "cagnet/nn.hpp"
#include "cagnet/rng.hpp"

using namespace cagnet;

namespace {

Tensor vec(std::vector<double> v) {
  Tensor t({v.size()});
  t.values = std::move(v);
  return t;
}

void randomize(Parameter& p, Rng& rng, double scale = 1.0) {
  p.init_uniform(rng, scale);
}

}  // namespace

TEST_CASE("linear: identity and zero input") {
  Parameter W("W", {3, 3}), b("b", {3});
  for (std::size_t i = 0; i < 3; ++i) W.value.at(i, i) = 1.0;
  Tensor x = vec({1.0, -2.0, 3.0});
  Tensor y = nn::linear(x, W, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == x[i]);

  b.value.values = {0.5, -0.5, 2.0};
  Tensor z = nn::linear(vec({0.0, 0.0, 0.0}), W, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(z[i] == b.value[i]);

  CHECK_THROWS_AS(nn::linear(vec({1.0}), W, b), std::invalid_argument);
}

TEST_CASE("linear gradients match finite differences") {
  Rng rng(2);
  Parameter W("W", {4, 3}), b("b", {4});
  randomize(W, rng);
  randomize(b, rng);
  Tensor x = vec({0.3, -1.2, 0.7});
  Tensor target = vec({0.1, 0.2, -0.4, 1.0});

  std::vector<Parameter*> params = {&W, &b};
  auto eval = [&](bool with_grad) {
    Tensor y = nn::linear(x, W, b);
    double loss = 0.0;
    Tensor dy({4});
    for (std::size_t i = 0; i < 4; ++i) {
      loss += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
      dy[i] = y[i] - target[i];
    }
    if (with_grad) {
      for (Parameter* p : params) p->zero_grad();
      nn::linear_backward(x, W, b, dy);
    }
    return loss;
  };
  auto report = nn::grad_check(params, eval, 1e-6);
  CHECK(report.max_rel_error <= 1e-6);
}

TEST_CASE("lstm closed forms") {
  const std::size_t H = 3;
  nn::LSTMParams params("cell", H, H);

  // all-zero parameters: i=f=o=0.5, g=0 -> c' = c/2, h' = tanh(c/2)/2
  nn::LSTMState state(H);
  state.c = {1.0, -2.0, 0.5};
  std::vector<double> x(H, 0.9);
  nn::LSTMState out = nn::lstm_step(x, state, params);
  for (std::size_t j = 0; j < H; ++j) {
    CHECK(out.c[j] == doctest::Approx(0.5 * state.c[j]).epsilon(1e-15));
    CHECK(out.h[j] == doctest::Approx(0.5 * std::tanh(0.5 * state.c[j])).epsilon(1e-15));
  }

  // zero input, zero state, zero params -> h' = 0
  nn::LSTMState zero(H);
  std::vector<double> zx(H, 0.0);
  out = nn::lstm_step(zx, zero, params);
  for (double h : out.h) CHECK(h == 0.0);

  nn::LSTMState bad(H);
  bad.h[0] = NAN;
  CHECK_THROWS_AS(nn::lstm_step(zx, bad, params), std::domain_error);
}

TEST_CASE("lstm gradients match finite differences (H=4)") {
  Rng rng(5);
  const std::size_t H = 4, I = 3;
  nn::LSTMParams params("cell", I, H);
  randomize(params.Wx, rng, 0.6);
  randomize(params.Wh, rng, 0.6);
  randomize(params.b, rng, 0.3);
  std::vector<double> x = {0.4, -0.9, 1.1};
  nn::LSTMState s0(H);
  for (std::size_t j = 0; j < H; ++j) {
    s0.h[j] = rng.uniform(-0.5, 0.5);
    s0.c[j] = rng.uniform(-0.5, 0.5);
  }

  std::vector<Parameter*> plist = {&params.Wx, &params.Wh, &params.b};
  auto eval = [&](bool with_grad) {
    nn::LSTMCache cache;
    nn::LSTMState out = nn::lstm_step(x, s0, params, &cache);
    double loss = 0.0;
    std::vector<double> dh(H), dc(H, 0.0);
    for (std::size_t j = 0; j < H; ++j) {
      loss += 0.5 * out.h[j] * out.h[j] + 0.25 * out.c[j] * out.c[j];
      dh[j] = out.h[j];
      dc[j] = 0.5 * out.c[j];
    }
    if (with_grad) {
      for (Parameter* p : plist) p->zero_grad();
      std::vector<double> dx(I, 0.0), dhp(H, 0.0), dcp(H, 0.0);
      nn::lstm_backward(cache, params, dh, dc, dx, dhp, dcp);
    }
    return loss;
  };
  auto report = nn::grad_check(plist, eval, 1e-5);
  CHECK(report.max_rel_error <= 1e-5);
}

TEST_CASE("softmax_cross_entropy values and gradient") {
  CHECK(nn::softmax_cross_entropy(vec({1.0, 1.0, 1.0, 1.0}), 2) ==
        doctest::Approx(std::log(4.0)).epsilon(1e-15));

  // saturated correct class
  CHECK(nn::softmax_cross_entropy(vec({1e6, 0.0, 0.0}), 0) ==
        doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(nn::softmax_cross_entropy(vec({1.0, 2.0}), 5), std::out_of_range);

  // softmax itself sums to one
  auto p = nn::softmax(std::vector<double>{0.3, -2.0, 5.0, 1.1});
  double sum = 0.0;
  for (double v : p) sum += v;
  CHECK(std::fabs(sum - 1.0) <= 1e-12);

  // gradient vs finite differences through a parameterized logit vector
  Rng rng(7);
  Parameter logits("logits", {5});
  randomize(logits, rng, 2.0);
  std::vector<Parameter*> params = {&logits};
  auto eval = [&](bool with_grad) {
    Tensor dl;
    const double loss = nn::softmax_cross_entropy(logits.value, 3, &dl);
    if (with_grad) {
      logits.zero_grad();
      logits.grad = dl;
    }
    return loss;
  };
  CHECK(nn::grad_check(params, eval, 1e-6).max_rel_error <= 1e-6);
}

TEST_CASE("binary_cross_entropy values and gradient") {
  CHECK(nn::binary_cross_entropy(vec({0.0}), {1.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(nn::binary_cross_entropy(vec({0.0, 0.0, 0.0, 0.0}), {1.0, 0.0, 1.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(nn::binary_cross_entropy(vec({0.0, 1.0}), {1.0}),
                  std::invalid_argument);

  // non-negative on fuzzed inputs
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor z({6});
    std::vector<double> t(6);
    for (std::size_t i = 0; i < 6; ++i) {
      z[i] = rng.uniform(-8.0, 8.0);
      t[i] = rng.index(2);
    }
    CHECK(nn::binary_cross_entropy(z, t) >= 0.0);
  }

  Parameter logits("logits", {4});
  randomize(logits, rng, 3.0);
  std::vector<double> targets = {1.0, 0.0, 0.0, 1.0};
  std::vector<Parameter*> params = {&logits};
  auto eval = [&](bool with_grad) {
    Tensor dl;
    const double loss = nn::binary_cross_entropy(logits.value, targets, &dl);
    if (with_grad) {
      logits.zero_grad();
      logits.grad = dl;
    }
    return loss;
  };
  CHECK(nn::grad_check(params, eval, 1e-6).max_rel_error <= 1e-6);
}

TEST_CASE("fusion: sum and adaptive identity cases") {
  Tensor a = vec({1.0, 2.0}), b = vec({3.0, -1.0}), c = vec({0.5, 0.5});

  nn::FusionParams sum_gates("f", 3, 2, nn::FusionMode::Sum, true);
  Tensor s = nn::adaptive_fuse(a, b, c, sum_gates, nn::FusionMode::Sum);
  CHECK(s[0] == 4.5);
  CHECK(s[1] == 1.5);

  // equal gate logits + identical inputs -> the same vector
  nn::FusionParams a1("f", 3, 2, nn::FusionMode::Adaptive1, true);
  Tensor v = vec({0.7, -0.3});
  Tensor out = nn::adaptive_fuse(v, v, v, a1, nn::FusionMode::Adaptive1);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(out[i] == doctest::Approx(v[i]).epsilon(1e-15));
  }

  Tensor bad = vec({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(nn::adaptive_fuse(a, bad, c, a1, nn::FusionMode::Adaptive1),
                  std::invalid_argument);
}

TEST_CASE("fusion: convex modes stay inside the per-coordinate hull") {
  Rng rng(11);
  for (nn::FusionMode mode : {nn::FusionMode::Adaptive1, nn::FusionMode::Adaptive2}) {
    nn::FusionParams gates("f", 3, 4, mode, true);
    if (mode == nn::FusionMode::Adaptive1) {
      randomize(gates.gate_all, rng, 2.0);
    } else {
      randomize(gates.gate_ctx, rng, 2.0);
      randomize(gates.gate_local, rng, 2.0);
    }
    Tensor a({4}), b({4}), c({4});
    for (std::size_t i = 0; i < 4; ++i) {
      a[i] = rng.uniform(-2.0, 2.0);
      b[i] = rng.uniform(-2.0, 2.0);
      c[i] = rng.uniform(-2.0, 2.0);
    }
    Tensor out = nn::adaptive_fuse(a, b, c, gates, mode);
    for (std::size_t i = 0; i < 4; ++i) {
      const double lo = std::min({a[i], b[i], c[i]});
      const double hi = std::max({a[i], b[i], c[i]});
      CHECK(out[i] >= lo - 1e-12);
      CHECK(out[i] <= hi + 1e-12);
    }
  }
}

TEST_CASE("fusion: gate logits shifted by a constant leave the output unchanged") {
  nn::FusionParams gates("f", 3, 2, nn::FusionMode::Adaptive1, true);
  gates.gate_all.value.values = {0.25, -0.5, 1.0};
  Tensor a = vec({1.0, 2.0}), b = vec({-1.0, 0.5}), c = vec({3.0, -2.0});
  Tensor base = nn::adaptive_fuse(a, b, c, gates, nn::FusionMode::Adaptive1);
  for (double& g : gates.gate_all.value.values) g += 2.0;  // exactly representable
  Tensor shifted = nn::adaptive_fuse(a, b, c, gates, nn::FusionMode::Adaptive1);
  CHECK(std::memcmp(base.data(), shifted.data(), 2 * sizeof(double)) == 0);
}

TEST_CASE("fusion gradients match finite differences across all modes") {
  Rng rng(13);
  const std::size_t d = 3;
  for (nn::FusionMode mode :
       {nn::FusionMode::Sum, nn::FusionMode::Product, nn::FusionMode::Concat,
        nn::FusionMode::Adaptive1, nn::FusionMode::Adaptive2}) {
    CAPTURE(nn::fusion_mode_name(mode));
    nn::FusionParams gates("f", 3, d, mode, true);
    Parameter in_a("a", {d}), in_b("b", {d}), in_c("c", {d});
    for (Parameter* p : {&in_a, &in_b, &in_c}) randomize(*p, rng, 1.0);
    std::vector<Parameter*> params = {&in_a, &in_b, &in_c};
    gates.collect(params, mode);
    for (Parameter* p : params) {
      if (p->name.find(".gate") != std::string::npos) randomize(*p, rng, 1.0);
      if (p->name == "f.Wc") randomize(*p, rng, 0.7);
    }

    auto eval = [&](bool with_grad) {
      nn::FusionCache cache;
      Tensor out = nn::adaptive_fuse(in_a.value, in_b.value, in_c.value, gates, mode,
                                     &cache);
      double loss = 0.0;
      Tensor dout({d});
      for (std::size_t i = 0; i < d; ++i) {
        loss += 0.5 * out[i] * out[i] + 0.3 * out[i];
        dout[i] = out[i] + 0.3;
      }
      if (with_grad) {
        for (Parameter* p : params) p->zero_grad();
        std::vector<Tensor> dinputs(3, Tensor({d}));
        nn::adaptive_fuse_backward(cache, gates, mode, dout, dinputs);
        in_a.grad = dinputs[0];
        in_b.grad = dinputs[1];
        in_c.grad = dinputs[2];
      }
      return loss;
    };
    auto report = nn::grad_check(params, eval, 1e-5);
    CAPTURE(report.worst_param);
    CHECK(report.max_rel_error <= 1e-5);
  }
}

TEST_CASE("grad_check sanity: quadratic and constant losses") {
  Parameter theta("theta", {1});
  theta.value[0] = 3.0;
  std::vector<Parameter*> params = {&theta};

  auto quad = [&](bool with_grad) {
    const double loss = theta.value[0] * theta.value[0];
    if (with_grad) theta.grad[0] = 2.0 * theta.value[0];
    return loss;
  };
  CHECK(nn::grad_check(params, quad, 1e-5).max_rel_error <= 1e-9);

  auto constant = [&](bool with_grad) {
    if (with_grad) theta.zero_grad();
    return 42.0;
  };
  CHECK(nn::grad_check(params, constant, 1e-5).max_rel_error == 0.0);

  CHECK_THROWS_AS(nn::grad_check(params, quad, 0.5), std::invalid_argument);
}

TEST_CASE("sgd step applies -lr * grad") {
  Parameter p("p", {2});
  p.value.values = {1.0, -1.0};
  p.grad.values = {0.5, 0.25};
  std::vector<Parameter*> params = {&p};
  nn::sgd_step(params, 0.1);
  CHECK(p.value[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(p.value[1] == doctest::Approx(-1.025).epsilon(1e-15));
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(15);
  Parameter a("layer.W", {3, 4}), b("layer.b", {4}), c("odd", {2, 2, 2});
  randomize(a, rng, 3.0);
  randomize(b, rng, 1e-8);
  randomize(c, rng, 1e12);
  b.value[0] = 0.1;  // not exactly representable; exercises the hex round trip
  c.value[0] = -0.0;

  const std::string path =
      (std::filesystem::temp_directory_path() / "cagnet_ckpt_test.txt").string();
  std::vector<Parameter*> params = {&a, &b, &c};
  save_checkpoint(path, params, {"note=test"});

  Parameter a2("layer.W", {3, 4}), b2("layer.b", {4}), c2("odd", {2, 2, 2});
  std::vector<Parameter*> params2 = {&a2, &b2, &c2};
  auto meta = load_checkpoint(path, params2);
  REQUIRE(meta.size() == 1);
  CHECK(meta[0] == "note=test");
  CHECK(std::memcmp(a.value.data(), a2.value.data(), a.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(b.value.data(), b2.value.data(), b.size() * sizeof(double)) == 0);
  CHECK(std::memcmp(c.value.data(), c2.value.data(), c.size() * sizeof(double)) == 0);

  Parameter wrong("layer.W", {4, 3});
  std::vector<Parameter*> bad = {&wrong, &b2, &c2};
  CHECK_THROWS(load_checkpoint(path, bad));
  std::filesystem::remove(path);
}
