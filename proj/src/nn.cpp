#include "cagnet/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cagnet/kernels.hpp"

namespace cagnet::nn {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Tensor linear(const Tensor& x, const Parameter& W, const Parameter& b) {
  if (W.value.shape.size() != 2 || x.shape.size() != 1 ||
      W.value.shape[1] != x.shape[0] || b.value.shape[0] != W.value.shape[0]) {
    throw std::invalid_argument("linear: shape mismatch, W=" +
                                shape_string(W.value.shape) + " x=" +
                                shape_string(x.shape));
  }
  const std::size_t rows = W.value.shape[0], cols = W.value.shape[1];
  Tensor y({rows});
  y.values = b.value.values;
  kernels::matvec(W.value.data(), x.data(), y.data(), rows, cols);
  return y;
}

Tensor linear_backward(const Tensor& x, Parameter& W, Parameter& b,
                       const Tensor& dy) {
  const std::size_t rows = W.value.shape[0], cols = W.value.shape[1];
  if (dy.shape.size() != 1 || dy.shape[0] != rows) {
    throw std::invalid_argument("linear_backward: bad dy shape");
  }
  kernels::ger(W.grad.data(), dy.data(), x.data(), rows, cols);
  kernels::axpy(1.0, dy.data(), b.grad.data(), rows);
  Tensor dx({cols});
  kernels::matvec_t(W.value.data(), dy.data(), dx.data(), rows, cols);
  return dx;
}

LSTMParams::LSTMParams(const std::string& prefix, std::size_t input,
                       std::size_t hidden)
    : Wx(prefix + ".Wx", {4 * hidden, input}),
      Wh(prefix + ".Wh", {4 * hidden, hidden}),
      b(prefix + ".b", {4 * hidden}) {}

LSTMState lstm_step(std::span<const double> x, const LSTMState& state,
                    const LSTMParams& params, LSTMCache* cache) {
  const std::size_t H = params.hidden();
  const std::size_t I = params.input();
  if (x.size() != I) throw std::invalid_argument("lstm_step: input size mismatch");
  if (state.h.size() != H || state.c.size() != H) {
    throw std::invalid_argument("lstm_step: state size mismatch");
  }
  for (double v : state.h) {
    if (!std::isfinite(v)) throw std::domain_error("lstm_step: non-finite state");
  }
  for (double v : state.c) {
    if (!std::isfinite(v)) throw std::domain_error("lstm_step: non-finite state");
  }

  std::vector<double> z = params.b.value.values;  // 4H pre-activations
  kernels::matvec(params.Wx.value.data(), x.data(), z.data(), 4 * H, I);
  kernels::matvec(params.Wh.value.data(), state.h.data(), z.data(), 4 * H, H);

  LSTMState out(H);
  std::vector<double> gi(H), gf(H), gg(H), go(H), tanh_c(H);
  for (std::size_t j = 0; j < H; ++j) {
    gi[j] = sigmoid(z[j]);
    gf[j] = sigmoid(z[H + j]);
    gg[j] = std::tanh(z[2 * H + j]);
    go[j] = sigmoid(z[3 * H + j]);
    out.c[j] = gf[j] * state.c[j] + gi[j] * gg[j];
    tanh_c[j] = std::tanh(out.c[j]);
    out.h[j] = go[j] * tanh_c[j];
  }

  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = std::move(gi);
    cache->f = std::move(gf);
    cache->g = std::move(gg);
    cache->o = std::move(go);
    cache->c_new = out.c;
    cache->tanh_c_new = std::move(tanh_c);
  }
  return out;
}

void lstm_backward(const LSTMCache& cache, LSTMParams& params,
                   std::span<const double> dh_new, std::span<const double> dc_new,
                   std::span<double> dx, std::span<double> dh_prev,
                   std::span<double> dc_prev) {
  const std::size_t H = params.hidden();
  const std::size_t I = params.input();

  std::vector<double> dz(4 * H);
  for (std::size_t j = 0; j < H; ++j) {
    const double i = cache.i[j], f = cache.f[j], g = cache.g[j], o = cache.o[j];
    const double tc = cache.tanh_c_new[j];
    const double dho = dh_new[j];
    double dc = dc_new[j] + dho * o * (1.0 - tc * tc);
    const double do_ = dho * tc;
    const double di = dc * g;
    const double df = dc * cache.c_prev[j];
    const double dg = dc * i;
    dc_prev[j] += dc * f;
    dz[j] = di * i * (1.0 - i);
    dz[H + j] = df * f * (1.0 - f);
    dz[2 * H + j] = dg * (1.0 - g * g);
    dz[3 * H + j] = do_ * o * (1.0 - o);
  }

  kernels::ger(params.Wx.grad.data(), dz.data(), cache.x.data(), 4 * H, I);
  kernels::ger(params.Wh.grad.data(), dz.data(), cache.h_prev.data(), 4 * H, H);
  kernels::axpy(1.0, dz.data(), params.b.grad.data(), 4 * H);
  kernels::matvec_t(params.Wx.value.data(), dz.data(), dx.data(), 4 * H, I);
  kernels::matvec_t(params.Wh.value.data(), dz.data(), dh_prev.data(), 4 * H, H);
}

std::vector<double> softmax(std::span<const double> logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double softmax_cross_entropy(const Tensor& logits, std::size_t target,
                             Tensor* dlogits) {
  if (logits.shape.size() != 1 || logits.size() < 2) {
    throw std::invalid_argument("softmax_cross_entropy: need >= 2 logits");
  }
  if (target >= logits.size()) {
    throw std::out_of_range("softmax_cross_entropy: target out of range");
  }
  double m = logits[0];
  for (double v : logits.values) m = std::max(m, v);
  double sum = 0.0;
  for (double v : logits.values) sum += std::exp(v - m);
  const double loss = std::log(sum) - (logits[target] - m);
  if (dlogits) {
    *dlogits = Tensor({logits.size()});
    for (std::size_t i = 0; i < logits.size(); ++i) {
      (*dlogits)[i] = std::exp(logits[i] - m) / sum;
    }
    (*dlogits)[target] -= 1.0;
  }
  return loss;
}

double binary_cross_entropy(const Tensor& logits, const std::vector<double>& targets,
                            Tensor* dlogits) {
  if (logits.size() != targets.size()) {
    throw std::invalid_argument("binary_cross_entropy: length mismatch");
  }
  const std::size_t n = logits.size();
  if (n == 0) throw std::invalid_argument("binary_cross_entropy: empty input");
  double loss = 0.0;
  if (dlogits) *dlogits = Tensor({n});
  for (std::size_t i = 0; i < n; ++i) {
    const double z = logits[i], t = targets[i];
    // max(z,0) - z*t + log(1 + exp(-|z|))
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::fabs(z)));
    if (dlogits) (*dlogits)[i] = (sigmoid(z) - t) / static_cast<double>(n);
  }
  return loss / static_cast<double>(n);
}

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "sum") return FusionMode::Sum;
  if (s == "product") return FusionMode::Product;
  if (s == "concat") return FusionMode::Concat;
  if (s == "adaptive1") return FusionMode::Adaptive1;
  if (s == "adaptive2") return FusionMode::Adaptive2;
  throw std::invalid_argument("unknown fusion mode: " + s);
}

std::string fusion_mode_name(FusionMode m) {
  switch (m) {
    case FusionMode::Sum: return "sum";
    case FusionMode::Product: return "product";
    case FusionMode::Concat: return "concat";
    case FusionMode::Adaptive1: return "adaptive1";
    case FusionMode::Adaptive2: return "adaptive2";
  }
  return "?";
}

FusionParams::FusionParams(const std::string& prefix, std::size_t n,
                           std::size_t d, FusionMode mode, bool use_softmax)
    : n_inputs(n), dim(d), softmax_gates(use_softmax) {
  if (n < 1) throw std::invalid_argument("fusion: need >= 1 input");
  if (mode == FusionMode::Adaptive1) {
    gate_all = Parameter(prefix + ".gate", {n});
    if (!softmax_gates) gate_all.value.fill(1.0 / static_cast<double>(n));
  } else if (mode == FusionMode::Adaptive2) {
    if (n >= 2) {
      gate_ctx = Parameter(prefix + ".gate_ctx", {n - 1});
      gate_local = Parameter(prefix + ".gate_local", {2});
      if (!softmax_gates) {
        gate_ctx.value.fill(1.0 / static_cast<double>(n - 1));
        gate_local.value.fill(0.5);
      }
    }
  } else if (mode == FusionMode::Concat) {
    Wc = Parameter(prefix + ".Wc", {d, n * d});
    bc = Parameter(prefix + ".bc", {d});
  }
}

void FusionParams::collect(std::vector<Parameter*>& out, FusionMode mode) {
  if (mode == FusionMode::Adaptive1 && n_inputs >= 1) out.push_back(&gate_all);
  if (mode == FusionMode::Adaptive2 && n_inputs >= 2) {
    out.push_back(&gate_ctx);
    out.push_back(&gate_local);
  }
  if (mode == FusionMode::Concat) {
    out.push_back(&Wc);
    out.push_back(&bc);
  }
}

namespace {

std::vector<double> gate_weights(const Parameter& gate, bool use_softmax) {
  if (use_softmax) return softmax(gate.value.values);
  return gate.value.values;
}

// d(logits) given d(weights), for softmax-parameterized gates.
void gate_backward(Parameter& gate, const std::vector<double>& w,
                   const std::vector<double>& dw, bool use_softmax) {
  if (!use_softmax) {
    for (std::size_t i = 0; i < w.size(); ++i) gate.grad[i] += dw[i];
    return;
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) dot += w[i] * dw[i];
  for (std::size_t i = 0; i < w.size(); ++i) gate.grad[i] += w[i] * (dw[i] - dot);
}

}  // namespace

Tensor adaptive_fuse(std::span<const Tensor> inputs, const FusionParams& gates,
                     FusionMode mode, FusionCache* cache) {
  if (inputs.empty()) throw std::invalid_argument("fuse: no inputs");
  const std::size_t d = inputs[0].size();
  for (const Tensor& t : inputs) {
    if (t.shape.size() != 1 || t.size() != d) {
      throw std::invalid_argument("fuse: dimension mismatch");
    }
  }
  const std::size_t n = inputs.size();
  if (cache) {
    cache->inputs.clear();
    for (const Tensor& t : inputs) cache->inputs.push_back(t.values);
  }

  Tensor out({d});
  switch (mode) {
    case FusionMode::Sum: {
      out = inputs[0];
      for (std::size_t i = 1; i < n; ++i) {
        kernels::vadd(out.data(), inputs[i].data(), out.data(), d);
      }
      return out;
    }
    case FusionMode::Product: {
      out = inputs[0];
      for (std::size_t i = 1; i < n; ++i) {
        kernels::vmul(out.data(), inputs[i].data(), out.data(), d);
      }
      return out;
    }
    case FusionMode::Concat: {
      Tensor cat({n * d});
      for (std::size_t i = 0; i < n; ++i) {
        std::copy(inputs[i].values.begin(), inputs[i].values.end(),
                  cat.values.begin() + static_cast<std::ptrdiff_t>(i * d));
      }
      if (cache) cache->ctx_mix = cat.values;  // reuse slot for the concat vector
      return linear(cat, gates.Wc, gates.bc);
    }
    case FusionMode::Adaptive1: {
      const std::vector<double> w = gate_weights(gates.gate_all, gates.softmax_gates);
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(w[i], inputs[i].data(), out.data(), d);
      }
      if (cache) cache->weights_all = w;
      return out;
    }
    case FusionMode::Adaptive2: {
      if (n == 1) return inputs[0];
      const std::vector<double> u = gate_weights(gates.gate_ctx, gates.softmax_gates);
      std::vector<double> ctx(d, 0.0);
      for (std::size_t i = 1; i < n; ++i) {
        kernels::axpy(u[i - 1], inputs[i].data(), ctx.data(), d);
      }
      const std::vector<double> v = gate_weights(gates.gate_local, gates.softmax_gates);
      kernels::axpy(v[0], inputs[0].data(), out.data(), d);
      kernels::axpy(v[1], ctx.data(), out.data(), d);
      if (cache) {
        cache->weights_ctx = u;
        cache->weights_local = v;
        cache->ctx_mix = std::move(ctx);
      }
      return out;
    }
  }
  throw std::logic_error("fuse: unreachable");
}

Tensor adaptive_fuse(const Tensor& local, const Tensor& neighboring,
                     const Tensor& global, const FusionParams& gates,
                     FusionMode mode, FusionCache* cache) {
  const Tensor inputs[3] = {local, neighboring, global};
  return adaptive_fuse(std::span<const Tensor>(inputs, 3), gates, mode, cache);
}

void adaptive_fuse_backward(const FusionCache& cache, FusionParams& gates,
                            FusionMode mode, const Tensor& dout,
                            std::vector<Tensor>& dinputs) {
  const std::size_t n = cache.inputs.size();
  const std::size_t d = dout.size();
  switch (mode) {
    case FusionMode::Sum: {
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(1.0, dout.data(), dinputs[i].data(), d);
      }
      return;
    }
    case FusionMode::Product: {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          double prod = 1.0;
          for (std::size_t k = 0; k < n; ++k) {
            if (k != i) prod *= cache.inputs[k][j];
          }
          dinputs[i][j] += dout[j] * prod;
        }
      }
      return;
    }
    case FusionMode::Concat: {
      Tensor cat({n * d});
      cat.values = cache.ctx_mix;
      Tensor dcat = linear_backward(cat, gates.Wc, gates.bc, dout);
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(1.0, dcat.data() + i * d, dinputs[i].data(), d);
      }
      return;
    }
    case FusionMode::Adaptive1: {
      const std::vector<double>& w = cache.weights_all;
      std::vector<double> dw(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        kernels::axpy(w[i], dout.data(), dinputs[i].data(), d);
        dw[i] = kernels::dot(dout.data(), cache.inputs[i].data(), d);
      }
      gate_backward(gates.gate_all, w, dw, gates.softmax_gates);
      return;
    }
    case FusionMode::Adaptive2: {
      if (n == 1) {
        kernels::axpy(1.0, dout.data(), dinputs[0].data(), d);
        return;
      }
      const std::vector<double>& u = cache.weights_ctx;
      const std::vector<double>& v = cache.weights_local;
      // local leg
      kernels::axpy(v[0], dout.data(), dinputs[0].data(), d);
      std::vector<double> dv(2, 0.0);
      dv[0] = kernels::dot(dout.data(), cache.inputs[0].data(), d);
      dv[1] = kernels::dot(dout.data(), cache.ctx_mix.data(), d);
      // context leg
      std::vector<double> dctx(d, 0.0);
      kernels::axpy(v[1], dout.data(), dctx.data(), d);
      std::vector<double> du(n - 1, 0.0);
      for (std::size_t i = 1; i < n; ++i) {
        kernels::axpy(u[i - 1], dctx.data(), dinputs[i].data(), d);
        du[i - 1] = kernels::dot(dctx.data(), cache.inputs[i].data(), d);
      }
      gate_backward(gates.gate_local, v, dv, gates.softmax_gates);
      gate_backward(gates.gate_ctx, u, du, gates.softmax_gates);
      return;
    }
  }
}

void sgd_step(std::span<Parameter* const> params, double lr) {
  for (Parameter* p : params) {
    kernels::axpy(-lr, p->grad.data(), p->value.data(), p->value.size());
  }
}

GradCheckReport grad_check(std::span<Parameter* const> params,
                           const std::function<double(bool)>& eval, double eps) {
  if (!(eps > 0.0 && eps <= 1e-2)) {
    throw std::invalid_argument("grad_check: eps out of range");
  }
  for (Parameter* p : params) p->zero_grad();
  const double base = eval(true);
  if (!std::isfinite(base)) throw std::domain_error("grad_check: non-finite loss");

  GradCheckReport report;
  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + eps;
      const double fp = eval(false);
      p->value[i] = saved - eps;
      const double fm = eval(false);
      p->value[i] = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw std::domain_error("grad_check: non-finite loss at " + p->name);
      }
      const double numeric = (fp - fm) / (2.0 * eps);
      const double analytic = p->grad[i];
      const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      const double rel = std::fabs(analytic - numeric) / denom;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace cagnet::nn
