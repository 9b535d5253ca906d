#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cagnet/tensor.hpp"

// Forward/backward pairs for the dense numeric core. Backward functions
// accumulate into Parameter::grad (callers zero grads between steps) and
// return/emit input gradients so composite models can chain them in reverse.
namespace cagnet::nn {

double sigmoid(double z);

// ---- linear: y = W x + b, W is {out, in}, x and y are rank-1 ----

Tensor linear(const Tensor& x, const Parameter& W, const Parameter& b);

// dy is the gradient at the output; returns dx. Accumulates dW, db.
Tensor linear_backward(const Tensor& x, Parameter& W, Parameter& b,
                       const Tensor& dy);

// ---- LSTM cell ----

struct LSTMState {
  std::vector<double> h;
  std::vector<double> c;

  LSTMState() = default;
  explicit LSTMState(std::size_t hidden) : h(hidden, 0.0), c(hidden, 0.0) {}
};

// Wx {4H, I}, Wh {4H, H}, b {4H}; gate order along the 4H axis is i, f, g, o.
struct LSTMParams {
  Parameter Wx, Wh, b;

  LSTMParams() = default;
  LSTMParams(const std::string& prefix, std::size_t input, std::size_t hidden);
  std::size_t hidden() const { return Wh.value.shape[1]; }
  std::size_t input() const { return Wx.value.shape[1]; }
};

struct LSTMCache {
  std::vector<double> x, h_prev, c_prev;
  std::vector<double> i, f, g, o;  // post-activation gates
  std::vector<double> c_new, tanh_c_new;
};

// Gates i,f,o = sigmoid, g = tanh; c' = f*c + i*g; h' = o * tanh(c').
// Throws std::domain_error on non-finite state, std::invalid_argument on
// shape mismatch.
LSTMState lstm_step(std::span<const double> x, const LSTMState& state,
                    const LSTMParams& params, LSTMCache* cache = nullptr);

// dh_new/dc_new: gradient at the step output. Accumulates parameter grads and
// adds input gradients into dx, dh_prev, dc_prev.
void lstm_backward(const LSTMCache& cache, LSTMParams& params,
                   std::span<const double> dh_new, std::span<const double> dc_new,
                   std::span<double> dx, std::span<double> dh_prev,
                   std::span<double> dc_prev);

// ---- losses ----

// Numerically stable softmax over a rank-1 tensor (max subtraction).
std::vector<double> softmax(std::span<const double> logits);

// loss = -log softmax(logits)[target]; if dlogits is non-null it receives
// softmax - one_hot (overwrite, not accumulate).
double softmax_cross_entropy(const Tensor& logits, std::size_t target,
                             Tensor* dlogits = nullptr);

// Mean over entries of the stable logit-form BCE; targets in {0,1}.
// dlogits (if given) receives (sigmoid(z) - t) / n.
double binary_cross_entropy(const Tensor& logits, const std::vector<double>& targets,
                            Tensor* dlogits = nullptr);

// ---- fusion ----

enum class FusionMode { Sum, Product, Concat, Adaptive1, Adaptive2 };

FusionMode fusion_mode_from_string(const std::string& s);
std::string fusion_mode_name(FusionMode m);

// Parameters for one fusion site over `n` inputs (n = 2 or 3). Inputs are
// ordered local, neighboring, global; with n == 2 the global slot is absent.
// gate_all:   adaptive1, one logit per input.
// gate_ctx:   adaptive2 level 1, one logit per contextual input (all but local).
// gate_local: adaptive2 level 2, two logits {local, fused context}.
// Wc/bc:      concat projection (n*dim -> dim).
struct FusionParams {
  std::size_t n_inputs = 0;
  std::size_t dim = 0;
  bool softmax_gates = true;  // false = raw unconstrained weights
  Parameter gate_all, gate_ctx, gate_local;
  Parameter Wc, bc;

  FusionParams() = default;
  FusionParams(const std::string& prefix, std::size_t n, std::size_t dim,
               FusionMode mode, bool softmax_gates);
  void collect(std::vector<Parameter*>& out, FusionMode mode);
};

struct FusionCache {
  std::vector<std::vector<double>> inputs;
  std::vector<double> weights_all;    // adaptive1
  std::vector<double> weights_ctx;    // adaptive2 level 1
  std::vector<double> weights_local;  // adaptive2 level 2
  std::vector<double> ctx_mix;        // adaptive2 intermediate
};

Tensor adaptive_fuse(std::span<const Tensor> inputs, const FusionParams& gates,
                     FusionMode mode, FusionCache* cache = nullptr);

// Spec-shaped convenience over exactly (local, neighboring, global).
Tensor adaptive_fuse(const Tensor& local, const Tensor& neighboring,
                     const Tensor& global, const FusionParams& gates,
                     FusionMode mode, FusionCache* cache = nullptr);

// dout: gradient at the fused output; dinputs must hold one tensor per input,
// shaped like the inputs; gradients are accumulated into them.
void adaptive_fuse_backward(const FusionCache& cache, FusionParams& gates,
                            FusionMode mode, const Tensor& dout,
                            std::vector<Tensor>& dinputs);

// ---- optimization & gradient checking ----

void sgd_step(std::span<Parameter* const> params, double lr);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
};

// Central differences over every coordinate of every parameter.
// eval(true) must (re)compute gradients into Parameter::grad and return the
// loss; eval(false) must return the loss without touching grads.
// Relative error per coordinate: |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(std::span<Parameter* const> params,
                           const std::function<double(bool)>& eval, double eps);

}  // namespace cagnet::nn
