#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cagnet/rng.hpp"

namespace cagnet {

// Dense row-major tensor of doubles. Rank is small (<= 2 in practice).
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const { return values.size(); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  // 2-D access, shape = {rows, cols}.
  double& at(std::size_t r, std::size_t c) { return values[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * shape[1] + c]; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

std::size_t shape_product(const std::vector<std::size_t>& shape);
std::string shape_string(const std::vector<std::size_t>& shape);

// Learnable value plus its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<std::size_t> shape);

  void zero_grad() { grad.fill(0.0); }
  std::size_t size() const { return value.size(); }

  // Uniform(-scale, scale) init, consuming the rng in row-major order.
  void init_uniform(Rng& rng, double scale);
};

}  // namespace cagnet
