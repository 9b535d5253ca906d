#include "cagnet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace cagnet {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

Tensor::Tensor(std::vector<std::size_t> s)
    : shape(std::move(s)), values(shape_product(shape), 0.0) {}

void Tensor::fill(double v) {
  for (double& x : values) x = v;
}

bool Tensor::all_finite() const {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Parameter::Parameter(std::string n, std::vector<std::size_t> shape)
    : name(std::move(n)), value(shape), grad(std::move(shape)) {}

void Parameter::init_uniform(Rng& rng, double scale) {
  for (double& x : value.values) x = rng.uniform(-scale, scale);
}

}  // namespace cagnet
