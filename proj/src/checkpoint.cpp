#include "cagnet/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cagnet {

namespace {
constexpr const char* kMagic = "cagnet.checkpoint.v1";

std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}
}  // namespace

void save_checkpoint(const std::string& path, std::span<Parameter* const> params,
                     const std::vector<std::string>& metadata) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << kMagic << "\n";
  for (const std::string& m : metadata) out << "# " << m << "\n";
  for (const Parameter* p : params) {
    out << "param " << p->name << " " << p->value.shape.size();
    for (std::size_t d : p->value.shape) out << " " << d;
    out << " " << p->value.size() << "\n";
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      out << hex_double(p->value[i]) << ((i + 1) % 8 == 0 ? "\n" : " ");
    }
    if (p->value.size() % 8 != 0) out << "\n";
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

std::vector<std::string> load_checkpoint(const std::string& path,
                                         std::span<Parameter* const> params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != kMagic) {
    throw std::runtime_error("bad checkpoint header in " + path + ": " + magic);
  }

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;

  std::vector<std::string> metadata;
  std::size_t loaded = 0;
  std::string tok;
  while (in >> tok) {
    if (tok == "#") {
      std::string rest;
      std::getline(in, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
      metadata.push_back(rest);
      continue;
    }
    if (tok != "param") throw std::runtime_error("checkpoint: expected 'param', got " + tok);
    std::string name;
    std::size_t rank = 0;
    in >> name >> rank;
    std::vector<std::size_t> shape(rank);
    for (std::size_t& d : shape) in >> d;
    std::size_t count = 0;
    in >> count;
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint: unknown parameter " + name);
    }
    Parameter* p = it->second;
    if (p->value.shape != shape) {
      throw std::runtime_error("checkpoint: shape mismatch for " + name +
                               ": file " + shape_string(shape) + " vs model " +
                               shape_string(p->value.shape));
    }
    for (std::size_t i = 0; i < count; ++i) {
      std::string v;
      if (!(in >> v)) throw std::runtime_error("checkpoint: truncated values for " + name);
      p->value[i] = std::strtod(v.c_str(), nullptr);
    }
    ++loaded;
  }
  if (loaded != by_name.size()) {
    throw std::runtime_error("checkpoint: file has " + std::to_string(loaded) +
                             " parameters, model expects " +
                             std::to_string(by_name.size()));
  }
  return metadata;
}

}  // namespace cagnet
