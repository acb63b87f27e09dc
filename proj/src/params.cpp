#include "abcd/params.hpp"

#include <algorithm>
#include <functional>

#include "abcd/errors.hpp"

namespace abcd {

ParamBlock& ParamStore::add(std::string name, std::vector<std::size_t> shape) {
  if (contains(name)) {
    throw ArgumentError("duplicate parameter block '" + name + "'");
  }
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  ParamBlock block;
  block.name = std::move(name);
  block.shape = std::move(shape);
  block.values.assign(n, 0.0);
  block.grads.assign(n, 0.0);
  blocks_.push_back(std::move(block));
  return blocks_.back();
}

bool ParamStore::contains(std::string_view name) const noexcept {
  return std::any_of(blocks_.begin(), blocks_.end(),
                     [&](const ParamBlock& b) { return b.name == name; });
}

ParamBlock& ParamStore::at(std::string_view name) {
  for (auto& b : blocks_) {
    if (b.name == name) return b;
  }
  throw ArgumentError("no parameter block named '" + std::string(name) + "'");
}

const ParamBlock& ParamStore::at(std::string_view name) const {
  return const_cast<ParamStore&>(*this).at(name);
}

std::size_t ParamStore::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n;
}

void ParamStore::zero_grads() noexcept {
  for (auto& b : blocks_) std::fill(b.grads.begin(), b.grads.end(), 0.0);
}

bool operator==(const ParamBlock& a, const ParamBlock& b) {
  return a.name == b.name && a.shape == b.shape && a.values == b.values && a.grads == b.grads;
}

}  // namespace abcd
