#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace abcd {

/// One named learnable array and its gradient slot.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grads;

  std::size_t size() const noexcept { return values.size(); }
};

/// Ordered collection of uniquely named parameter blocks.
class ParamStore {
 public:
  /// Appends a zero-filled block; throws ArgumentError on a duplicate name.
  ParamBlock& add(std::string name, std::vector<std::size_t> shape);

  bool contains(std::string_view name) const noexcept;
  ParamBlock& at(std::string_view name);
  const ParamBlock& at(std::string_view name) const;

  std::vector<ParamBlock>& blocks() noexcept { return blocks_; }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

  std::size_t parameter_count() const noexcept;
  void zero_grads() noexcept;

  bool operator==(const ParamStore&) const = default;

 private:
  std::vector<ParamBlock> blocks_;
};

bool operator==(const ParamBlock& a, const ParamBlock& b);

}  // namespace abcd
