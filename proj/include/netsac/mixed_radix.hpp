#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsac {

// Flat enumeration of a product of finite ranges. Little-endian: the first
// coordinate varies fastest, so index = t[0] + r[0]*(t[1] + r[1]*(t[2] + ...)).
class MixedRadix {
 public:
  MixedRadix() = default;

  explicit MixedRadix(std::vector<std::size_t> radices) : radices_(std::move(radices)) {
    strides_.resize(radices_.size());
    std::size_t stride = 1;
    for (std::size_t k = 0; k < radices_.size(); ++k) {
      if (radices_[k] == 0) {
        throw std::invalid_argument("MixedRadix: radix " + std::to_string(k) + " is zero");
      }
      strides_[k] = stride;
      stride *= radices_[k];
    }
    size_ = stride;
  }

  std::size_t size() const { return size_; }
  std::size_t rank() const { return radices_.size(); }
  std::span<const std::size_t> radices() const { return radices_; }
  std::span<const std::size_t> strides() const { return strides_; }

  std::size_t encode(std::span<const std::size_t> tuple) const {
    if (tuple.size() != radices_.size()) {
      throw std::invalid_argument("MixedRadix::encode: tuple has " + std::to_string(tuple.size()) +
                                  " coordinates, expected " + std::to_string(radices_.size()));
    }
    std::size_t index = 0;
    for (std::size_t k = 0; k < radices_.size(); ++k) {
      if (tuple[k] >= radices_[k]) {
        throw std::out_of_range("MixedRadix::encode: coordinate " + std::to_string(k) + " = " +
                                std::to_string(tuple[k]) + " outside [0, " +
                                std::to_string(radices_[k]) + ")");
      }
      index += tuple[k] * strides_[k];
    }
    return index;
  }

  void decode(std::size_t index, std::span<std::size_t> out) const {
    if (index >= size_) {
      throw std::out_of_range("MixedRadix::decode: index " + std::to_string(index) +
                              " outside [0, " + std::to_string(size_) + ")");
    }
    for (std::size_t k = 0; k < radices_.size(); ++k) {
      out[k] = index % radices_[k];
      index /= radices_[k];
    }
  }

  std::vector<std::size_t> decode(std::size_t index) const {
    std::vector<std::size_t> out(radices_.size());
    decode(index, out);
    return out;
  }

  // Single coordinate of a flat index, without decoding the rest.
  std::size_t digit(std::size_t index, std::size_t k) const {
    return (index / strides_[k]) % radices_[k];
  }

 private:
  std::vector<std::size_t> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

}  // namespace netsac
