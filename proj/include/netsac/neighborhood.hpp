#pragma once

#include <cstddef>
#include <utility>
#include <span>
#include <vector>

#include "netsac/factored_mdp.hpp"
#include "netsac/mixed_radix.hpp"

namespace netsac {

// Restriction of a joint state-action pair z to a sorted agent subset N,
// z -> z_N, with z_N enumerated little-endian over the members' local pairs.
class LocalProjection {
 public:
  LocalProjection() = default;
  LocalProjection(std::span<const AgentSpace> spaces, std::vector<AgentId> members)
      : members_(std::move(members)) {
    std::vector<std::size_t> radices;
    for (AgentId j : members_) radices.push_back(spaces[j].pair_count());
    layout_ = MixedRadix(std::move(radices));
    std::size_t stride = 1;
    for (AgentId j = 0; j < spaces.size(); ++j) {
      joint_strides_.push_back(stride);
      joint_radices_.push_back(spaces[j].pair_count());
      stride *= spaces[j].pair_count();
    }
  }

  std::span<const AgentId> members() const { return members_; }
  const MixedRadix& local_layout() const { return layout_; }
  std::size_t size() const { return layout_.size(); }

  // From a flat joint pair index z.
  std::size_t project(std::size_t z) const {
    const auto strides = layout_.strides();
    std::size_t local = 0;
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const AgentId j = members_[k];
      local += ((z / joint_strides_[j]) % joint_radices_[j]) * strides[k];
    }
    return local;
  }

  // From per-agent local pair indices z_j.
  std::size_t project_pairs(std::span<const Index> pairs) const {
    const auto strides = layout_.strides();
    std::size_t local = 0;
    for (std::size_t k = 0; k < members_.size(); ++k) local += pairs[members_[k]] * strides[k];
    return local;
  }

 private:
  std::vector<AgentId> members_;
  MixedRadix layout_;
  std::vector<std::size_t> joint_strides_;
  std::vector<std::size_t> joint_radices_;
};

}  // namespace netsac
