#pragma once

#include <algorithm>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "rccs/errors.hpp"
#include "rccs/semantics.hpp"

namespace rccs {

using BlockId = std::size_t;

/// Equivalence relation on states as disjoint blocks. Canonical numbering:
/// blocks ordered by their least member, members sorted ascending.
struct Partition {
  std::vector<BlockId> block_of;
  std::vector<std::vector<StateId>> blocks;

  std::size_t num_states() const { return block_of.size(); }
  std::size_t num_blocks() const { return blocks.size(); }
  bool same_block(StateId a, StateId b) const { return block_of[a] == block_of[b]; }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.block_of == b.block_of;
  }

  /// Canonical partition from an arbitrary labeling (labels need not be
  /// contiguous or ordered).
  static Partition from_block_of(const std::vector<BlockId>& raw) {
    Partition p;
    p.block_of.assign(raw.size(), 0);
    std::unordered_map<BlockId, BlockId> seen;  // raw label -> new id
    for (StateId s = 0; s < raw.size(); ++s) {
      auto [it, inserted] = seen.emplace(raw[s], p.blocks.size());
      if (inserted) p.blocks.emplace_back();
      p.block_of[s] = it->second;
      p.blocks[it->second].push_back(s);
    }
    return p;
  }

  static Partition from_blocks(const std::vector<std::vector<StateId>>& blocks,
                               std::size_t num_states) {
    std::vector<BlockId> raw(num_states, static_cast<BlockId>(-1));
    for (BlockId b = 0; b < blocks.size(); ++b) {
      for (StateId s : blocks[b]) {
        if (s >= num_states || raw[s] != static_cast<BlockId>(-1))
          throw Error("invalid partition: blocks must be disjoint and in range");
        raw[s] = b;
      }
    }
    for (StateId s = 0; s < num_states; ++s)
      if (raw[s] == static_cast<BlockId>(-1))
        throw Error("invalid partition: blocks must cover all states");
    return from_block_of(raw);
  }

  static Partition universal(std::size_t num_states) {
    return from_block_of(std::vector<BlockId>(num_states, 0));
  }

  static Partition discrete(std::size_t num_states) {
    std::vector<BlockId> raw(num_states);
    for (StateId s = 0; s < num_states; ++s) raw[s] = s;
    return from_block_of(raw);
  }

  /// True when every block of this partition is contained in one block of
  /// `coarser`.
  bool refines(const Partition& coarser) const {
    for (const auto& block : blocks) {
      for (StateId s : block)
        if (coarser.block_of[s] != coarser.block_of[block.front()]) return false;
    }
    return true;
  }
};

inline Json partition_to_json(const Partition& p) {
  Json j;
  j["format"] = "rccs-lab/1";
  j["blocks"] = Json::array();
  for (const auto& block : p.blocks) j["blocks"].push_back(block);
  return j;
}

}  // namespace rccs
