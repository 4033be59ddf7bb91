#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace feesim {

using BlockId = std::int64_t;
using FeeId = std::int64_t;
using MinerId = std::int32_t;

inline constexpr BlockId kNoBlock = -1;
inline constexpr MinerId kNoMiner = -1;
inline constexpr double kUnpublished = std::numeric_limits<double>::infinity();

struct FeeEvent {
    FeeId id;
    double arrival_time;
    double value;
};

// Announced transaction fees, ordered by arrival time. Supports O(log n)
// "total value arrived by t" queries via prefix sums.
class FeePool {
public:
    FeeId add(double arrival_time, double value);

    std::size_t size() const { return events_.size(); }
    const FeeEvent& event(FeeId id) const { return events_.at(static_cast<std::size_t>(id)); }
    double value(FeeId id) const { return event(id).value; }
    double arrival(FeeId id) const { return event(id).arrival_time; }

    // Number of fees with arrival_time <= now. Fees are id-ordered by arrival,
    // so [0, arrived_count(now)) is exactly the arrived prefix.
    FeeId arrived_count(double now) const;
    double total_arrived(double now) const;
    // Sum of values of fee ids in [begin, end).
    double value_in_range(FeeId begin, FeeId end) const;

    const std::vector<FeeEvent>& events() const { return events_; }

private:
    std::vector<FeeEvent> events_;
    std::vector<double> prefix_;  // prefix_[i] = sum of values of ids < i
};

// A claimed-fraction ledger for one block: a contiguous id range claimed in
// full plus explicit per-fee fractions. Undercutting strategies claim value
// fractions, so fees are divisible across blocks of one chain.
struct ClaimSet {
    FeeId range_begin = 0;
    FeeId range_end = 0;  // fees [range_begin, range_end) at fraction 1
    std::vector<std::pair<FeeId, double>> partial;

    bool empty() const { return range_begin == range_end && partial.empty(); }
};

struct Block {
    BlockId id = kNoBlock;
    BlockId parent = kNoBlock;
    MinerId miner = kNoMiner;
    int height = 0;
    ClaimSet claimed;
    double claimed_value = 0.0;      // total fee value claimed by this block
    double cum_claimed_value = 0.0;  // claimed value along genesis..this
    double found_time = 0.0;
    double published_time = kUnpublished;

    bool published() const { return published_time != kUnpublished; }
};

// Append-only rooted tree of blocks. Block ids are dense indices; id 0 is
// genesis.
class BlockTree {
public:
    BlockTree();

    const Block& block(BlockId id) const { return blocks_.at(static_cast<std::size_t>(id)); }
    BlockId genesis() const { return 0; }
    std::size_t size() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }

    bool contains(BlockId id) const { return id >= 0 && static_cast<std::size_t>(id) < blocks_.size(); }

    // Validating insert. Rejects unknown parents, claims of fees that have not
    // arrived by found_time, and cumulative path fractions exceeding 1.
    BlockId add_block(BlockId parent, MinerId miner,
                      const std::vector<std::pair<FeeId, double>>& claims,
                      double found_time, const FeePool& pool);

    // Fast-path insert used by the simulator: claims [range_begin, range_end)
    // in full plus explicit fractions, with the claimed value precomputed.
    // Caller guarantees the claims are consistent with the path.
    BlockId add_block_raw(BlockId parent, MinerId miner, ClaimSet claims,
                          double claimed_value, double found_time);

    void publish(BlockId id, double time);

    // Fraction of fee `fee` already claimed on the path genesis..block.
    double path_claimed_fraction(BlockId block, FeeId fee) const;

    // Fees with remaining fraction > 0 among those arrived by `now`, as seen
    // from `block`'s chain. O(path length * claims); simulation keeps its own
    // incremental ledgers and cross-checks against this.
    std::vector<std::pair<FeeId, double>> available_fees(BlockId block, double now,
                                                         const FeePool& pool) const;

    bool is_ancestor_or_self(BlockId ancestor, BlockId descendant) const;

private:
    std::vector<Block> blocks_;
};

// R(B): announced fees not claimed in B or any of its predecessors.
double remaining_fees(const BlockTree& tree, const FeePool& pool, BlockId block, double now);

// A miner's knowledge of the tree: blocks published by `now` plus its own.
// `race_preference`, when set by the simulator, marks the attacker-side block
// this miner mines on during a two-tip race (the gamma model). `scan_hint`,
// when set, is a superset of every block near the chain frontier (all blocks
// at relevant heights plus all unpublished ones); view queries then iterate it
// instead of the whole tree. Results are identical either way.
struct MinerView {
    const BlockTree* tree = nullptr;
    MinerId miner = kNoMiner;
    double now = 0.0;
    BlockId race_preference = kNoBlock;
    const std::vector<BlockId>* scan_hint = nullptr;

    bool knows(BlockId id) const;
    // Time this miner first heard of the block: found_time for its own blocks,
    // published_time otherwise.
    double heard_time(BlockId id) const;

    template <typename Fn>
    void for_each_candidate(Fn&& fn) const {
        if (scan_hint) {
            for (BlockId id : *scan_hint) fn(id);
        } else {
            for (BlockId id = 0; id < static_cast<BlockId>(tree->size()); ++id) fn(id);
        }
    }
};

// All known blocks at the maximum known height, first-heard first (ties by
// lowest id). A set race_preference is ranked ahead of other tied tips.
std::vector<BlockId> best_tips(const MinerView& view);

// Highest known block, preferring the miner's own block at equal height,
// otherwise first-heard. This is b^H as used by the withholding strategies.
BlockId preferred_tip(const MinerView& view);

// Line-oriented JSON serialization (one record per line).
std::string tree_to_jsonl(const BlockTree& tree);
BlockTree tree_from_jsonl(const std::string& text);
std::string pool_to_jsonl(const FeePool& pool);
FeePool pool_from_jsonl(const std::string& text);

}  // namespace feesim
