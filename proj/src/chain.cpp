#include "chain.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace feesim {

namespace {
constexpr double kFracEps = 1e-12;
}

FeeId FeePool::add(double arrival_time, double value) {
    if (value < 0.0) throw ValidationError("fee value must be nonnegative");
    if (arrival_time < 0.0) throw ValidationError("fee arrival time must be nonnegative");
    if (!events_.empty() && arrival_time < events_.back().arrival_time)
        throw ValidationError("fee arrivals must be added in nondecreasing time order");
    FeeId id = static_cast<FeeId>(events_.size());
    events_.push_back(FeeEvent{id, arrival_time, value});
    if (prefix_.empty()) prefix_.push_back(0.0);
    prefix_.push_back(prefix_.back() + value);
    return id;
}

FeeId FeePool::arrived_count(double now) const {
    auto it = std::upper_bound(events_.begin(), events_.end(), now,
                               [](double t, const FeeEvent& e) { return t < e.arrival_time; });
    return static_cast<FeeId>(it - events_.begin());
}

double FeePool::total_arrived(double now) const {
    return value_in_range(0, arrived_count(now));
}

double FeePool::value_in_range(FeeId begin, FeeId end) const {
    if (begin >= end) return 0.0;
    return prefix_[static_cast<std::size_t>(end)] - prefix_[static_cast<std::size_t>(begin)];
}

BlockTree::BlockTree() {
    Block genesis;
    genesis.id = 0;
    genesis.published_time = 0.0;
    blocks_.push_back(genesis);
}

double BlockTree::path_claimed_fraction(BlockId block, FeeId fee) const {
    double total = 0.0;
    for (BlockId b = block; b != kNoBlock; b = blocks_[static_cast<std::size_t>(b)].parent) {
        const ClaimSet& c = blocks_[static_cast<std::size_t>(b)].claimed;
        if (fee >= c.range_begin && fee < c.range_end) total += 1.0;
        for (const auto& [id, frac] : c.partial)
            if (id == fee) total += frac;
    }
    return total;
}

BlockId BlockTree::add_block(BlockId parent, MinerId miner,
                             const std::vector<std::pair<FeeId, double>>& claims,
                             double found_time, const FeePool& pool) {
    if (!contains(parent)) throw ValidationError("add_block: unknown parent block id");
    const Block& par = block(parent);
    if (found_time < par.found_time)
        throw ValidationError("add_block: found_time precedes parent's");

    double claimed_value = 0.0;
    for (const auto& [fee, frac] : claims) {
        if (fee < 0 || static_cast<std::size_t>(fee) >= pool.size())
            throw ValidationError("add_block: unknown fee id");
        if (frac <= 0.0 || frac > 1.0 + kFracEps)
            throw ValidationError("add_block: claim fraction outside (0,1]");
        if (pool.arrival(fee) > found_time)
            throw ValidationError("add_block: fee claimed before its arrival");
        if (path_claimed_fraction(parent, fee) + frac > 1.0 + kFracEps)
            throw ValidationError("add_block: fee already claimed on this chain");
        claimed_value += frac * pool.value(fee);
    }

    ClaimSet cs;
    cs.partial = claims;
    std::sort(cs.partial.begin(), cs.partial.end());
    for (std::size_t i = 1; i < cs.partial.size(); ++i)
        if (cs.partial[i].first == cs.partial[i - 1].first)
            throw ValidationError("add_block: duplicate fee id in claims");
    return add_block_raw(parent, miner, std::move(cs), claimed_value, found_time);
}

BlockId BlockTree::add_block_raw(BlockId parent, MinerId miner, ClaimSet claims,
                                 double claimed_value, double found_time) {
    if (!contains(parent)) throw ValidationError("add_block: unknown parent block id");
    const Block& par = block(parent);
    Block b;
    b.id = static_cast<BlockId>(blocks_.size());
    b.parent = parent;
    b.miner = miner;
    b.height = par.height + 1;
    b.claimed = std::move(claims);
    b.claimed_value = claimed_value;
    b.cum_claimed_value = par.cum_claimed_value + claimed_value;
    b.found_time = found_time;
    blocks_.push_back(std::move(b));
    return blocks_.back().id;
}

void BlockTree::publish(BlockId id, double time) {
    if (!contains(id)) throw ValidationError("publish: unknown block id");
    Block& b = blocks_[static_cast<std::size_t>(id)];
    if (b.published()) return;
    if (b.parent != kNoBlock && !block(b.parent).published())
        throw ValidationError("publish: parent still unpublished");
    b.published_time = time;
}

std::vector<std::pair<FeeId, double>> BlockTree::available_fees(BlockId block_id, double now,
                                                                const FeePool& pool) const {
    if (!contains(block_id)) throw ValidationError("available_fees: unknown block id");
    FeeId arrived = pool.arrived_count(now);
    std::map<FeeId, double> claimed;
    for (BlockId b = block_id; b != kNoBlock; b = blocks_[static_cast<std::size_t>(b)].parent) {
        const ClaimSet& c = blocks_[static_cast<std::size_t>(b)].claimed;
        for (FeeId f = c.range_begin; f < c.range_end; ++f) claimed[f] += 1.0;
        for (const auto& [id, frac] : c.partial) claimed[id] += frac;
    }
    std::vector<std::pair<FeeId, double>> out;
    for (FeeId f = 0; f < arrived; ++f) {
        auto it = claimed.find(f);
        double rem = 1.0 - (it == claimed.end() ? 0.0 : it->second);
        if (rem > kFracEps) out.emplace_back(f, rem);
    }
    return out;
}

bool BlockTree::is_ancestor_or_self(BlockId ancestor, BlockId descendant) const {
    int target_height = block(ancestor).height;
    BlockId b = descendant;
    while (b != kNoBlock && block(b).height >= target_height) {
        if (b == ancestor) return true;
        b = block(b).parent;
    }
    return false;
}

double remaining_fees(const BlockTree& tree, const FeePool& pool, BlockId block, double now) {
    if (!tree.contains(block)) throw ValidationError("remaining_fees: unknown block id");
    const Block& b = tree.block(block);
    if (now < b.found_time) throw ValidationError("remaining_fees: now precedes block's found_time");
    double r = pool.total_arrived(now) - b.cum_claimed_value;
    return r < 0.0 ? 0.0 : r;
}

bool MinerView::knows(BlockId id) const {
    const Block& b = tree->block(id);
    return b.miner == miner || (b.published() && b.published_time <= now);
}

double MinerView::heard_time(BlockId id) const {
    const Block& b = tree->block(id);
    return b.miner == miner ? b.found_time : b.published_time;
}

std::vector<BlockId> best_tips(const MinerView& view) {
    const BlockTree& tree = *view.tree;
    int best_height = -1;
    view.for_each_candidate([&](BlockId id) {
        if (view.knows(id)) best_height = std::max(best_height, tree.block(id).height);
    });
    std::vector<BlockId> tips;
    view.for_each_candidate([&](BlockId id) {
        if (view.knows(id) && tree.block(id).height == best_height) tips.push_back(id);
    });
    std::stable_sort(tips.begin(), tips.end(), [&](BlockId a, BlockId b) {
        if (a == view.race_preference && b != view.race_preference) return true;
        if (b == view.race_preference && a != view.race_preference) return false;
        double ta = view.heard_time(a), tb = view.heard_time(b);
        if (ta != tb) return ta < tb;
        // simultaneous announcements: a miner heard its own block first
        bool own_a = tree.block(a).miner == view.miner;
        bool own_b = tree.block(b).miner == view.miner;
        if (own_a != own_b) return own_a;
        return a < b;
    });
    return tips;
}

BlockId preferred_tip(const MinerView& view) {
    std::vector<BlockId> tips = best_tips(view);
    for (BlockId id : tips)
        if (view.tree->block(id).miner == view.miner) return id;
    return tips.front();
}

std::string tree_to_jsonl(const BlockTree& tree) {
    std::ostringstream out;
    for (const Block& b : tree.blocks()) {
        nlohmann::ordered_json j;
        j["id"] = b.id;
        j["parent"] = b.parent;
        j["miner"] = b.miner;
        j["height"] = b.height;
        j["range"] = {b.claimed.range_begin, b.claimed.range_end};
        nlohmann::ordered_json partial = nlohmann::ordered_json::array();
        for (const auto& [fee, frac] : b.claimed.partial) partial.push_back({fee, frac});
        j["claimed"] = partial;
        j["claimed_value"] = b.claimed_value;
        j["found"] = b.found_time;
        if (b.published())
            j["published"] = b.published_time;
        else
            j["published"] = nullptr;
        out << j.dump() << "\n";
    }
    return out.str();
}

std::string pool_to_jsonl(const FeePool& pool) {
    std::ostringstream out;
    for (const FeeEvent& e : pool.events()) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["arrival"] = e.arrival_time;
        j["value"] = e.value;
        out << j.dump() << "\n";
    }
    return out.str();
}

FeePool pool_from_jsonl(const std::string& text) {
    FeePool pool;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        pool.add(j.at("arrival").get<double>(), j.at("value").get<double>());
    }
    return pool;
}

BlockTree tree_from_jsonl(const std::string& text) {
    BlockTree tree;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        if (first) {  // genesis is implicit in a fresh tree
            first = false;
            if (j.at("id").get<BlockId>() == 0) continue;
        }
        ClaimSet cs;
        cs.range_begin = j.at("range")[0].get<FeeId>();
        cs.range_end = j.at("range")[1].get<FeeId>();
        for (const auto& p : j.at("claimed")) cs.partial.emplace_back(p[0].get<FeeId>(), p[1].get<double>());
        BlockId id = tree.add_block_raw(j.at("parent").get<BlockId>(), j.at("miner").get<MinerId>(),
                                        std::move(cs), j.at("claimed_value").get<double>(),
                                        j.at("found").get<double>());
        if (!j.at("published").is_null()) tree.publish(id, j.at("published").get<double>());
    }
    return tree;
}

}  // namespace feesim
