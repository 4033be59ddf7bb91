#include "strategies.hpp"

#include <algorithm>
#include <cmath>

#include "analytics.hpp"

namespace feesim {

namespace {

// argmax of remaining fees among `candidates`; ties by first-heard, then id.
BlockId max_fee_block(const MinerView& view, const FeePool& pool, double now,
                      const std::vector<BlockId>& candidates) {
    BlockId best = kNoBlock;
    double best_r = -1.0;
    for (BlockId id : candidates) {
        double r = remaining_fees(*view.tree, pool, id, now);
        if (r > best_r + 1e-12) {
            best = id;
            best_r = r;
        }
    }
    return best;
}

std::vector<BlockId> known_at_height(const MinerView& view, int height) {
    std::vector<BlockId> out;
    const BlockTree& tree = *view.tree;
    view.for_each_candidate([&](BlockId id) {
        if (tree.block(id).height == height && view.knows(id)) out.push_back(id);
    });
    std::sort(out.begin(), out.end(), [&](BlockId a, BlockId b) {
        double ta = view.heard_time(a), tb = view.heard_time(b);
        if (ta != tb) return ta < tb;
        return a < b;
    });
    return out;
}

std::vector<BlockId> own_unpublished(const MinerView& view) {
    std::vector<BlockId> out;
    const BlockTree& tree = *view.tree;
    view.for_each_candidate([&](BlockId id) {
        const Block& b = tree.block(id);
        if (b.miner == view.miner && !b.published()) out.push_back(id);
    });
    std::sort(out.begin(), out.end());  // parent-first (ids are append-ordered)
    return out;
}

int public_height(const MinerView& view) {
    int h = 0;
    const BlockTree& tree = *view.tree;
    view.for_each_candidate([&](BlockId id) {
        const Block& b = tree.block(id);
        if (b.published() && b.published_time <= view.now) h = std::max(h, b.height);
    });
    return h;
}

}  // namespace

ForkDecisionInputs fork_inputs(const MinerView& view, const FeePool& pool) {
    ForkDecisionInputs in;
    std::vector<BlockId> tips = best_tips(view);
    int h = view.tree->block(tips.front()).height;
    in.top = max_fee_block(view, pool, view.now, tips);
    in.r_top = remaining_fees(*view.tree, pool, in.top, view.now);
    in.owns_top = view.tree->block(in.top).miner == view.miner;
    if (h > 0) {
        std::vector<BlockId> below = known_at_height(view, h - 1);
        in.below = max_fee_block(view, pool, view.now, below);
        if (in.below != kNoBlock) {
            in.r_below = remaining_fees(*view.tree, pool, in.below, view.now);
            in.delta = in.r_below - in.r_top;
        }
    }
    return in;
}

FeeMap::FeeMap(std::function<double(double)> fn, double domain_max) : fn_(std::move(fn)) {
    if (domain_max <= 0.0) domain_max = 1.0;
    const int n = 512;
    double prev = fn_(0.0);
    for (int i = 1; i <= n; ++i) {
        double x = domain_max * i / n;
        double y = fn_(x);
        if (std::isnan(y) || y < prev - 1e-12)
            throw ValidationError("FeeMap: map must be monotonically nondecreasing");
        prev = y;
    }
}

FeeMap FeeMap::identity(double domain_max) {
    return FeeMap([](double x) { return x; }, domain_max);
}

FeeMap FeeMap::linear(double k, double domain_max) {
    if (k < 0.0) throw ValidationError("FeeMap::linear: k must be nonnegative");
    return FeeMap([k](double x) { return k * x; }, domain_max);
}

FeeMap FeeMap::equilibrium(double gamma, double domain_max) {
    validate_equilibrium_gamma(gamma);
    return FeeMap([gamma](double x) { return equilibrium_f(x, gamma); }, domain_max);
}

StrategyAction decide_honest(const MinerView& view, const FeePool& pool, double now) {
    (void)pool;
    (void)now;
    StrategyAction a;
    a.mine_target = best_tips(view).front();
    a.claim = ClaimRule::fraction(1.0);
    a.publish_now = own_unpublished(view);
    return a;
}

StrategyAction decide_petty_compliant(const MinerView& view, const FeePool& pool, double now) {
    StrategyAction a;
    a.mine_target = max_fee_block(view, pool, now, best_tips(view));
    a.claim = ClaimRule::fraction(1.0);
    a.publish_now = own_unpublished(view);
    return a;
}

StrategyAction decide_lazy_fork(const MinerView& view, const FeePool& pool, double now) {
    (void)now;
    StrategyAction a;
    ForkDecisionInputs in = fork_inputs(view, pool);
    if (in.owns_top || in.below == kNoBlock || in.r_top >= in.delta)
        a.mine_target = in.top;
    else
        a.mine_target = in.below;
    a.claim = ClaimRule::fraction(0.5);  // half of whatever remains, fork or not
    a.publish_now = own_unpublished(view);
    return a;
}

StrategyAction decide_function_fork(const MinerView& view, const FeePool& pool, double now,
                                    const FeeMap& f) {
    (void)now;
    StrategyAction a;
    ForkDecisionInputs in = fork_inputs(view, pool);
    double v_cont = f(in.r_top);
    double v_und = in.below == kNoBlock ? -1.0 : std::min(f(in.r_below), in.delta);
    if (in.owns_top || v_cont >= v_und) {
        a.mine_target = in.top;
        a.claim = ClaimRule::amount(v_cont);
    } else {
        a.mine_target = in.below;
        a.claim = ClaimRule::amount(v_und);
    }
    a.publish_now = own_unpublished(view);
    return a;
}

StrategyAction decide_fee_snipe(const MinerView& view, const FeePool& pool, double now,
                                double chi) {
    (void)now;
    if (!(chi > 0.0 && chi < 1.0))
        throw ValidationError("decide_fee_snipe: chi must be in (0,1)");
    StrategyAction a;
    ForkDecisionInputs in = fork_inputs(view, pool);
    if (in.owns_top || in.below == kNoBlock || in.r_top >= chi * chi * in.r_below)
        a.mine_target = in.top;
    else
        a.mine_target = in.below;
    a.claim = ClaimRule::fraction(1.0);
    a.publish_now = own_unpublished(view);
    return a;
}

StrategyAction decide_selfish(const MinerView& view, const FeePool& pool, double now,
                              double beta) {
    (void)pool;
    (void)now;
    StrategyAction a;
    const BlockTree& tree = *view.tree;
    a.mine_target = preferred_tip(view);
    a.claim = ClaimRule::fraction(1.0);

    // Hidden suffix of the chain the miner is working on, parent-first.
    std::vector<BlockId> hidden;
    for (BlockId b = a.mine_target; b != kNoBlock && !tree.block(b).published();
         b = tree.block(b).parent)
        hidden.push_back(b);
    std::reverse(hidden.begin(), hidden.end());
    if (hidden.empty()) return a;

    int h_pub = public_height(view);
    BlockId tip = a.mine_target;
    const Block& tip_block = tree.block(tip);

    for (BlockId b : hidden) {
        bool reveal = tree.block(b).height <= h_pub;
        // A single just-found block above a clean public tip is published when
        // its fees exceed the threshold (no point risking a valuable block).
        if (hidden.size() == 1 && b == tip && tree.block(b).claimed_value > beta) reveal = true;
        if (reveal) a.publish_now.push_back(b);
    }

    // Lead collapsed to one with a rival occupying the public height: reveal
    // the whole chain, it is strictly longest once published.
    if (tip_block.height == h_pub + 1) {
        bool rival = false;
        view.for_each_candidate([&](BlockId id) {
            const Block& b = tree.block(id);
            if (b.height == h_pub && b.published() && b.published_time <= view.now &&
                !tree.is_ancestor_or_self(id, tip))
                rival = true;
        });
        if (rival) {
            for (BlockId b : hidden)
                if (std::find(a.publish_now.begin(), a.publish_now.end(), b) == a.publish_now.end())
                    a.publish_now.push_back(b);
        }
    }
    return a;
}

}  // namespace feesim
