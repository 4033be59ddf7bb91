#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

#include "analytics.hpp"
#include "json.hpp"

namespace feesim {

void validate(const SimConfig& config) {
    if (config.miners.empty()) throw ValidationError("sim: at least one miner required");
    double total = 0.0;
    for (const auto& m : config.miners) {
        if (m.hash_share <= 0.0) throw ValidationError("sim: hash shares must be positive");
        total += m.hash_share;
        if (m.kind == StrategyKind::FeeSnipe && !(m.hash_share > 0.0 && m.hash_share < 1.0))
            throw ValidationError("sim: fee-snipe chi must be in (0,1)");
    }
    if (std::abs(total - 1.0) > 1e-12) throw ValidationError("sim: hash shares must sum to 1");
    if (!(config.block_rate > 0.0)) throw ValidationError("sim: block rate must be positive");
    if (config.fee_rate < 0.0) throw ValidationError("sim: fee rate must be nonnegative");
    if (!(config.gamma >= 0.0 && config.gamma <= 1.0))
        throw ValidationError("sim: gamma must be in [0,1]");
    if (config.mining_cost_rate < 0.0)
        throw ValidationError("sim: mining cost rate must be nonnegative");
    if (config.fee_value.param <= 0.0) throw ValidationError("sim: fee value must be positive");
    if (config.horizon.value <= 0.0) throw ValidationError("sim: horizon must be positive");
    if (config.block_fee_cap && *config.block_fee_cap <= 0.0)
        throw ValidationError("sim: block fee cap must be positive");
}

namespace {

bool is_withholding(StrategyKind k) { return k == StrategyKind::Selfish; }

// Remaining-fee fractions on one chain: fees below `upto` are fully claimed
// except the `open` leftovers; fees at or beyond `upto` are untouched.
struct Ledger {
    FeeId upto = 0;
    std::vector<std::pair<FeeId, double>> open;
};

class Engine {
public:
    explicit Engine(const SimConfig& config) : cfg_(config), rng_(config.seed) {
        validate(config);
        ledgers_.emplace(tree_.genesis(), Ledger{});
        pub_at_.push_back({tree_.genesis()});
        race_pref_.assign(cfg_.miners.size(), kNoBlock);
        race_key_.assign(cfg_.miners.size(), kNoBlock);
        hidden_.assign(cfg_.miners.size(), {});
        found_.assign(cfg_.miners.size(), 0);
        rebuild_hint();
        double dmax = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cfg_.miners.size(); ++i) {
            const MinerSpec& m = cfg_.miners[i];
            if (m.kind == StrategyKind::FunctionFork) {
                double cap = 1e6;
                switch (m.function_fork.f) {
                    case FunctionForkSpec::F::Identity:
                        fee_maps_.emplace(i, FeeMap::identity(cap));
                        break;
                    case FunctionForkSpec::F::Linear:
                        fee_maps_.emplace(i, FeeMap::linear(m.function_fork.k, cap));
                        break;
                    case FunctionForkSpec::F::Equilibrium:
                        fee_maps_.emplace(i, FeeMap::equilibrium(m.function_fork.gamma, cap));
                        break;
                }
            }
        }
        (void)dmax;
    }

    SimReport run() {
        next_fee_ = cfg_.fee_rate > 0.0 ? exp_draw(cfg_.fee_rate)
                                        : std::numeric_limits<double>::infinity();
        while (!horizon_reached()) {
            double dt = exp_draw(cfg_.block_rate);
            double t_block = t_ + dt;
            if (cfg_.horizon.kind == Horizon::Kind::Time && t_block > cfg_.horizon.value) break;
            emit_fees_until(t_block);
            t_ = t_block;
            on_block_found(pick_finder());
        }
        return finalize();
    }

private:
    bool horizon_reached() const {
        if (cfg_.horizon.kind == Horizon::Kind::Blocks)
            return pub_height_ >= static_cast<int>(cfg_.horizon.value);
        return false;  // time horizon handled in the loop
    }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
    double exp_draw(double rate) {
        return std::exponential_distribution<double>(rate)(rng_);
    }

    void emit_fees_until(double t) {
        while (next_fee_ <= t) {
            double v = cfg_.fee_value.kind == FeeValueDist::Kind::Fixed
                           ? cfg_.fee_value.param
                           : exp_draw(1.0 / cfg_.fee_value.param);
            pool_.add(next_fee_, v);
            next_fee_ += exp_draw(cfg_.fee_rate);
        }
    }

    std::size_t pick_finder() {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < cfg_.miners.size(); ++i) {
            acc += cfg_.miners[i].hash_share;
            if (u < acc) return i;
        }
        return cfg_.miners.size() - 1;
    }

    MinerView view_of(std::size_t miner) {
        MinerView v;
        v.tree = &tree_;
        v.miner = static_cast<MinerId>(miner);
        v.now = t_;
        v.race_preference = race_pref_[miner];
        v.scan_hint = &hint_;
        return v;
    }

    StrategyAction decide(std::size_t miner) {
        MinerView v = view_of(miner);
        const MinerSpec& spec = cfg_.miners[miner];
        switch (spec.kind) {
            case StrategyKind::Honest:
                return decide_honest(v, pool_, t_);
            case StrategyKind::PettyCompliant:
                return decide_petty_compliant(v, pool_, t_);
            case StrategyKind::LazyFork:
                return decide_lazy_fork(v, pool_, t_);
            case StrategyKind::FunctionFork:
                return decide_function_fork(v, pool_, t_, fee_maps_.at(miner));
            case StrategyKind::FeeSnipe:
                return decide_fee_snipe(v, pool_, t_, spec.hash_share);
            case StrategyKind::Selfish:
                return decide_selfish(v, pool_, t_, spec.beta);
        }
        throw RuntimeError("sim: unknown strategy kind");
    }

    const Ledger& ledger_for(BlockId b) {
        auto it = ledgers_.find(b);
        if (it != ledgers_.end()) return it->second;
        // Rebuild from the chain (rare: mining on a block never targeted
        // before). Fees inside full-claim ranges are closed; only partial
        // claims can leave anything open, and claims tile the id space, so no
        // untouched fee hides below `upto`.
        Ledger led;
        std::unordered_map<FeeId, double> partial;
        for (BlockId cur = b; cur != kNoBlock; cur = tree_.block(cur).parent) {
            const ClaimSet& c = tree_.block(cur).claimed;
            led.upto = std::max(led.upto, c.range_end);
            for (const auto& [fee, frac] : c.partial) {
                partial[fee] += frac;
                led.upto = std::max(led.upto, fee + 1);
            }
        }
        for (const auto& [fee, total] : partial)
            if (total < 1.0 - 1e-12) led.open.emplace_back(fee, 1.0 - total);
        std::sort(led.open.begin(), led.open.end());
        return ledgers_.emplace(b, std::move(led)).first->second;
    }

    void on_block_found(std::size_t finder) {
        StrategyAction action = decide(finder);
        BlockId target = action.mine_target;
        const Ledger& base = ledger_for(target);
        FeeId arrived = pool_.arrived_count(t_);

        double r_range = pool_.value_in_range(base.upto, arrived);
        double r_open = 0.0;
        for (const auto& [fee, rem] : base.open) r_open += rem * pool_.value(fee);
        double remaining = r_range + r_open;

        double frac;
        if (action.claim.kind == ClaimRule::Kind::Fraction)
            frac = action.claim.value;
        else
            frac = remaining > 0.0 ? action.claim.value / remaining : 0.0;
        if (cfg_.block_fee_cap && remaining > 0.0)
            frac = std::min(frac, *cfg_.block_fee_cap / remaining);
        frac = std::clamp(frac, 0.0, 1.0);

        ClaimSet claims;
        Ledger child;
        double value = 0.0;
        if (remaining <= 0.0 || frac <= 0.0) {
            child = base;
        } else if (frac >= 1.0 - 1e-15) {
            claims.range_begin = base.upto;
            claims.range_end = arrived;
            claims.partial = base.open;
            child.upto = arrived;
            value = remaining;
        } else {
            claims.partial.reserve(base.open.size() + static_cast<std::size_t>(arrived - base.upto));
            child.upto = arrived;
            for (const auto& [fee, rem] : base.open) {
                claims.partial.emplace_back(fee, frac * rem);
                child.open.emplace_back(fee, rem * (1.0 - frac));
            }
            for (FeeId f = base.upto; f < arrived; ++f) {
                claims.partial.emplace_back(f, frac);
                child.open.emplace_back(f, 1.0 - frac);
            }
            value = frac * remaining;
        }

        BlockId id = tree_.add_block_raw(target, static_cast<MinerId>(finder), std::move(claims),
                                         value, t_);
        ledgers_.emplace(id, std::move(child));
        hidden_[finder].push_back(id);
        found_[finder]++;
        if (cfg_.record_trace)
            trace_.push_back({t_, "found", id, static_cast<int>(finder), tree_.block(id).height, value});

        rebuild_hint();
        publish_fixpoint();
        update_races();
    }

    void publish_block(BlockId id) {
        tree_.publish(id, t_);
        const Block& b = tree_.block(id);
        if (static_cast<int>(pub_at_.size()) <= b.height) pub_at_.resize(b.height + 1);
        pub_at_[b.height].push_back(id);
        pub_height_ = std::max(pub_height_, b.height);
        auto& hid = hidden_[static_cast<std::size_t>(b.miner)];
        hid.erase(std::remove(hid.begin(), hid.end(), id), hid.end());
        if (cfg_.record_trace)
            trace_.push_back({t_, "published", id, b.miner, b.height, b.claimed_value});
    }

    void publish_fixpoint() {
        bool changed = true;
        int guard = 0;
        while (changed) {
            if (guard++ > 4096) throw RuntimeError("sim: publication cascade did not settle");
            changed = false;
            for (std::size_t m = 0; m < cfg_.miners.size(); ++m) {
                if (hidden_[m].empty()) continue;
                StrategyAction a = decide(m);
                for (BlockId id : a.publish_now) {
                    if (!tree_.block(id).published()) {
                        publish_block(id);
                        changed = true;
                    }
                }
                if (changed) rebuild_hint();
            }
        }
    }

    void rebuild_hint() {
        hint_.clear();
        int lo = std::max(0, pub_height_ - 2);
        for (int h = lo; h < static_cast<int>(pub_at_.size()); ++h)
            for (BlockId id : pub_at_[h]) hint_.push_back(id);
        for (const auto& hid : hidden_)
            for (BlockId id : hid) hint_.push_back(id);
        std::sort(hint_.begin(), hint_.end());
        hint_.erase(std::unique(hint_.begin(), hint_.end()), hint_.end());
    }

    void update_races() {
        // Race: two or more published tips at the public height, at least one
        // owned by a withholding miner. Each honest miner independently mines
        // the attacker tip with probability gamma, drawn once per race.
        const auto& tips = pub_at_[pub_height_];
        BlockId attacker = kNoBlock;
        BlockId other = kNoBlock;
        if (tips.size() >= 2) {
            for (BlockId id : tips) {
                bool wh = is_withholding(
                    cfg_.miners[static_cast<std::size_t>(tree_.block(id).miner)].kind);
                if (wh && attacker == kNoBlock) attacker = id;
                if (!wh && other == kNoBlock) other = id;
            }
        }
        if (attacker == kNoBlock || other == kNoBlock) {
            for (std::size_t m = 0; m < cfg_.miners.size(); ++m) {
                race_pref_[m] = kNoBlock;
                race_key_[m] = kNoBlock;
            }
            return;
        }
        for (std::size_t m = 0; m < cfg_.miners.size(); ++m) {
            if (cfg_.miners[m].kind != StrategyKind::Honest) continue;
            if (race_key_[m] == attacker) continue;  // same race, keep the draw
            race_key_[m] = attacker;
            race_pref_[m] = uniform() < cfg_.gamma ? attacker : other;
        }
    }

    SimReport finalize() {
        SimReport rep;
        rep.seed = cfg_.seed;
        rep.trace = std::move(trace_);
        rep.final_time = t_;
        if (cfg_.record_trace) {
            rep.tree_jsonl = tree_to_jsonl(tree_);
            rep.pool_jsonl = pool_to_jsonl(pool_);
        }
        rep.miners.resize(cfg_.miners.size());
        for (std::size_t m = 0; m < cfg_.miners.size(); ++m) {
            rep.miners[m].name = cfg_.miners[m].name;
            rep.miners[m].blocks_found = found_[m];
        }

        // Main chain: highest published block, first-heard tie-break.
        BlockId tip = tree_.genesis();
        for (int h = static_cast<int>(pub_at_.size()) - 1; h >= 0; --h) {
            if (pub_at_[h].empty()) continue;
            tip = *std::min_element(pub_at_[h].begin(), pub_at_[h].end(),
                                    [&](BlockId a, BlockId b) {
                                        const Block& ba = tree_.block(a);
                                        const Block& bb = tree_.block(b);
                                        if (ba.published_time != bb.published_time)
                                            return ba.published_time < bb.published_time;
                                        if (ba.found_time != bb.found_time)
                                            return ba.found_time < bb.found_time;
                                        return a < b;
                                    });
            break;
        }
        rep.main_chain_length = tree_.block(tip).height;

        std::vector<char> on_chain(tree_.size(), 0);
        for (BlockId b = tip; b != kNoBlock; b = tree_.block(b).parent) {
            on_chain[static_cast<std::size_t>(b)] = 1;
            const Block& blk = tree_.block(b);
            if (blk.miner != kNoMiner) {
                rep.miners[static_cast<std::size_t>(blk.miner)].reward += blk.claimed_value;
                rep.miners[static_cast<std::size_t>(blk.miner)].blocks_on_chain++;
                rep.total_reward += blk.claimed_value;
            }
        }
        for (auto& m : rep.miners)
            m.share = rep.total_reward > 0.0 ? m.reward / rep.total_reward : 0.0;

        std::vector<int> published_children(tree_.size(), 0);
        for (const Block& b : tree_.blocks()) {
            if (b.id == tree_.genesis()) continue;
            if (!b.published()) continue;
            published_children[static_cast<std::size_t>(b.parent)]++;
            if (!on_chain[static_cast<std::size_t>(b.id)]) rep.orphans++;
        }
        for (int c : published_children)
            if (c >= 2) rep.forks++;
        return rep;
    }

    SimConfig cfg_;
    std::mt19937_64 rng_;
    BlockTree tree_;
    FeePool pool_;
    double t_ = 0.0;
    double next_fee_ = 0.0;
    int pub_height_ = 0;
    std::vector<std::vector<BlockId>> pub_at_;
    std::vector<std::vector<BlockId>> hidden_;
    std::vector<BlockId> race_pref_;
    std::vector<BlockId> race_key_;
    std::vector<long> found_;
    std::vector<BlockId> hint_;
    // TODO: prune ledgers of dead branches; partial-claim runs grow one open
    // entry per fee and very long undercutting simulations would feel it
    std::unordered_map<BlockId, Ledger> ledgers_;
    std::unordered_map<std::size_t, FeeMap> fee_maps_;
    std::vector<TraceEvent> trace_;
};

}  // namespace

SimReport run_sim(const SimConfig& config) { return Engine(config).run(); }

double estimate_selfish_reward(double alpha, double gamma, double beta, long n_blocks,
                               std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw ValidationError("estimate_selfish_reward: alpha must be in (0,0.5)");
    if (n_blocks < 10000)
        throw ValidationError("estimate_selfish_reward: need at least 10^4 blocks");
    SimConfig cfg;
    cfg.miners.push_back({"selfish", StrategyKind::Selfish, alpha, beta, {}});
    cfg.miners.push_back({"honest", StrategyKind::Honest, 1.0 - alpha,
                          std::numeric_limits<double>::infinity(), {}});
    cfg.fee_rate = 20.0;
    cfg.fee_value = {FeeValueDist::Kind::Fixed, 1.0 / 20.0};
    cfg.block_rate = 1.0;
    cfg.gamma = gamma;
    cfg.horizon = {Horizon::Kind::Blocks, static_cast<double>(n_blocks)};
    cfg.seed = seed;
    SimReport rep = run_sim(cfg);
    return rep.miners[0].share;
}

double run_whale_walk(double q, int z, long trials, std::uint64_t seed, long max_steps) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("run_whale_walk: q must be in (0,1)");
    if (z < 0) throw ValidationError("run_whale_walk: z must be >= 0");
    if (trials < 1) throw ValidationError("run_whale_walk: trials must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // Subcritical walks drift upward forever; once the return probability
    // (q/p)^(x+1) falls below 1e-12 the trial is settled as not absorbed.
    long give_up = std::numeric_limits<long>::max();
    if (q < 0.5) {
        double r = q / (1.0 - q);
        give_up = static_cast<long>(std::ceil(-12.0 * std::log(10.0) / std::log(r))) + 1;
    }
    long absorbed = 0;
    for (long tr = 0; tr < trials; ++tr) {
        long x = z;
        for (long step = 0; step < max_steps; ++step) {
            x += u(rng) < q ? -1 : 1;
            if (x < 0) {
                absorbed++;
                break;
            }
            if (x > give_up) break;
        }
    }
    return static_cast<double>(absorbed) / static_cast<double>(trials);
}

std::vector<GapBin> mining_gap_profile(const SimConfig& config, int bins, double bin_width) {
    validate(config);
    if (bins <= 0) throw ValidationError("mining_gap_profile: need at least one bin");
    double width = bin_width > 0.0 ? bin_width : 3.0 / (config.block_rate * bins);
    std::vector<GapBin> out(bins);
    for (int i = 0; i < bins; ++i) {
        out[i].lo = i * width;
        out[i].hi = (i + 1) * width;
    }
    std::vector<double> integral(bins, 0.0), time_in(bins, 0.0);

    std::mt19937_64 rng(config.seed);
    auto exp_draw = [&](double rate) { return std::exponential_distribution<double>(rate)(rng); };
    double t = 0.0, last_block = 0.0, backlog = 0.0;
    double next_fee = config.fee_rate > 0.0 ? exp_draw(config.fee_rate)
                                            : std::numeric_limits<double>::infinity();
    long blocks = 0;
    long target_blocks = config.horizon.kind == Horizon::Kind::Blocks
                             ? static_cast<long>(config.horizon.value)
                             : std::numeric_limits<long>::max();
    double target_time = config.horizon.kind == Horizon::Kind::Time ? config.horizon.value
                                                                    : std::numeric_limits<double>::infinity();

    auto accumulate = [&](double seg_lo, double seg_hi, double value) {
        // lag segment [seg_lo, seg_hi) relative to last_block with constant backlog
        double lo = seg_lo - last_block, hi = seg_hi - last_block;
        int first = std::max(0, static_cast<int>(lo / width));
        for (int b = first; b < bins; ++b) {
            double blo = b * width, bhi = (b + 1) * width;
            double ov = std::min(hi, bhi) - std::max(lo, blo);
            if (ov <= 0.0) {
                if (blo >= hi) break;
                continue;
            }
            integral[b] += value * ov;
            time_in[b] += ov;
        }
    };

    while (blocks < target_blocks && t < target_time) {
        double t_block = t + exp_draw(config.block_rate);
        if (t_block > target_time) t_block = target_time;
        double cursor = t;
        while (next_fee <= t_block) {
            accumulate(cursor, next_fee, backlog);
            cursor = next_fee;
            double v = config.fee_value.kind == FeeValueDist::Kind::Fixed
                           ? config.fee_value.param
                           : exp_draw(1.0 / config.fee_value.param);
            backlog += v;
            next_fee += exp_draw(config.fee_rate);
        }
        accumulate(cursor, t_block, backlog);
        t = t_block;
        if (t >= target_time) break;
        backlog = 0.0;  // honest block claims everything
        last_block = t;
        blocks++;
    }

    for (int b = 0; b < bins; ++b) {
        out[b].time_in_bin = time_in[b];
        out[b].avg_backlog = time_in[b] > 0.0 ? integral[b] / time_in[b] : 0.0;
        out[b].profit_rate = config.block_rate * out[b].avg_backlog - config.mining_cost_rate;
    }
    return out;
}

WhaleAdjudication adjudicate_whale_variant(double chi_a, double chi_x, int z, long trials,
                                           std::uint64_t seed) {
    WhaleParams p{chi_a, chi_x, z, 0.0};
    WhaleAdjudication adj;
    adj.delta_statement = whale_delta_threshold(p, WhaleVariant::Statement);
    adj.delta_proof = whale_delta_threshold(p, WhaleVariant::Proof);
    double m = 1.0 - chi_a;
    double q_joined = chi_a + chi_x;
    double a_honest = run_whale_walk(chi_a, z, trials, seed);
    double a_joined = run_whale_walk(q_joined, z, trials, seed + 1);
    // crossover of E[fork] = a_joined * chi_x/q * (1+delta) vs
    // E[honest] = (1 - a_honest) * chi_x / m
    adj.delta_mc = (1.0 - a_honest) * q_joined / (m * a_joined) - 1.0;
    adj.rel_err_statement = std::abs(adj.delta_mc - adj.delta_statement) /
                            std::max(1e-12, std::abs(adj.delta_statement));
    adj.rel_err_proof =
        std::abs(adj.delta_mc - adj.delta_proof) / std::max(1e-12, std::abs(adj.delta_proof));
    adj.selected = adj.rel_err_proof <= adj.rel_err_statement ? "proof" : "statement";
    return adj;
}

namespace {
StrategyKind strategy_from_string(const std::string& s) {
    if (s == "honest") return StrategyKind::Honest;
    if (s == "petty" || s == "petty-compliant") return StrategyKind::PettyCompliant;
    if (s == "lazy-fork") return StrategyKind::LazyFork;
    if (s == "function-fork") return StrategyKind::FunctionFork;
    if (s == "fee-snipe") return StrategyKind::FeeSnipe;
    if (s == "selfish" || s == "fee-selfish") return StrategyKind::Selfish;
    throw ValidationError("sim: unknown strategy '" + s + "'");
}
}  // namespace

SimConfig sim_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("sim config: invalid JSON: ") + e.what());
    }
    SimConfig cfg;
    if (!j.contains("miners")) throw ValidationError("sim config: missing field 'miners'");
    for (const auto& jm : j["miners"]) {
        MinerSpec m;
        m.name = jm.value("name", "m" + std::to_string(cfg.miners.size()));
        if (!jm.contains("strategy")) throw ValidationError("sim config: miner missing 'strategy'");
        m.kind = strategy_from_string(jm["strategy"].get<std::string>());
        if (!jm.contains("hash_share")) throw ValidationError("sim config: miner missing 'hash_share'");
        m.hash_share = jm["hash_share"].get<double>();
        if (jm.contains("beta") && !jm["beta"].is_null()) m.beta = jm["beta"].get<double>();
        if (jm.contains("f")) {
            const auto& jf = jm["f"];
            std::string kind = jf.value("kind", "identity");
            if (kind == "identity")
                m.function_fork.f = FunctionForkSpec::F::Identity;
            else if (kind == "linear")
                m.function_fork.f = FunctionForkSpec::F::Linear;
            else if (kind == "equilibrium")
                m.function_fork.f = FunctionForkSpec::F::Equilibrium;
            else
                throw ValidationError("sim config: unknown fork function '" + kind + "'");
            m.function_fork.k = jf.value("k", 1.0);
            m.function_fork.gamma = jf.value("gamma", 0.2);
        }
        cfg.miners.push_back(std::move(m));
    }
    cfg.fee_rate = j.value("fee_rate", 1.0);
    if (j.contains("fee_value")) {
        std::string kind = j["fee_value"].value("kind", "fixed");
        if (kind == "fixed")
            cfg.fee_value.kind = FeeValueDist::Kind::Fixed;
        else if (kind == "exponential")
            cfg.fee_value.kind = FeeValueDist::Kind::Exponential;
        else
            throw ValidationError("sim config: unknown fee value kind '" + kind + "'");
        cfg.fee_value.param = j["fee_value"].value("value", 1.0);
    }
    cfg.block_rate = j.value("block_rate", 1.0);
    cfg.gamma = j.value("gamma", 0.0);
    cfg.mining_cost_rate = j.value("mining_cost_rate", 0.0);
    if (j.contains("block_fee_cap") && !j["block_fee_cap"].is_null())
        cfg.block_fee_cap = j["block_fee_cap"].get<double>();
    if (j.contains("horizon")) {
        std::string kind = j["horizon"].value("kind", "blocks");
        if (kind == "blocks")
            cfg.horizon.kind = Horizon::Kind::Blocks;
        else if (kind == "time")
            cfg.horizon.kind = Horizon::Kind::Time;
        else
            throw ValidationError("sim config: unknown horizon kind '" + kind + "'");
        cfg.horizon.value = j["horizon"].value("value", 1000.0);
    }
    cfg.seed = j.value("seed", 0ULL);
    cfg.record_trace = j.value("trace", false);
    return cfg;
}

std::string sim_report_to_json(const SimReport& report) {
    nlohmann::ordered_json j;
    j["seed"] = report.seed;
    j["miners"] = nlohmann::ordered_json::array();
    for (const auto& m : report.miners) {
        j["miners"].push_back({{"name", m.name},
                               {"reward", m.reward},
                               {"share", m.share},
                               {"blocks_found", m.blocks_found},
                               {"blocks_on_chain", m.blocks_on_chain}});
    }
    j["orphans"] = report.orphans;
    j["forks"] = report.forks;
    j["main_chain_length"] = report.main_chain_length;
    j["total_reward"] = report.total_reward;
    if (!report.trace.empty()) {
        j["trace"] = nlohmann::ordered_json::array();
        for (const auto& e : report.trace)
            j["trace"].push_back({{"time", e.time},
                                  {"kind", e.kind},
                                  {"block", e.block},
                                  {"miner", e.miner},
                                  {"height", e.height},
                                  {"value", e.value}});
    }
    return j.dump(2);
}

std::string sim_report_to_csv(const SimReport& report) {
    std::ostringstream out;
    out << "miner,reward,share,blocks_found,blocks_on_chain\n";
    char buf[160];
    for (const auto& m : report.miners) {
        std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%ld,%ld\n", m.name.c_str(), m.reward,
                      m.share, m.blocks_found, m.blocks_on_chain);
        out << buf;
    }
    return out.str();
}

std::string gap_profile_to_csv(const std::vector<GapBin>& bins) {
    std::ostringstream out;
    out << "bin_lo,bin_hi,avg_backlog,profit_rate,time_in_bin\n";
    char buf[200];
    for (const auto& b : bins) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g\n", b.lo, b.hi,
                      b.avg_backlog, b.profit_rate, b.time_in_bin);
        out << buf;
    }
    return out.str();
}

}  // namespace feesim
