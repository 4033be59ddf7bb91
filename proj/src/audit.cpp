#include "audit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

namespace feesim {

double gamma_strict_utility(double base_utility, std::span<const double> unconfirmed_outcomes,
                            double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ValidationError("gamma_strict_utility: gamma must be in (0,1]");
    double penalty = 0.0;
    for (double u : unconfirmed_outcomes) penalty += std::min(u, 0.0);
    return base_utility + gamma * penalty;
}

namespace {

double max_amount(const MechanismSpec& spec, const std::vector<double>& values) {
    double m = spec.posted + spec.sigma;
    for (double v : values) m = std::max(m, v);
    return m > 0.0 ? m : 1.0;
}

double resolve_tick(const MechanismSpec& spec, const std::vector<double>& values,
                    const AuditConfig& config) {
    return config.tick > 0.0 ? config.tick : 1e-3 * max_amount(spec, values);
}

double resolve_tolerance(const MechanismSpec& spec, const std::vector<double>& values,
                         const AuditConfig& config) {
    return config.tolerance > 0.0 ? config.tolerance : 1e-9 * max_amount(spec, values);
}

BidConvention resolve_convention(const MechanismSpec& spec, const AuditConfig& config) {
    if (config.convention) return *config.convention;
    return spec.kind == Mech::PostedPrice ? BidConvention::Clip : BidConvention::Truthful;
}

double clip_threshold(const MechanismSpec& spec) {
    switch (spec.kind) {
        case Mech::PostedPrice:
        case Mech::Eip1559:
            return spec.posted;
        case Mech::TiplessEip1559:
            return spec.posted + spec.sigma;
        default:
            return std::numeric_limits<double>::infinity();
    }
}

// Weight with which an included bid is at risk of later confirmation.
double risk_weight(const TfmOutcome& out, std::size_t i) {
    return std::max(out.included[i] - out.confirmed[i], 0.0);
}

}  // namespace

std::vector<Bid> honest_bids(const MechanismSpec& spec, const std::vector<double>& values,
                             const AuditConfig& config) {
    BidConvention conv = resolve_convention(spec, config);
    double thr = clip_threshold(spec);
    std::vector<Bid> bids;
    bids.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        if (v < 0.0) throw ValidationError("audit: values must be nonnegative");
        double b = conv == BidConvention::Clip && v >= thr ? thr : v;
        bids.push_back({static_cast<int>(i), b, false});
    }
    return bids;
}

std::vector<double> build_grid(const MechanismSpec& spec, const std::vector<double>& values,
                               const AuditConfig& config) {
    double tick = resolve_tick(spec, values, config);
    std::vector<double> pts{0.0};
    auto push = [&](double x) {
        if (x >= 0.0) pts.push_back(x);
        if (x - tick >= 0.0) pts.push_back(x - tick);
        pts.push_back(x + tick);
    };
    for (double v : values) push(v);
    std::vector<Bid> honest = honest_bids(spec, values, config);
    for (const Bid& b : honest) push(b.amount);
    if (spec.kind == Mech::PostedPrice || spec.kind == Mech::Eip1559) push(spec.posted);
    if (spec.kind == Mech::TiplessEip1559) {
        push(spec.posted);
        push(spec.posted + spec.sigma);
    }
    for (double x : config.extra_grid) push(x);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-15; }),
              pts.end());
    return pts;
}

DeviationReport audit_uic(const MechanismSpec& spec, const std::vector<double>& values,
                          const AuditConfig& config) {
    validate(spec);
    DeviationReport rep;
    rep.notion = "uic";
    rep.strict = config.strict;
    rep.gamma = config.gamma;

    std::vector<Bid> honest = honest_bids(spec, values, config);
    TfmOutcome honest_out = eval(spec, honest);
    std::vector<double> grid = build_grid(spec, values, config);
    double tol = resolve_tolerance(spec, values, config);

    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        double honest_u = honest_out.confirmed[i] * values[i] - honest_out.payments[i];
        std::vector<Bid> bids = honest;
        for (double z : grid) {
            bids[i].amount = z;
            TfmOutcome out = eval(spec, bids);
            double u = out.confirmed[i] * values[i] - out.payments[i];
            if (config.strict) {
                double would = values[i] - out.would_be_payment[i];
                u += config.gamma * risk_weight(out, i) * std::min(would, 0.0);
            }
            if (u - honest_u > best_gain) {
                best_gain = u - honest_u;
                rep.honest_utility = honest_u;
                rep.best_utility = u;
                rep.witness.actor = static_cast<int>(i);
                rep.witness.bids = bids;
                rep.witness.honest_inclusion = true;
            }
        }
    }
    rep.gain = best_gain > tol ? best_gain : 0.0;
    return rep;
}

namespace {

// Fake-value combinations with repetition, sizes 0..budget.
void for_each_fake_combo(const std::vector<double>& grid, int budget,
                         const std::function<void(const std::vector<double>&)>& fn) {
    std::vector<double> combo;
    fn(combo);
    std::function<void(std::size_t, int)> rec = [&](std::size_t start, int left) {
        if (left == 0) return;
        for (std::size_t g = start; g < grid.size(); ++g) {
            combo.push_back(grid[g]);
            fn(combo);
            rec(g, left - 1);
            combo.pop_back();
        }
    };
    rec(0, budget);
}

struct MinerEval {
    double utility = 0.0;
    std::vector<int> included;
};

// Miner utility of presenting `block` (indices into `profile`): revenue minus
// payments of the miner's own fakes, with the strict-mode confirmation risk of
// injected fakes charged at -would_be_payment.
double miner_utility(const MechanismSpec& spec, const std::vector<Bid>& profile,
                     const std::vector<int>& block, const AuditConfig& config,
                     TfmOutcome* out_ptr = nullptr) {
    std::vector<Bid> content;
    content.reserve(block.size());
    for (int idx : block) content.push_back(profile[static_cast<std::size_t>(idx)]);
    TfmOutcome out = eval_included(spec, content);
    double u = out.miner_revenue;
    for (std::size_t r = 0; r < content.size(); ++r) {
        if (!content[r].fake) continue;
        u -= out.payments[r];
        if (config.strict)
            u += config.gamma * risk_weight(out, r) * std::min(-out.would_be_payment[r], 0.0);
    }
    if (out_ptr) *out_ptr = std::move(out);
    return u;
}

}  // namespace

DeviationReport audit_mmic(const MechanismSpec& spec, const std::vector<Bid>& bids,
                           const AuditConfig& config) {
    validate(spec);
    if (bids.size() > 12)
        throw ValidationError("audit_mmic: too many bids for subset enumeration (max 12)");
    DeviationReport rep;
    rep.notion = "mmic";
    rep.strict = config.strict;
    rep.gamma = config.gamma;

    std::vector<double> amounts;
    for (const Bid& b : bids) amounts.push_back(b.amount);
    TfmOutcome honest_out = eval(spec, bids);
    rep.honest_utility = honest_out.miner_revenue;
    double tol = resolve_tolerance(spec, amounts, config);
    std::vector<double> grid = build_grid(spec, amounts, config);

    rep.best_utility = rep.honest_utility;
    std::size_t n = bids.size();
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        std::vector<int> base_block;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ULL << i)) base_block.push_back(static_cast<int>(i));
        if (base_block.size() > static_cast<std::size_t>(spec.block_size)) continue;
        for_each_fake_combo(grid, config.fake_budget, [&](const std::vector<double>& fakes) {
            if (base_block.size() + fakes.size() > static_cast<std::size_t>(spec.block_size))
                return;
            std::vector<Bid> profile = bids;
            std::vector<int> block = base_block;
            for (double f : fakes) {
                profile.push_back({static_cast<int>(profile.size()), f, true});
                block.push_back(static_cast<int>(profile.size()) - 1);
            }
            double u = miner_utility(spec, profile, block, config);
            if (u > rep.best_utility) {
                rep.best_utility = u;
                rep.witness.actor = -1;
                rep.witness.bids = profile;
                rep.witness.included = block;
                rep.witness.honest_inclusion = false;
            }
        });
    }
    rep.gain = rep.best_utility - rep.honest_utility;
    if (rep.gain <= tol) rep.gain = 0.0;
    return rep;
}

DeviationReport audit_oca(const MechanismSpec& spec, const std::vector<double>& values,
                          const AuditConfig& config) {
    validate(spec);
    if (values.size() > 8) throw ValidationError("audit_oca: too many users for enumeration (max 8)");
    if (config.cartel_size > static_cast<int>(values.size()))
        throw ValidationError("audit_oca: cartel size exceeds user count");
    DeviationReport rep;
    rep.notion = "oca";
    rep.strict = config.strict;
    rep.gamma = config.gamma;

    std::vector<Bid> honest = honest_bids(spec, values, config);
    TfmOutcome honest_out = eval(spec, honest);
    double tol = resolve_tolerance(spec, values, config);
    std::vector<double> grid = build_grid(spec, values, config);
    std::size_t n = values.size();

    auto joint_utility = [&](const std::vector<Bid>& profile, const std::vector<int>& block,
                             const std::vector<int>& cartel) {
        std::vector<Bid> content;
        content.reserve(block.size());
        for (int idx : block) content.push_back(profile[static_cast<std::size_t>(idx)]);
        TfmOutcome out = eval_included(spec, content);
        double joint = out.miner_revenue;
        for (std::size_t r = 0; r < content.size(); ++r) {
            const Bid& b = content[r];
            if (b.fake) {
                joint -= out.payments[r];
                if (config.strict)
                    joint += config.gamma * risk_weight(out, r) * std::min(-out.would_be_payment[r], 0.0);
            } else if (std::find(cartel.begin(), cartel.end(), b.bidder) != cartel.end()) {
                double v = values[static_cast<std::size_t>(b.bidder)];
                joint += out.confirmed[r] * v - out.payments[r];
                // would-be utility of a colluder's bid counts the slice of its
                // payment that flows back as miner revenue
                if (config.strict && b.amount != honest[static_cast<std::size_t>(b.bidder)].amount)
                    joint += config.gamma * risk_weight(out, r) *
                             std::min(v - out.would_be_payment[r] + out.would_be_miner_gain[r], 0.0);
            }
        }
        return joint;
    };

    double best_gain = 0.0;
    // cartels: the miner plus every user subset of size 0..cartel_size
    std::vector<std::vector<int>> cartels{{}};
    std::vector<int> combo;
    std::function<void(int, int)> gen = [&](int start, int left) {
        if (left == 0) return;
        for (int i = start; i < static_cast<int>(n); ++i) {
            combo.push_back(i);
            cartels.push_back(combo);
            gen(i + 1, left - 1);
            combo.pop_back();
        }
    };
    gen(0, config.cartel_size);

    for (const std::vector<int>& cartel : cartels) {
        double honest_joint = honest_out.miner_revenue;
        for (int j : cartel)
            honest_joint += honest_out.confirmed[static_cast<std::size_t>(j)] *
                                values[static_cast<std::size_t>(j)] -
                            honest_out.payments[static_cast<std::size_t>(j)];

        // assignments of grid bids to cartel members
        std::vector<std::size_t> pick(cartel.size(), 0);
        bool done = false;
        while (!done) {
            std::vector<Bid> profile = honest;
            for (std::size_t ci = 0; ci < cartel.size(); ++ci)
                profile[static_cast<std::size_t>(cartel[ci])].amount = grid[pick[ci]];
            for_each_fake_combo(grid, config.fake_budget, [&](const std::vector<double>& fakes) {
                std::vector<Bid> full = profile;
                for (double f : fakes) full.push_back({static_cast<int>(full.size()), f, true});
                std::size_t total = full.size();
                for (std::uint64_t mask = 0; mask < (1ULL << total); ++mask) {
                    std::vector<int> block;
                    bool skip = false;
                    for (std::size_t i = 0; i < total; ++i) {
                        if (mask & (1ULL << i)) {
                            block.push_back(static_cast<int>(i));
                            if (block.size() > static_cast<std::size_t>(spec.block_size)) {
                                skip = true;
                                break;
                            }
                        }
                    }
                    if (skip) continue;
                    double joint = joint_utility(full, block, cartel);
                    double gain = joint - honest_joint;
                    if (gain > best_gain) {
                        best_gain = gain;
                        rep.honest_utility = honest_joint;
                        rep.best_utility = joint;
                        rep.witness.actor = -1;
                        rep.witness.cartel = cartel;
                        rep.witness.bids = full;
                        rep.witness.included = block;
                        rep.witness.honest_inclusion = false;
                    }
                }
            });
            // advance the assignment odometer
            done = cartel.empty();
            for (std::size_t ci = 0; ci < cartel.size(); ++ci) {
                if (++pick[ci] < grid.size()) break;
                pick[ci] = 0;
                if (ci + 1 == cartel.size()) done = true;
            }
        }
        if (cartel.empty() && rep.witness.bids.empty()) {
            rep.honest_utility = honest_joint;
            rep.best_utility = honest_joint;
        }
    }
    rep.gain = best_gain <= tol ? 0.0 : best_gain;
    return rep;
}

double replay_witness(const MechanismSpec& spec, const DeviationReport& report,
                      const std::vector<double>& values, const AuditConfig& config) {
    const DeviationWitness& w = report.witness;
    AuditConfig cfg = config;
    cfg.strict = report.strict;
    cfg.gamma = report.gamma;
    if (report.notion == "uic") {
        TfmOutcome out = eval(spec, w.bids);
        std::size_t i = static_cast<std::size_t>(w.actor);
        double u = out.confirmed[i] * values[i] - out.payments[i];
        if (cfg.strict) {
            double would = values[i] - out.would_be_payment[i];
            u += cfg.gamma * risk_weight(out, i) * std::min(would, 0.0);
        }
        return u;
    }
    if (report.notion == "mmic") {
        return miner_utility(spec, w.bids, w.included, cfg);
    }
    if (report.notion == "oca") {
        std::vector<Bid> honest = honest_bids(spec, values, cfg);
        std::vector<Bid> content;
        for (int idx : w.included) content.push_back(w.bids[static_cast<std::size_t>(idx)]);
        TfmOutcome out = eval_included(spec, content);
        double joint = out.miner_revenue;
        for (std::size_t r = 0; r < content.size(); ++r) {
            const Bid& b = content[r];
            if (b.fake) {
                joint -= out.payments[r];
                if (cfg.strict)
                    joint += cfg.gamma * risk_weight(out, r) * std::min(-out.would_be_payment[r], 0.0);
            } else if (std::find(w.cartel.begin(), w.cartel.end(), b.bidder) != w.cartel.end()) {
                double v = values[static_cast<std::size_t>(b.bidder)];
                joint += out.confirmed[r] * v - out.payments[r];
                if (cfg.strict && b.amount != honest[static_cast<std::size_t>(b.bidder)].amount)
                    joint += cfg.gamma * risk_weight(out, r) *
                             std::min(v - out.would_be_payment[r] + out.would_be_miner_gain[r], 0.0);
            }
        }
        return joint;
    }
    throw ValidationError("replay_witness: unknown notion '" + report.notion + "'");
}

double min_confirming_bid_fn(const std::function<double(double)>& confirm, double value_cap,
                             double tick) {
    if (value_cap < 0.0) throw ValidationError("min_confirming_bid: cap must be nonnegative");
    const int n = 1024;
    std::vector<double> pts;
    for (int i = 0; i <= n; ++i) pts.push_back(value_cap * i / n);
    auto confirms = [&](double z) { return confirm(z) > 1e-12; };
    int first = -1, last = -1;
    std::vector<char> ok(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ok[i] = confirms(pts[i]) ? 1 : 0;
        if (ok[i] && first < 0) first = static_cast<int>(i);
        if (ok[i]) last = static_cast<int>(i);
    }
    if (first < 0) return kNoConfirmingBid;
    for (int i = first; i <= last; ++i)
        if (!ok[static_cast<std::size_t>(i)])
            throw ValidationError("min_confirming_bid: non-monotone confirmation");
    if (first == 0) return 0.0;
    double lo = pts[static_cast<std::size_t>(first - 1)], hi = pts[static_cast<std::size_t>(first)];
    while (hi - lo > tick) {
        double mid = 0.5 * (lo + hi);
        if (confirms(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double min_confirming_bid(const MechanismSpec& spec, const std::vector<double>& b_others,
                          double value_cap, double tick) {
    validate(spec);
    if (value_cap < 0.0) throw ValidationError("min_confirming_bid: cap must be nonnegative");
    if (tick <= 0.0) tick = 1e-3 * std::max(1.0, value_cap);
    AuditConfig cfg;
    cfg.tick = tick;
    std::vector<double> pts = build_grid(spec, b_others, cfg);
    pts.push_back(value_cap);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double x) { return x > value_cap; }),
              pts.end());
    auto confirms = [&](double z) { return confirm_prob(spec, b_others, z) > 1e-12; };
    int first = -1, last = -1;
    std::vector<char> ok(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ok[i] = confirms(pts[i]) ? 1 : 0;
        if (ok[i] && first < 0) first = static_cast<int>(i);
        if (ok[i]) last = static_cast<int>(i);
    }
    if (first < 0) return kNoConfirmingBid;
    for (int i = first; i <= last; ++i)
        if (!ok[static_cast<std::size_t>(i)])
            throw ValidationError("min_confirming_bid: non-monotone confirmation");
    if (first == 0) return pts[0];
    double lo = pts[static_cast<std::size_t>(first - 1)], hi = pts[static_cast<std::size_t>(first)];
    while (hi - lo > tick) {
        double mid = 0.5 * (lo + hi);
        if (confirms(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double discount_ratio(const MechanismSpec& spec, double v_i, const std::vector<double>& b_others,
                      const AuditConfig& config) {
    validate(spec);
    if (v_i < 0.0) throw ValidationError("discount_ratio: value must be nonnegative");
    double tick = config.tick > 0.0 ? config.tick : 1e-3 * std::max(v_i, max_amount(spec, b_others));
    double pstar = min_confirming_bid(spec, b_others, v_i, tick);
    if (pstar == kNoConfirmingBid || v_i < pstar) return 0.0;

    BidConvention conv = resolve_convention(spec, config);
    double thr = clip_threshold(spec);
    double truthful = conv == BidConvention::Clip && v_i >= thr ? thr : v_i;
    std::vector<Bid> bids;
    for (std::size_t i = 0; i < b_others.size(); ++i)
        bids.push_back({static_cast<int>(i), b_others[i], false});
    bids.push_back({static_cast<int>(b_others.size()), truthful, false});
    TfmOutcome out = eval(spec, bids);
    double conf = out.confirmed.back();
    if (conf <= 1e-12) return 0.0;
    double pt = out.would_be_payment.back();
    if (pt <= 0.0)
        throw ValidationError("discount_ratio: truthful payment is zero for a confirmed bid");
    double ratio = (pt - pstar) / pt;
    return std::clamp(ratio, 0.0, 1.0);
}

namespace {

// Monopolistic confirmation of a probe bid z against pre-sorted other bids
// (descending). O(n); the probe ranks after equal amounts.
bool monopolistic_confirms(const std::vector<double>& sorted_desc, int block_size, double z) {
    int n = static_cast<int>(sorted_desc.size());
    int pos = 0;
    while (pos < n && sorted_desc[static_cast<std::size_t>(pos)] >= z) pos++;
    int total = n + 1;
    int kstar = 0;
    double best = -1.0;
    int kmax = std::min(block_size, total);
    for (int k = 1; k <= kmax; ++k) {
        int idx = k - 1;
        double bk = idx < pos ? sorted_desc[static_cast<std::size_t>(idx)]
                              : (idx == pos ? z : sorted_desc[static_cast<std::size_t>(idx - 1)]);
        double v = k * bk;
        if (v > best + 1e-15) {
            best = v;
            kstar = k;
        }
    }
    return pos + 1 <= kstar;
}

double monopolistic_price(const std::vector<double>& sorted_desc, int block_size) {
    int n = static_cast<int>(sorted_desc.size());
    int kstar = 1;
    double best = -1.0;
    for (int k = 1; k <= std::min(block_size, n); ++k) {
        double v = k * sorted_desc[static_cast<std::size_t>(k - 1)];
        if (v > best + 1e-15) {
            best = v;
            kstar = k;
        }
    }
    return n > 0 ? sorted_desc[static_cast<std::size_t>(kstar - 1)] : 0.0;
}

}  // namespace

NearlyIcEstimate estimate_nearly_ic(const MechanismSpec& spec, ValueDist dist, int n, long trials,
                                    NearlyMode mode, NearlyKind kind, std::uint64_t seed) {
    validate(spec);
    if (n < 2) throw ValidationError("estimate_nearly_ic: need n >= 2");
    if (trials < 100) throw ValidationError("estimate_nearly_ic: need at least 100 trials");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto draw = [&]() {
        double u = uni(rng);
        return dist == ValueDist::Uniform01 ? u : -std::log1p(-u);
    };

    double sum = 0.0, sumsq = 0.0;
    std::vector<double> values(static_cast<std::size_t>(n));
    for (long t = 0; t < trials; ++t) {
        for (auto& v : values) v = draw();

        auto delta_for = [&](std::size_t j) -> double {
            std::vector<double> others;
            others.reserve(values.size() - 1);
            for (std::size_t i = 0; i < values.size(); ++i)
                if (i != j) others.push_back(values[i]);
            double vj = values[j];
            if (kind == NearlyKind::Strategic) {
                AuditConfig cfg;
                cfg.tick = 1e-3;
                std::vector<Bid> bids;
                for (std::size_t i = 0; i < others.size(); ++i)
                    bids.push_back({static_cast<int>(i), others[i], false});
                int self = static_cast<int>(others.size());
                bids.push_back({self, vj, false});
                TfmOutcome honest = eval(spec, bids);
                double honest_u =
                    honest.confirmed.back() * vj - honest.payments.back();
                double best = honest_u;
                // coarse grid: own value and each other bid, +- one tick
                std::vector<double> grid{0.0, vj, vj - cfg.tick, vj + cfg.tick};
                for (double b : others) {
                    grid.push_back(b);
                    grid.push_back(b - cfg.tick);
                    grid.push_back(b + cfg.tick);
                }
                for (double z : grid) {
                    if (z < 0.0) continue;
                    bids.back().amount = z;
                    TfmOutcome out = eval(spec, bids);
                    best = std::max(best, out.confirmed.back() * vj - out.payments.back());
                }
                return std::max(best - honest_u, 0.0);
            }
            // discount ratio
            if (spec.kind == Mech::Monopolistic) {
                std::vector<double> sorted = others;
                std::sort(sorted.begin(), sorted.end(), std::greater<double>());
                if (!monopolistic_confirms(sorted, spec.block_size, vj)) return 0.0;
                // p^t: price with truthful bid inserted
                std::vector<double> all = others;
                all.push_back(vj);
                std::sort(all.begin(), all.end(), std::greater<double>());
                double pt = monopolistic_price(all, spec.block_size);
                if (pt <= 0.0) return 0.0;
                double lo = 0.0, hi = vj;
                if (monopolistic_confirms(sorted, spec.block_size, 0.0)) return (pt - 0.0) / pt;
                for (int it = 0; it < 50 && hi - lo > 1e-9 * std::max(1.0, vj); ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (monopolistic_confirms(sorted, spec.block_size, mid))
                        hi = mid;
                    else
                        lo = mid;
                }
                double pstar = hi;
                if (vj < pstar) return 0.0;
                return std::clamp((pt - pstar) / pt, 0.0, 1.0);
            }
            AuditConfig cfg;
            return discount_ratio(spec, vj, others, cfg);
        };

        double d;
        if (mode == NearlyMode::Avg) {
            d = delta_for(0);
        } else {
            d = 0.0;
            for (std::size_t j = 0; j < values.size(); ++j) d = std::max(d, delta_for(j));
        }
        sum += d;
        sumsq += d * d;
    }
    NearlyIcEstimate est;
    est.trials = trials;
    est.mean = sum / static_cast<double>(trials);
    double var = std::max(0.0, sumsq / static_cast<double>(trials) - est.mean * est.mean);
    est.stderr_ = std::sqrt(var / static_cast<double>(trials));
    return est;
}

double alpha_costly_margin(const MechanismSpec& spec,
                           const std::vector<CostlyScenario>& scenarios) {
    validate(spec);
    double margin = std::numeric_limits<double>::infinity();
    bool any_confirmed = false;
    for (const CostlyScenario& sc : scenarios) {
        TfmOutcome honest = eval(spec, sc.real_bids);
        std::vector<Bid> with_fake = sc.real_bids;
        with_fake.push_back({static_cast<int>(with_fake.size()), sc.fake_amount, true});
        TfmOutcome out = eval(spec, with_fake);
        if (out.confirmed.back() <= 1e-12) continue;
        any_confirmed = true;
        double u_with = out.miner_revenue - out.payments.back();
        margin = std::min(margin, honest.miner_revenue - u_with);
    }
    if (!any_confirmed)
        throw ValidationError("alpha_costly_margin: no scenario confirms the fake bid");
    return margin;
}

std::string report_to_json(const DeviationReport& rep) {
    nlohmann::ordered_json j;
    j["notion"] = rep.notion;
    j["strict"] = rep.strict;
    if (rep.strict) j["gamma"] = rep.gamma;
    j["honest_utility"] = rep.honest_utility;
    j["best_utility"] = rep.best_utility;
    j["gain"] = rep.gain;
    nlohmann::ordered_json w;
    w["actor"] = rep.witness.actor;
    w["cartel"] = rep.witness.cartel;
    w["honest_inclusion"] = rep.witness.honest_inclusion;
    w["bids"] = nlohmann::ordered_json::array();
    for (const Bid& b : rep.witness.bids)
        w["bids"].push_back({{"bidder", b.bidder}, {"amount", b.amount}, {"fake", b.fake}});
    w["included"] = rep.witness.included;
    if (!rep.witness.note.empty()) w["note"] = rep.witness.note;
    j["witness"] = w;
    return j.dump(2);
}

}  // namespace feesim
