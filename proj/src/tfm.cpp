#include "tfm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace feesim {

namespace {

int floor_confirm_count(const MechanismSpec& s) {
    return static_cast<int>(std::floor(s.gamma * s.k / s.cartel_cap));
}

// Indices sorted by amount descending, ties by bidder id ascending.
std::vector<std::size_t> sorted_order(const std::vector<Bid>& bids) {
    std::vector<std::size_t> order(bids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (bids[a].amount != bids[b].amount) return bids[a].amount > bids[b].amount;
        return bids[a].bidder < bids[b].bidder;
    });
    return order;
}

void check_amounts(const std::vector<Bid>& bids) {
    for (const Bid& b : bids)
        if (b.amount < 0.0 || std::isnan(b.amount))
            throw ValidationError("tfm: bid amounts must be nonnegative");
}

}  // namespace

void validate(const MechanismSpec& s) {
    if (s.block_size < 1) throw ValidationError("tfm: block size must be >= 1");
    switch (s.kind) {
        case Mech::FirstPrice:
        case Mech::Monopolistic:
            break;
        case Mech::SecondPrice:
            if (s.k < 1 || s.k > s.block_size)
                throw ValidationError("tfm: second-price requires 1 <= k <= B");
            break;
        case Mech::PostedPrice:
            if (!(s.posted > 0.0)) throw ValidationError("tfm: posted price must be > 0");
            break;
        case Mech::Eip1559:
            if (s.posted < 0.0) throw ValidationError("tfm: base price must be >= 0");
            break;
        case Mech::TiplessEip1559:
            if (s.posted < 0.0) throw ValidationError("tfm: base price must be >= 0");
            if (s.sigma < 0.0) throw ValidationError("tfm: sigma must be >= 0");
            break;
        case Mech::BurningSecondPrice: {
            if (!(s.gamma > 0.0 && s.gamma <= 1.0))
                throw ValidationError("tfm: burning second-price gamma must be in (0,1]");
            if (s.cartel_cap < 1) throw ValidationError("tfm: cartel cap c must be >= 1");
            if (s.k < 1 || s.k > s.block_size)
                throw ValidationError("tfm: burning second-price requires 1 <= k <= B");
            if (floor_confirm_count(s) < 1)
                throw ValidationError("tfm: burning second-price requires floor(gamma*k/c) >= 1");
            // k' = B - k included-but-unconfirmed bids: at least one (so the
            // price b_{k+1} is a real bid) and few enough that burned >= 0
            if (s.block_size - s.k < 1)
                throw ValidationError("tfm: burning second-price requires k < B");
            if (s.block_size - s.k > floor_confirm_count(s))
                throw ValidationError("tfm: burning second-price requires B - k <= floor(gamma*k/c)");
            break;
        }
    }
}

std::string mech_name(Mech kind) {
    switch (kind) {
        case Mech::FirstPrice: return "first-price";
        case Mech::SecondPrice: return "second-price";
        case Mech::Monopolistic: return "monopolistic";
        case Mech::PostedPrice: return "posted-price";
        case Mech::Eip1559: return "eip1559";
        case Mech::TiplessEip1559: return "tipless-eip1559";
        case Mech::BurningSecondPrice: return "burning-second-price";
    }
    return "?";
}

Mech mech_from_string(const std::string& name) {
    for (Mech m : {Mech::FirstPrice, Mech::SecondPrice, Mech::Monopolistic, Mech::PostedPrice,
                   Mech::Eip1559, Mech::TiplessEip1559, Mech::BurningSecondPrice})
        if (mech_name(m) == name) return m;
    throw ValidationError("tfm: unknown mechanism '" + name + "'");
}

double TfmOutcome::total_payments() const {
    return std::accumulate(payments.begin(), payments.end(), 0.0);
}

namespace {

TfmOutcome make_outcome(std::size_t n) {
    TfmOutcome out;
    out.included.assign(n, 0.0);
    out.confirmed.assign(n, 0.0);
    out.payments.assign(n, 0.0);
    out.would_be_payment.assign(n, 0.0);
    out.would_be_miner_gain.assign(n, 0.0);
    return out;
}

// C/P/M on a block the miner assembled. `bids` is the block content.
TfmOutcome apply_rules(const MechanismSpec& s, const std::vector<Bid>& bids, EvalMode mode,
                       std::uint64_t seed) {
    check_amounts(bids);
    std::size_t n = bids.size();
    TfmOutcome out = make_outcome(n);
    std::vector<std::size_t> order = sorted_order(bids);
    auto amount_at_rank = [&](int rank) {  // 1-based, 0 beyond the block
        if (rank < 1 || rank > static_cast<int>(n)) return 0.0;
        return bids[order[static_cast<std::size_t>(rank - 1)]].amount;
    };
    for (std::size_t i = 0; i < n; ++i) out.included[i] = 1.0;

    switch (s.kind) {
        case Mech::FirstPrice: {
            for (std::size_t i = 0; i < n; ++i) {
                out.confirmed[i] = 1.0;
                out.payments[i] = bids[i].amount;
                out.would_be_payment[i] = bids[i].amount;
                out.would_be_miner_gain[i] = bids[i].amount;
                out.miner_revenue += bids[i].amount;
            }
            break;
        }
        case Mech::SecondPrice: {
            double price = amount_at_rank(s.k + 1);
            for (std::size_t r = 0; r < n; ++r) {
                std::size_t i = order[r];
                out.would_be_payment[i] = price;
                out.would_be_miner_gain[i] = price;
                if (static_cast<int>(r) < s.k) {
                    out.confirmed[i] = 1.0;
                    out.payments[i] = price;
                    out.miner_revenue += price;
                }
            }
            break;
        }
        case Mech::Monopolistic: {
            // miner's inclusion choice sets the uniform price: the lowest bid
            // in the block
            double price = n > 0 ? amount_at_rank(static_cast<int>(n)) : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                out.confirmed[i] = 1.0;
                out.payments[i] = price;
                out.would_be_payment[i] = price;
                out.would_be_miner_gain[i] = price;
                out.miner_revenue += price;
            }
            break;
        }
        case Mech::PostedPrice: {
            for (std::size_t i = 0; i < n; ++i) {
                out.would_be_payment[i] = s.posted;
                out.would_be_miner_gain[i] = s.posted;
                if (bids[i].amount == s.posted) {
                    out.confirmed[i] = 1.0;
                    out.payments[i] = s.posted;
                    out.miner_revenue += s.posted;
                }
            }
            break;
        }
        case Mech::Eip1559: {
            for (std::size_t i = 0; i < n; ++i) {
                out.would_be_payment[i] = bids[i].amount;
                out.would_be_miner_gain[i] = std::max(bids[i].amount - s.posted, 0.0);
                if (bids[i].amount >= s.posted) {
                    out.confirmed[i] = 1.0;
                    out.payments[i] = bids[i].amount;
                    out.miner_revenue += bids[i].amount - s.posted;
                }
            }
            break;
        }
        case Mech::TiplessEip1559: {
            double price = s.posted + s.sigma;
            for (std::size_t i = 0; i < n; ++i) {
                out.would_be_payment[i] = price;
                out.would_be_miner_gain[i] = s.sigma;
                if (bids[i].amount >= price) {
                    out.confirmed[i] = 1.0;
                    out.payments[i] = price;
                    out.miner_revenue += s.sigma;
                }
            }
            break;
        }
        case Mech::BurningSecondPrice: {
            int confirm_n = floor_confirm_count(s);
            double price = amount_at_rank(s.k + 1);
            int top = std::min<int>(s.k, static_cast<int>(n));
            for (int r = s.k; r < static_cast<int>(n); ++r)
                out.miner_revenue += s.gamma * bids[order[static_cast<std::size_t>(r)]].amount;
            for (int r = 0; r < static_cast<int>(n); ++r)
                out.would_be_payment[order[static_cast<std::size_t>(r)]] = price;
            if (mode == EvalMode::Expected) {
                double p_conf = static_cast<double>(confirm_n) / s.k;
                for (int r = 0; r < top; ++r) {
                    std::size_t i = order[static_cast<std::size_t>(r)];
                    out.confirmed[i] = p_conf;
                    out.payments[i] = p_conf * price;
                }
            } else {
                // uniform subset of confirm_n of the k top slots, on-chain
                // randomness stood in by the seeded generator
                std::vector<int> slots(static_cast<std::size_t>(s.k));
                std::iota(slots.begin(), slots.end(), 0);
                std::mt19937_64 rng(seed);
                for (int i = 0; i < confirm_n; ++i) {
                    std::uniform_int_distribution<int> pick(i, s.k - 1);
                    std::swap(slots[static_cast<std::size_t>(i)],
                              slots[static_cast<std::size_t>(pick(rng))]);
                }
                for (int i = 0; i < confirm_n; ++i) {
                    int r = slots[static_cast<std::size_t>(i)];
                    if (r < top) {
                        std::size_t idx = order[static_cast<std::size_t>(r)];
                        out.confirmed[idx] = 1.0;
                        out.payments[idx] = price;
                    }
                }
            }
            break;
        }
    }
    out.burned = out.total_payments() - out.miner_revenue;
    if (out.burned < 0.0 && out.burned > -1e-9) out.burned = 0.0;
    return out;
}

}  // namespace

TfmOutcome eval_included(const MechanismSpec& spec, const std::vector<Bid>& block, EvalMode mode,
                         std::uint64_t seed) {
    validate(spec);
    if (static_cast<int>(block.size()) > spec.block_size)
        throw ValidationError("tfm: block content exceeds block size");
    return apply_rules(spec, block, mode, seed);
}

TfmOutcome eval(const MechanismSpec& spec, const std::vector<Bid>& bids, EvalMode mode,
                std::uint64_t seed) {
    validate(spec);
    check_amounts(bids);
    std::vector<std::size_t> order = sorted_order(bids);

    // Inclusion rule I
    std::vector<std::size_t> included;
    switch (spec.kind) {
        case Mech::FirstPrice:
        case Mech::SecondPrice:
        case Mech::BurningSecondPrice: {
            for (std::size_t r = 0; r < order.size() && r < static_cast<std::size_t>(spec.block_size); ++r)
                included.push_back(order[r]);
            break;
        }
        case Mech::Monopolistic: {
            int n = static_cast<int>(bids.size());
            int kstar = 0;
            double best = -1.0;
            for (int k = 1; k <= std::min(spec.block_size, n); ++k) {
                double v = k * bids[order[static_cast<std::size_t>(k - 1)]].amount;
                if (v > best + 1e-15) {
                    best = v;
                    kstar = k;
                }
            }
            for (int r = 0; r < kstar; ++r) included.push_back(order[static_cast<std::size_t>(r)]);
            break;
        }
        case Mech::PostedPrice: {
            // any B bids that equal p; lowest bidder id first
            std::vector<std::size_t> eligible;
            for (std::size_t i = 0; i < bids.size(); ++i)
                if (bids[i].amount == spec.posted) eligible.push_back(i);
            std::sort(eligible.begin(), eligible.end(),
                      [&](std::size_t a, std::size_t b) { return bids[a].bidder < bids[b].bidder; });
            for (std::size_t r = 0; r < eligible.size() && r < static_cast<std::size_t>(spec.block_size); ++r)
                included.push_back(eligible[r]);
            break;
        }
        case Mech::Eip1559: {
            for (std::size_t r = 0; r < order.size(); ++r) {
                if (included.size() >= static_cast<std::size_t>(spec.block_size)) break;
                if (bids[order[r]].amount >= spec.posted) included.push_back(order[r]);
            }
            break;
        }
        case Mech::TiplessEip1559: {
            // eligibility threshold, then lowest bidder id: bids buy no priority
            std::vector<std::size_t> eligible;
            for (std::size_t i = 0; i < bids.size(); ++i)
                if (bids[i].amount >= spec.posted + spec.sigma) eligible.push_back(i);
            std::sort(eligible.begin(), eligible.end(),
                      [&](std::size_t a, std::size_t b) { return bids[a].bidder < bids[b].bidder; });
            for (std::size_t r = 0; r < eligible.size() && r < static_cast<std::size_t>(spec.block_size); ++r)
                included.push_back(eligible[r]);
            break;
        }
    }

    std::vector<Bid> block;
    block.reserve(included.size());
    for (std::size_t i : included) block.push_back(bids[i]);
    TfmOutcome inner = apply_rules(spec, block, mode, seed);

    TfmOutcome out = make_outcome(bids.size());
    out.miner_revenue = inner.miner_revenue;
    out.burned = inner.burned;
    for (std::size_t r = 0; r < included.size(); ++r) {
        std::size_t i = included[r];
        out.included[i] = inner.included[r];
        out.confirmed[i] = inner.confirmed[r];
        out.payments[i] = inner.payments[r];
        out.would_be_payment[i] = inner.would_be_payment[r];
        out.would_be_miner_gain[i] = inner.would_be_miner_gain[r];
    }
    return out;
}

TfmOutcome eval_first_price(const std::vector<Bid>& bids, int block_size) {
    MechanismSpec s;
    s.kind = Mech::FirstPrice;
    s.block_size = block_size;
    return eval(s, bids);
}

TfmOutcome eval_second_price(const std::vector<Bid>& bids, int block_size, int k) {
    MechanismSpec s;
    s.kind = Mech::SecondPrice;
    s.block_size = block_size;
    s.k = k;
    return eval(s, bids);
}

TfmOutcome eval_monopolistic(const std::vector<Bid>& bids, int block_size) {
    MechanismSpec s;
    s.kind = Mech::Monopolistic;
    s.block_size = block_size;
    return eval(s, bids);
}

TfmOutcome eval_posted_price(const std::vector<Bid>& bids, int block_size, double p) {
    MechanismSpec s;
    s.kind = Mech::PostedPrice;
    s.block_size = block_size;
    s.posted = p;
    return eval(s, bids);
}

TfmOutcome eval_eip1559(const std::vector<Bid>& bids, int block_size, double p) {
    MechanismSpec s;
    s.kind = Mech::Eip1559;
    s.block_size = block_size;
    s.posted = p;
    return eval(s, bids);
}

TfmOutcome eval_tipless_eip1559(const std::vector<Bid>& bids, int block_size, double p,
                                double sigma) {
    MechanismSpec s;
    s.kind = Mech::TiplessEip1559;
    s.block_size = block_size;
    s.posted = p;
    s.sigma = sigma;
    return eval(s, bids);
}

TfmOutcome eval_burning_second_price(const std::vector<Bid>& bids, int block_size, int k,
                                     double gamma, double c, std::uint64_t seed, EvalMode mode) {
    MechanismSpec s;
    s.kind = Mech::BurningSecondPrice;
    s.block_size = block_size;
    s.k = k;
    s.gamma = gamma;
    s.cartel_cap = static_cast<int>(c);
    return eval(s, bids, mode, seed);
}

double confirm_prob(const MechanismSpec& spec, const std::vector<double>& b_others, double z) {
    std::vector<Bid> bids;
    bids.reserve(b_others.size() + 1);
    for (std::size_t i = 0; i < b_others.size(); ++i)
        bids.push_back({static_cast<int>(i), b_others[i], false});
    int probe = static_cast<int>(b_others.size());
    bids.push_back({probe, z, false});
    TfmOutcome out = eval(spec, bids, EvalMode::Expected);
    return out.confirmed.back();
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double myerson_payment(const std::function<double(double)>& allocation, double b_i,
                       bool randomized) {
    if (b_i < 0.0) throw ValidationError("myerson_payment: bid must be nonnegative");
    const int grid_n = 64;
    double prev = allocation(0.0);
    for (int i = 1; i <= grid_n; ++i) {
        double x = b_i * i / grid_n;
        double v = allocation(x);
        if (v < prev - 1e-9)
            throw ValidationError("myerson_payment: allocation rule is not monotone");
        prev = v;
    }
    if (!randomized) {
        if (allocation(b_i) < 0.5) return 0.0;
        if (allocation(0.0) >= 0.5) return 0.0;
        double lo = 0.0, hi = b_i;
        while (hi - lo > 1e-9) {
            double mid = 0.5 * (lo + hi);
            if (allocation(mid) >= 0.5)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
    if (b_i == 0.0) return 0.0;
    double fa = allocation(0.0), fb = allocation(b_i), fm = allocation(0.5 * b_i);
    double whole = b_i / 6.0 * (fa + 4.0 * fm + fb);
    double integral = adaptive_simpson(allocation, 0.0, b_i, fa, fm, fb, whole, 1e-8, 40);
    return b_i * allocation(b_i) - integral;
}

MechanismSpec mechanism_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("mechanism: invalid JSON: ") + e.what());
    }
    MechanismSpec s;
    if (!j.contains("kind")) throw ValidationError("mechanism: missing field 'kind'");
    s.kind = mech_from_string(j["kind"].get<std::string>());
    s.block_size = j.value("B", 1);
    s.k = j.value("k", s.block_size);
    s.posted = j.value("p", 0.0);
    s.sigma = j.value("sigma", 0.0);
    s.gamma = j.value("gamma", 1.0);
    s.cartel_cap = j.value("c", 1);
    validate(s);
    return s;
}

std::vector<Bid> bids_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("bids: invalid JSON: ") + e.what());
    }
    const nlohmann::json& arr = j.is_object() && j.contains("bids") ? j["bids"] : j;
    if (!arr.is_array()) throw ValidationError("bids: expected an array");
    std::vector<Bid> bids;
    for (const auto& e : arr) {
        Bid b;
        if (e.is_number()) {
            b.bidder = static_cast<int>(bids.size());
            b.amount = e.get<double>();
        } else {
            b.bidder = e.value("bidder", static_cast<int>(bids.size()));
            b.amount = e.at("amount").get<double>();
            b.fake = e.value("fake", false);
        }
        bids.push_back(b);
    }
    return bids;
}

std::string outcome_to_json(const MechanismSpec& spec, const std::vector<Bid>& bids,
                            const TfmOutcome& out) {
    nlohmann::ordered_json j;
    j["mechanism"] = mech_name(spec.kind);
    j["bids"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < bids.size(); ++i) {
        j["bids"].push_back({{"bidder", bids[i].bidder},
                             {"amount", bids[i].amount},
                             {"included", out.included[i]},
                             {"confirmed", out.confirmed[i]},
                             {"payment", out.payments[i]}});
    }
    j["miner_revenue"] = out.miner_revenue;
    j["burned"] = out.burned;
    return j.dump(2);
}

std::string outcome_to_csv(const std::vector<Bid>& bids, const TfmOutcome& out) {
    std::ostringstream os;
    os << "bidder,amount,included,confirmed,payment\n";
    char buf[160];
    for (std::size_t i = 0; i < bids.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g\n", bids[i].bidder,
                      bids[i].amount, out.included[i], out.confirmed[i], out.payments[i]);
        os << buf;
    }
    return os.str();
}

}  // namespace feesim
