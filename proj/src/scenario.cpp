#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "analytics.hpp"
#include "audit.hpp"
#include "json.hpp"
#include "sim.hpp"
#include "tfm.hpp"

namespace feesim {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* artifact_version() { return "0.1.0"; }

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void write_file(const std::string& out_dir, const std::string& filename,
                const std::string& content) {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    std::ofstream f(out_dir + "/" + filename, std::ios::binary);
    if (!f) throw RuntimeError("cannot write " + out_dir + "/" + filename);
    f << content;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return text.empty() ? json::object() : json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(what + ": invalid JSON: " + e.what());
    }
}

double get_num(const json& j, const std::string& field) {
    if (!j.contains(field)) throw ValidationError("missing required param '" + field + "'");
    if (!j[field].is_number()) throw ValidationError("param '" + field + "' must be a number");
    return j[field].get<double>();
}

// ---- analytic formula registry -------------------------------------------

struct Formula {
    std::vector<std::string> args;
    std::function<double(const std::vector<double>&)> fn;
};

const std::map<std::string, Formula>& formula_table() {
    static const std::map<std::string, Formula> table = {
        {"lambert_w0", {{"x"}, [](const std::vector<double>& a) { return lambert_w0(a[0]); }}},
        {"equilibrium_f",
         {{"x", "gamma"}, [](const std::vector<double>& a) { return equilibrium_f(a[0], a[1]); }}},
        {"selfish_reward_fees",
         {{"alpha", "gamma"},
          [](const std::vector<double>& a) { return selfish_reward_fees(a[0], a[1]); }}},
        {"selfish_reward_fixed",
         {{"alpha", "gamma"},
          [](const std::vector<double>& a) { return selfish_reward_fixed(a[0], a[1]); }}},
        {"fee_selfish_reward",
         {{"alpha", "gamma", "beta"},
          [](const std::vector<double>& a) { return fee_selfish_reward(a[0], a[1], a[2]); }}},
        {"optimal_beta",
         {{"alpha", "gamma"},
          [](const std::vector<double>& a) { return optimal_beta(a[0], a[1]); }}},
        {"whale_overtake_prob",
         {{"q", "z"},
          [](const std::vector<double>& a) {
              return whale_overtake_prob(a[0], static_cast<int>(a[1]));
          }}},
        {"whale_delta_threshold_statement",
         {{"chi_a", "chi_x", "z"},
          [](const std::vector<double>& a) {
              return whale_delta_threshold({a[0], a[1], static_cast<int>(a[2]), 0.0},
                                           WhaleVariant::Statement);
          }}},
        {"whale_delta_threshold_proof",
         {{"chi_a", "chi_x", "z"},
          [](const std::vector<double>& a) {
              return whale_delta_threshold({a[0], a[1], static_cast<int>(a[2]), 0.0},
                                           WhaleVariant::Proof);
          }}},
        {"selfish_p0",
         {{"alpha"}, [](const std::vector<double>& a) { return selfish_state_probs(a[0]).p0; }}},
        {"selfish_p0_prime",
         {{"alpha"},
          [](const std::vector<double>& a) { return selfish_state_probs(a[0]).p0_prime; }}},
        {"selfish_pj",
         {{"alpha", "j"},
          [](const std::vector<double>& a) {
              return selfish_state_probs(a[0]).pj(static_cast<int>(a[1]));
          }}},
    };
    return table;
}

// Evaluates a formula over the cartesian product of per-argument value lists.
std::pair<std::string, ojson> run_analytic(const json& params) {
    if (!params.contains("formula")) throw ValidationError("analytic: missing param 'formula'");
    std::string name = params["formula"].get<std::string>();
    auto it = formula_table().find(name);
    if (it == formula_table().end())
        throw ValidationError("analytic: unknown formula '" + name + "'");
    const Formula& f = it->second;

    std::vector<std::vector<double>> axes;
    for (const std::string& arg : f.args) {
        if (!params.contains(arg)) throw ValidationError("analytic: missing param '" + arg + "'");
        const json& v = params[arg];
        std::vector<double> axis;
        if (v.is_array())
            for (const auto& e : v) axis.push_back(e.get<double>());
        else
            axis.push_back(v.get<double>());
        if (axis.empty()) throw ValidationError("analytic: empty grid for '" + arg + "'");
        axes.push_back(std::move(axis));
    }

    std::ostringstream csv;
    for (std::size_t i = 0; i < f.args.size(); ++i) csv << f.args[i] << ",";
    csv << "value\n";
    ojson rows = ojson::array();
    std::vector<std::size_t> idx(axes.size(), 0);
    bool done = false;
    while (!done) {
        std::vector<double> args;
        for (std::size_t i = 0; i < axes.size(); ++i) args.push_back(axes[i][idx[i]]);
        double value = f.fn(args);
        ojson row;
        for (std::size_t i = 0; i < f.args.size(); ++i) {
            row[f.args[i]] = args[i];
            csv << fmt(args[i]) << ",";
        }
        row["value"] = value;
        csv << fmt(value) << "\n";
        rows.push_back(row);
        done = true;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (++idx[i] < axes[i].size()) {
                done = false;
                break;
            }
            idx[i] = 0;
        }
        if (idx.empty()) done = true;
    }
    ojson out;
    out["formula"] = name;
    out["rows"] = rows;
    return {csv.str(), out};
}

// ---- audit scenario -------------------------------------------------------

AuditConfig audit_config_from_json(const json& params) {
    AuditConfig cfg;
    cfg.gamma = params.value("gamma", 1.0);
    cfg.strict = params.value("strict", false);
    cfg.cartel_size = params.value("cartel_size", 1);
    cfg.fake_budget = params.value("fake_budget", 1);
    cfg.tick = params.value("tick", 0.0);
    cfg.tolerance = params.value("tolerance", 0.0);
    if (params.contains("convention")) {
        std::string c = params["convention"].get<std::string>();
        if (c == "truthful")
            cfg.convention = BidConvention::Truthful;
        else if (c == "clip")
            cfg.convention = BidConvention::Clip;
        else
            throw ValidationError("audit: unknown convention '" + c + "'");
    }
    if (params.contains("grid_ticks"))
        cfg.tick = params["grid_ticks"].get<double>();
    return cfg;
}

std::pair<std::string, ojson> run_audit(const json& params) {
    if (!params.contains("mechanism")) throw ValidationError("audit: missing param 'mechanism'");
    MechanismSpec spec = mechanism_from_json(params["mechanism"].dump());
    if (!params.contains("notion")) throw ValidationError("audit: missing param 'notion'");
    std::string notion = params["notion"].get<std::string>();
    AuditConfig cfg = audit_config_from_json(params);

    DeviationReport rep;
    if (notion == "uic" || notion == "oca") {
        if (!params.contains("values")) throw ValidationError("audit: missing param 'values'");
        std::vector<double> values = params["values"].get<std::vector<double>>();
        rep = notion == "uic" ? audit_uic(spec, values, cfg) : audit_oca(spec, values, cfg);
    } else if (notion == "mmic") {
        if (!params.contains("bids")) throw ValidationError("audit: missing param 'bids'");
        std::vector<Bid> bids = bids_from_json(params["bids"].dump());
        rep = audit_mmic(spec, bids, cfg);
    } else {
        throw ValidationError("audit: unknown notion '" + notion + "' (use uic|mmic|oca)");
    }
    ojson j = ojson::parse(report_to_json(rep));
    std::ostringstream csv;
    csv << "notion,strict,gamma,honest_utility,best_utility,gain\n";
    csv << rep.notion << "," << (rep.strict ? 1 : 0) << "," << fmt(rep.gamma) << ","
        << fmt(rep.honest_utility) << "," << fmt(rep.best_utility) << "," << fmt(rep.gain) << "\n";
    return {csv.str(), j};
}

// ---- sim scenario ---------------------------------------------------------

std::pair<std::string, ojson> run_sim_scenario(const json& params, std::uint64_t seed,
                                               bool seed_explicit) {
    std::string mode = params.value("mode", "run");
    if (mode == "whale-walk") {
        double q = get_num(params, "q");
        int z = static_cast<int>(get_num(params, "z"));
        long trials = static_cast<long>(params.value("trials", 100000.0));
        double freq = run_whale_walk(q, z, trials, seed);
        double exact = whale_overtake_prob(q, z);
        ojson j{{"q", q}, {"z", z}, {"trials", trials}, {"mc", freq}, {"exact", exact}};
        std::ostringstream csv;
        csv << "q,z,trials,mc,exact\n"
            << fmt(q) << "," << z << "," << trials << "," << fmt(freq) << "," << fmt(exact) << "\n";
        return {csv.str(), j};
    }
    if (mode == "selfish-estimate") {
        double alpha = get_num(params, "alpha");
        double gamma = params.value("gamma", 0.0);
        double beta = params.contains("beta") && !params["beta"].is_null()
                          ? params["beta"].get<double>()
                          : std::numeric_limits<double>::infinity();
        long n_blocks = static_cast<long>(params.value("n_blocks", 200000.0));
        double share = estimate_selfish_reward(alpha, gamma, beta, n_blocks, seed);
        double closed = std::isinf(beta) ? selfish_reward_fees(alpha, gamma)
                                         : fee_selfish_reward(alpha, gamma, beta);
        ojson j{{"alpha", alpha}, {"gamma", gamma},
                {"beta", std::isinf(beta) ? ojson(nullptr) : ojson(beta)},
                {"n_blocks", n_blocks}, {"mc_share", share}, {"closed_form", closed}};
        std::ostringstream csv;
        csv << "alpha,gamma,beta,n_blocks,mc_share,closed_form\n"
            << fmt(alpha) << "," << fmt(gamma) << ","
            << (std::isinf(beta) ? "inf" : fmt(beta)) << "," << n_blocks << "," << fmt(share)
            << "," << fmt(closed) << "\n";
        return {csv.str(), j};
    }
    if (!params.contains("config")) throw ValidationError("sim: missing param 'config'");
    SimConfig cfg = sim_config_from_json(params["config"].dump());
    // an explicit scenario-level seed wins over one in the config document
    if (seed_explicit || !params["config"].contains("seed")) cfg.seed = seed;
    if (mode == "mining-gap") {
        int bins = static_cast<int>(params.value("bins", 12.0));
        double width = params.value("bin_width", 0.0);
        std::vector<GapBin> profile = mining_gap_profile(cfg, bins, width);
        ojson j = ojson::array();
        for (const GapBin& b : profile)
            j.push_back({{"lo", b.lo},
                         {"hi", b.hi},
                         {"avg_backlog", b.avg_backlog},
                         {"profit_rate", b.profit_rate},
                         {"time_in_bin", b.time_in_bin}});
        return {gap_profile_to_csv(profile), ojson{{"bins", j}}};
    }
    if (mode != "run") throw ValidationError("sim: unknown mode '" + mode + "'");
    SimReport rep = run_sim(cfg);
    return {sim_report_to_csv(rep), ojson::parse(sim_report_to_json(rep))};
}

// ---- tfm scenario ---------------------------------------------------------

std::pair<std::string, ojson> run_tfm(const json& params, std::uint64_t seed) {
    if (!params.contains("mechanism")) throw ValidationError("tfm: missing param 'mechanism'");
    MechanismSpec spec = mechanism_from_json(params["mechanism"].dump());
    if (!params.contains("bids")) throw ValidationError("tfm: missing param 'bids'");
    std::vector<Bid> bids = bids_from_json(params["bids"].dump());
    std::string mode = params.value("mode", "expected");
    EvalMode em;
    if (mode == "expected")
        em = EvalMode::Expected;
    else if (mode == "seeded")
        em = EvalMode::Seeded;
    else
        throw ValidationError("tfm: unknown mode '" + mode + "' (use expected|seeded)");
    TfmOutcome out = eval(spec, bids, em, seed);
    return {outcome_to_csv(bids, out), ojson::parse(outcome_to_json(spec, bids, out))};
}

}  // namespace

// ---- reproduce: scenario battery -------------------------------------------

namespace {

struct Table1Row {
    std::string name;
    MechanismSpec spec;
    std::vector<std::vector<double>> value_sets;   // for UIC / OCA
    BidConvention uic_convention = BidConvention::Truthful;
    bool nash_baseline = false;   // low-demand rows: honest = bid the base fee (a Nash)
    bool weak_row = false;        // audited under gamma-strict at the mech gamma
    bool nearly_uic = false;      // monopolistic: decay estimate backs the cell
};

struct CellResult {
    std::string status;  // pass | fail | nearly | weak | nash | error
    double gain = 0.0;
    std::string detail;
};

MechanismSpec mech(Mech kind, int B, int k = 1, double p = 0.0, double sigma = 0.0,
                   double gamma = 1.0, int c = 1) {
    MechanismSpec s;
    s.kind = kind;
    s.block_size = B;
    s.k = k;
    s.posted = p;
    s.sigma = sigma;
    s.gamma = gamma;
    s.cartel_cap = c;
    return s;
}

std::vector<Table1Row> table1_rows() {
    std::vector<Table1Row> rows;
    {
        Table1Row r{"first-price", mech(Mech::FirstPrice, 2), {{10, 2, 1}, {7, 5, 3, 1}}};
        rows.push_back(r);
    }
    {
        Table1Row r{"second-price", mech(Mech::SecondPrice, 4, 3), {{10, 9, 8, 3}, {6, 5, 2}}};
        rows.push_back(r);
    }
    {
        Table1Row r{"monopolistic", mech(Mech::Monopolistic, 4), {{10, 9, 7, 3}}};
        r.nearly_uic = true;
        rows.push_back(r);
    }
    {
        Table1Row r{"posted-price", mech(Mech::PostedPrice, 2, 1, 10.0),
                    {{12, 11, 5, 0}, {5, 0, 0, 0}}};
        r.uic_convention = BidConvention::Clip;
        rows.push_back(r);
    }
    {
        Table1Row r{"eip1559-low", mech(Mech::Eip1559, 3, 1, 5.0), {{16, 10, 3}, {9, 4}}};
        r.uic_convention = BidConvention::Clip;
        r.nash_baseline = true;
        rows.push_back(r);
    }
    {
        Table1Row r{"eip1559-high", mech(Mech::Eip1559, 3, 1, 5.0), {{16, 10, 10, 10}, {9, 8, 7, 6}}};
        rows.push_back(r);
    }
    {
        // values avoid (p, p+sigma): a colluder strictly inside that band would
        // hand the miner the tip and break the low-demand OCA cell
        Table1Row r{"tipless-eip1559-low", mech(Mech::TiplessEip1559, 3, 1, 5.0, 1.0),
                    {{16, 10, 3}, {8, 4}}};
        r.uic_convention = BidConvention::Clip;
        r.nash_baseline = true;
        rows.push_back(r);
    }
    {
        Table1Row r{"tipless-eip1559-high", mech(Mech::TiplessEip1559, 2, 1, 5.0, 1.0),
                    {{16, 10, 8}, {12, 9, 7, 6.5}}};
        rows.push_back(r);
    }
    {
        Table1Row r{"burning-second-price", mech(Mech::BurningSecondPrice, 3, 2, 0.0, 0.0, 0.8, 1),
                    {{10, 9, 8, 7}, {12, 6, 5, 4}}};
        r.weak_row = true;
        rows.push_back(r);
    }
    return rows;
}

CellResult audit_cell(const Table1Row& row, const std::string& notion, long nearly_trials,
                      std::uint64_t seed) {
    CellResult cell;
    try {
        double worst_gain = 0.0;
        for (const std::vector<double>& values : row.value_sets) {
            AuditConfig cfg;
            cfg.convention = row.uic_convention;
            if (row.weak_row) {
                cfg.strict = true;
                cfg.gamma = row.spec.gamma;
            }
            DeviationReport rep;
            if (notion == "uic")
                rep = audit_uic(row.spec, values, cfg);
            else if (notion == "mmic")
                rep = audit_mmic(row.spec, honest_bids(row.spec, values, cfg), cfg);
            else
                rep = audit_oca(row.spec, values, cfg);
            worst_gain = std::max(worst_gain, rep.gain);
        }
        cell.gain = worst_gain;
        if (row.weak_row) {
            cell.status = worst_gain == 0.0 ? "weak" : "fail";
            return cell;
        }
        if (notion == "uic" && row.nearly_uic) {
            // plain deviations exist; the cell is "nearly" when the average
            // discount ratio decays with the market size
            if (worst_gain == 0.0) {
                cell.status = "pass";
                return cell;
            }
            std::vector<int> ns{16, 64, 256, 1024};
            std::vector<double> means;
            for (int n : ns) {
                MechanismSpec s = row.spec;
                s.block_size = n;
                NearlyIcEstimate est = estimate_nearly_ic(s, ValueDist::Uniform01, n,
                                                          nearly_trials, NearlyMode::Avg,
                                                          NearlyKind::Discount, seed);
                means.push_back(est.mean);
            }
            bool decreasing = true;
            for (std::size_t i = 1; i < means.size(); ++i)
                if (means[i] > means[i - 1] + 1e-9) decreasing = false;
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (std::size_t i = 0; i < ns.size(); ++i) {
                double x = std::log(ns[i]), y = std::log(std::max(means[i], 1e-12));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            double m = static_cast<double>(ns.size());
            double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            cell.detail = "decay slope " + fmt(slope);
            cell.status = decreasing && slope <= -0.3 ? "nearly" : "fail";
            return cell;
        }
        if (worst_gain == 0.0)
            cell.status = row.nash_baseline && notion == "uic" ? "nash" : "pass";
        else
            cell.status = "fail";
    } catch (const std::exception& e) {
        cell.status = "error";
        cell.detail = e.what();
    }
    return cell;
}

std::pair<std::string, ojson> reproduce_table1(const json& overrides) {
    long nearly_trials = static_cast<long>(overrides.value("nearly_trials", 500.0));
    std::uint64_t seed = overrides.value("seed", 7ULL);
    std::vector<Table1Row> rows = table1_rows();
    ojson jrows = ojson::array();
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "mechanism,uic,mmic,oca\n";
    for (const Table1Row& row : rows) {
        ojson jr;
        jr["mechanism"] = row.name;
        ojson cells;
        csv << row.name;
        for (const std::string notion : {"uic", "mmic", "oca"}) {
            CellResult c = audit_cell(row, notion, nearly_trials, seed);
            ojson jc{{"status", c.status}, {"max_gain", c.gain}};
            if (!c.detail.empty()) jc["detail"] = c.detail;
            cells[notion] = jc;
            csv << "," << c.status;
        }
        csv << "\n";
        jr["cells"] = cells;
        jrows.push_back(jr);
    }
    ojson out;
    out["scenario"] = "table1";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["rows"] = jrows;
    return {csv.str(), out};
}

// Replays of the propositions' literal numeric witnesses.
std::pair<std::string, ojson> reproduce_counterexamples(const json& overrides) {
    std::uint64_t seed = overrides.value("seed", 7ULL);
    ojson rows = ojson::array();
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "name,mechanism,notion,honest,deviant,strict_deviant,gain,strict_gain\n";
    auto emit = [&](const std::string& name, const std::string& mech_str,
                    const std::string& notion, double honest, double deviant,
                    double strict_deviant) {
        rows.push_back({{"name", name},
                        {"mechanism", mech_str},
                        {"notion", notion},
                        {"honest", honest},
                        {"deviant", deviant},
                        {"strict_deviant", strict_deviant},
                        {"gain", deviant - honest},
                        {"strict_gain", strict_deviant - honest}});
        csv << name << "," << mech_str << "," << notion << "," << fmt(honest) << ","
            << fmt(deviant) << "," << fmt(strict_deviant) << "," << fmt(deviant - honest) << ","
            << fmt(strict_deviant - honest) << "\n";
    };

    {
        // first-price: v1=10 shades to 3 against bids (2, 1), B=2
        std::vector<Bid> honest{{0, 10, false}, {1, 2, false}, {2, 1, false}};
        std::vector<Bid> dev{{0, 3, false}, {1, 2, false}, {2, 1, false}};
        TfmOutcome oh = eval_first_price(honest, 2);
        TfmOutcome od = eval_first_price(dev, 2);
        double uh = oh.confirmed[0] * 10.0 - oh.payments[0];
        double ud = od.confirmed[0] * 10.0 - od.payments[0];
        emit("first-price-user-shading", "first-price", "uic", uh, ud, ud);
    }
    {
        // second-price MMIC: (10,9,8,3), k=3, B=4; fake bid 7
        std::vector<Bid> bids{{0, 10, false}, {1, 9, false}, {2, 8, false}, {3, 3, false}};
        TfmOutcome oh = eval_second_price(bids, 4, 3);
        std::vector<Bid> withfake = bids;
        withfake.push_back({4, 7, true});
        TfmOutcome od = eval_second_price(withfake, 4, 3);
        double dev = od.miner_revenue;  // the fake is included but unconfirmed
        double strict_dev = dev + std::min(-od.would_be_payment[4], 0.0);
        emit("second-price-fake-bid", "second-price", "mmic", oh.miner_revenue, dev, strict_dev);
    }
    {
        // second-price OCA: miner + bidder 4 (v4 = 3) raising the bid to 7
        std::vector<Bid> honest{{0, 10, false}, {1, 9, false}, {2, 8, false}, {3, 3, false}};
        std::vector<Bid> dev = honest;
        dev[3].amount = 7;
        TfmOutcome oh = eval_second_price(honest, 4, 3);
        TfmOutcome od = eval_second_price(dev, 4, 3);
        double v4 = 3.0;
        double jh = oh.miner_revenue + oh.confirmed[3] * v4 - oh.payments[3];
        double jd = od.miner_revenue + od.confirmed[3] * v4 - od.payments[3];
        // the raised bid is included-unconfirmed: would-be utility counts the
        // payment coming back as the cartel miner's revenue
        double risk = std::min(v4 - od.would_be_payment[3] + od.would_be_miner_gain[3], 0.0);
        double jstrict = jd + (od.included[3] - od.confirmed[3]) * risk;
        emit("second-price-cartel", "second-price", "oca", jh, jd, jstrict);
    }
    {
        // monopolistic OCA: (10,9,7,3); bidder 3 (v=7) raises to 8
        std::vector<Bid> honest{{0, 10, false}, {1, 9, false}, {2, 7, false}, {3, 3, false}};
        std::vector<Bid> dev = honest;
        dev[2].amount = 8;
        TfmOutcome oh = eval_monopolistic(honest, 4);
        TfmOutcome od = eval_monopolistic(dev, 4);
        double v3 = 7.0;
        double jh = oh.miner_revenue + oh.confirmed[2] * v3 - oh.payments[2];
        double jd = od.miner_revenue + od.confirmed[2] * v3 - od.payments[2];
        emit("monopolistic-cartel", "monopolistic", "oca", jh, jd, jd);
    }
    {
        // posted price p=10, v=(5,0,0,0): cartel user 1 bids the posted price
        std::vector<Bid> honest{{0, 5, false}, {1, 0, false}, {2, 0, false}, {3, 0, false}};
        std::vector<Bid> dev = honest;
        dev[0].amount = 10;
        TfmOutcome oh = eval_posted_price(honest, 2, 10.0);
        TfmOutcome od = eval_posted_price(dev, 2, 10.0);
        double v1 = 5.0;
        double jh = oh.miner_revenue + oh.confirmed[0] * v1 - oh.payments[0];
        double jd = od.miner_revenue + od.confirmed[0] * v1 - od.payments[0];
        emit("posted-price-cartel", "posted-price", "oca", jh, jd, jd);
    }
    {
        // EIP-1559 high demand: p=5, B=3, v=(16,10,10,10); v1 bids 11
        std::vector<Bid> honest{{0, 16, false}, {1, 10, false}, {2, 10, false}, {3, 10, false}};
        std::vector<Bid> dev = honest;
        dev[0].amount = 11;
        TfmOutcome oh = eval_eip1559(honest, 3, 5.0);
        TfmOutcome od = eval_eip1559(dev, 3, 5.0);
        double uh = oh.confirmed[0] * 16.0 - oh.payments[0];
        double ud = od.confirmed[0] * 16.0 - od.payments[0];
        emit("eip1559-user-shading", "eip1559", "uic", uh, ud, ud);
    }
    {
        // EIP-1559 fake-bid cost: p=5, B=3, bids (16,10) plus a fake 12
        std::vector<Bid> real{{0, 16, false}, {1, 10, false}};
        MechanismSpec s = mech(Mech::Eip1559, 3, 1, 5.0);
        double margin = alpha_costly_margin(s, {{real, 12.0}});
        rows.push_back({{"name", "eip1559-fake-cost"},
                        {"mechanism", "eip1559"},
                        {"notion", "alpha-costly"},
                        {"margin", margin},
                        {"posted", 5.0}});
        csv << "eip1559-fake-cost,eip1559,alpha-costly," << fmt(margin) << ",,,,\n";
    }

    ojson out;
    out["scenario"] = "counterexamples";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["rows"] = rows;
    return {csv.str(), out};
}

std::pair<std::string, ojson> reproduce_selfish_curve(const json& overrides) {
    long n_blocks = static_cast<long>(overrides.value("n_blocks", 200000.0));
    std::uint64_t seed = overrides.value("seed", 11ULL);
    std::vector<double> alphas{0.1, 0.2, 1.0 / 3.0, 0.4};
    std::vector<double> gammas{0.0, 0.5, 1.0};
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "alpha,gamma,closed_form,mc,abs_diff\n";
    ojson rows = ojson::array();
    for (double a : alphas) {
        for (double g : gammas) {
            double cf = selfish_reward_fees(a, g);
            double mc = estimate_selfish_reward(a, g, std::numeric_limits<double>::infinity(),
                                                n_blocks, seed);
            csv << fmt(a) << "," << fmt(g) << "," << fmt(cf) << "," << fmt(mc) << ","
                << fmt(std::abs(cf - mc)) << "\n";
            rows.push_back({{"alpha", a},
                            {"gamma", g},
                            {"closed_form", cf},
                            {"mc", mc},
                            {"abs_diff", std::abs(cf - mc)}});
        }
    }
    ojson out;
    out["scenario"] = "selfish-curve";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["n_blocks"] = n_blocks;
    out["rows"] = rows;
    return {csv.str(), out};
}

std::pair<std::string, ojson> reproduce_fee_selfish_curve(const json& overrides) {
    long n_blocks = static_cast<long>(overrides.value("n_blocks", 200000.0));
    std::uint64_t seed = overrides.value("seed", 13ULL);
    double alpha = overrides.value("alpha", 1.0 / 3.0);
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "gamma,beta_star,formula,mc,ratio_vs_honest,abs_diff\n";
    ojson rows = ojson::array();
    for (int i = 0; i <= 10; ++i) {
        double g = i / 10.0;
        double bstar = optimal_beta(alpha, g);
        double formula = fee_selfish_reward(alpha, g, bstar);
        double mc = estimate_selfish_reward(alpha, g, bstar, n_blocks, seed + i);
        csv << fmt(g) << "," << fmt(bstar) << "," << fmt(formula) << "," << fmt(mc) << ","
            << fmt(formula / alpha) << "," << fmt(std::abs(formula - mc)) << "\n";
        rows.push_back({{"gamma", g},
                        {"beta_star", bstar},
                        {"formula", formula},
                        {"mc", mc},
                        {"ratio_vs_honest", formula / alpha},
                        {"abs_diff", std::abs(formula - mc)}});
    }
    ojson out;
    out["scenario"] = "fee-selfish-curve";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["alpha"] = alpha;
    out["n_blocks"] = n_blocks;
    out["rows"] = rows;
    return {csv.str(), out};
}

std::pair<std::string, ojson> reproduce_whale_threshold(const json& overrides) {
    long trials = static_cast<long>(overrides.value("trials", 400000.0));
    std::uint64_t seed = overrides.value("seed", 17ULL);
    struct Point {
        double chi_a, chi_x;
        int z;
    };
    std::vector<Point> points{{0.3, 0.1, 2}, {0.25, 0.15, 2}, {0.2, 0.1, 3}};
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "chi_a,chi_x,z,delta_statement,delta_proof,delta_mc,selected,"
           "rel_err_statement,rel_err_proof\n";
    ojson rows = ojson::array();
    for (const Point& p : points) {
        WhaleAdjudication adj = adjudicate_whale_variant(p.chi_a, p.chi_x, p.z, trials, seed);
        csv << fmt(p.chi_a) << "," << fmt(p.chi_x) << "," << p.z << ","
            << fmt(adj.delta_statement) << "," << fmt(adj.delta_proof) << "," << fmt(adj.delta_mc)
            << "," << adj.selected << "," << fmt(adj.rel_err_statement) << ","
            << fmt(adj.rel_err_proof) << "\n";
        rows.push_back({{"chi_a", p.chi_a},
                        {"chi_x", p.chi_x},
                        {"z", p.z},
                        {"delta_statement", adj.delta_statement},
                        {"delta_proof", adj.delta_proof},
                        {"delta_mc", adj.delta_mc},
                        {"selected", adj.selected},
                        {"rel_err_statement", adj.rel_err_statement},
                        {"rel_err_proof", adj.rel_err_proof}});
    }
    ojson out;
    out["scenario"] = "whale-threshold";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["trials"] = trials;
    out["rows"] = rows;
    return {csv.str(), out};
}

std::pair<std::string, ojson> reproduce_undercut_equilibrium(const json& overrides) {
    std::uint64_t seed = overrides.value("seed", 19ULL);
    int grid_n = static_cast<int>(overrides.value("grid", 10000.0));
    std::vector<double> gammas{0.1, 0.15, 0.2};
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << "\n";
    csv << "gamma,upper_breakpoint,continuity_low,continuity_high,monotone,max_step_down\n";
    ojson rows = ojson::array();
    for (double g : gammas) {
        double upper = 2.0 * g - std::log(g) - 1.0;
        double c_low = std::abs(equilibrium_f(g, g) - g);
        double c_high = std::abs(equilibrium_f(upper, g) - 1.0);
        double span = upper * 1.1;
        double prev = equilibrium_f(0.0, g);
        double worst = 0.0;
        for (int i = 1; i <= grid_n; ++i) {
            double x = span * i / grid_n;
            double f = equilibrium_f(x, g);
            worst = std::max(worst, prev - f);
            prev = f;
        }
        bool monotone = worst <= 1e-12;
        csv << fmt(g) << "," << fmt(upper) << "," << fmt(c_low) << "," << fmt(c_high) << ","
            << (monotone ? 1 : 0) << "," << fmt(worst) << "\n";
        rows.push_back({{"gamma", g},
                        {"upper_breakpoint", upper},
                        {"continuity_low", c_low},
                        {"continuity_high", c_high},
                        {"monotone", monotone},
                        {"max_step_down", worst}});
    }
    ojson out;
    out["scenario"] = "undercut-equilibrium";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["rows"] = rows;
    return {csv.str(), out};
}

std::pair<std::string, ojson> reproduce_mining_gap(const json& overrides) {
    std::uint64_t seed = overrides.value("seed", 23ULL);
    long n_blocks = static_cast<long>(overrides.value("n_blocks", 200000.0));
    double kappa = overrides.value("kappa", 0.35);
    SimConfig cfg;
    cfg.miners.push_back({"honest", StrategyKind::Honest, 1.0,
                          std::numeric_limits<double>::infinity(), {}});
    cfg.fee_rate = 5.0;
    cfg.fee_value = {FeeValueDist::Kind::Fixed, 0.2};  // arrival value rate 1
    cfg.block_rate = 1.0;
    cfg.mining_cost_rate = kappa;
    cfg.horizon = {Horizon::Kind::Blocks, static_cast<double>(n_blocks)};
    cfg.seed = seed;
    int bins = static_cast<int>(overrides.value("bins", 12.0));
    double width = overrides.value("bin_width", 0.1);
    std::vector<GapBin> profile = mining_gap_profile(cfg, bins, width);
    double t_star = kappa / (cfg.fee_rate * cfg.fee_value.param * cfg.block_rate);
    std::ostringstream csv;
    csv << "# seed=" << seed << " version=" << artifact_version() << " t_star=" << fmt(t_star)
        << "\n";
    csv << gap_profile_to_csv(profile);
    ojson jbins = ojson::array();
    for (const GapBin& b : profile)
        jbins.push_back({{"lo", b.lo},
                         {"hi", b.hi},
                         {"avg_backlog", b.avg_backlog},
                         {"profit_rate", b.profit_rate},
                         {"time_in_bin", b.time_in_bin}});
    ojson out;
    out["scenario"] = "mining-gap";
    out["seed"] = seed;
    out["version"] = artifact_version();
    out["kappa"] = kappa;
    out["t_star"] = t_star;
    out["bins"] = jbins;
    return {csv.str(), out};
}

std::pair<std::string, ojson> dispatch_reproduce(const std::string& name, const json& overrides) {
    if (name == "table1") return reproduce_table1(overrides);
    if (name == "counterexamples") return reproduce_counterexamples(overrides);
    if (name == "selfish-curve") return reproduce_selfish_curve(overrides);
    if (name == "fee-selfish-curve") return reproduce_fee_selfish_curve(overrides);
    if (name == "whale-threshold") return reproduce_whale_threshold(overrides);
    if (name == "undercut-equilibrium") return reproduce_undercut_equilibrium(overrides);
    if (name == "mining-gap") return reproduce_mining_gap(overrides);
    throw ValidationError("reproduce: unknown scenario '" + name +
                          "' (table1, counterexamples, selfish-curve, fee-selfish-curve, "
                          "whale-threshold, undercut-equilibrium, mining-gap)");
}

ojson run_one_scenario(const json& sc, const std::string& out_dir) {
    if (!sc.contains("kind")) throw ValidationError("scenario: missing field 'kind'");
    std::string kind = sc["kind"].get<std::string>();
    std::string name = sc.value("name", kind);
    std::uint64_t seed = sc.value("seed", 0ULL);
    json params = sc.value("params", json::object());
    // a scenario may name its own output directory
    std::string dir = sc.value("out", out_dir);

    std::pair<std::string, ojson> result;  // csv, json
    if (kind == "sim")
        result = run_sim_scenario(params, seed, sc.contains("seed"));
    else if (kind == "analytic")
        result = run_analytic(params);
    else if (kind == "tfm")
        result = run_tfm(params, seed);
    else if (kind == "audit")
        result = run_audit(params);
    else if (kind == "reproduce") {
        std::string target = params.value("scenario", params.value("name", ""));
        if (target.empty()) throw ValidationError("reproduce: missing param 'scenario'");
        json overrides = params.value("overrides", json::object());
        if (!overrides.contains("seed") && sc.contains("seed")) overrides["seed"] = seed;
        result = dispatch_reproduce(target, overrides);
    } else {
        throw ValidationError("scenario: unknown kind '" + kind +
                              "' (sim, analytic, tfm, audit, reproduce)");
    }

    ojson envelope;
    envelope["name"] = name;
    envelope["kind"] = kind;
    envelope["seed"] = seed;
    envelope["version"] = artifact_version();
    envelope["report"] = result.second;
    envelope["csv"] = result.first;
    write_file(dir, name + ".csv", result.first);
    write_file(dir, name + ".json", envelope.dump(2) + "\n");
    return envelope;
}

}  // namespace

std::string run_scenario_json(const std::string& scenario_json, const std::string& out_dir) {
    json doc = parse_json(scenario_json, "scenario");
    ojson out;
    if (doc.contains("scenarios")) {
        std::vector<std::string> seen;
        ojson results = ojson::array();
        for (const auto& sc : doc["scenarios"]) {
            std::string nm = sc.value("name", sc.value("kind", ""));
            if (std::find(seen.begin(), seen.end(), nm) != seen.end())
                throw ValidationError("scenario: duplicate name '" + nm + "'");
            seen.push_back(nm);
            results.push_back(run_one_scenario(sc, out_dir));
        }
        out["results"] = results;
    } else {
        out = run_one_scenario(doc, out_dir);
    }
    return out.dump(2);
}

std::string reproduce(const std::string& name, const std::string& overrides_json,
                      const std::string& out_dir) {
    json overrides = parse_json(overrides_json, "overrides");
    std::pair<std::string, ojson> result = dispatch_reproduce(name, overrides);
    ojson envelope;
    envelope["name"] = name;
    envelope["kind"] = "reproduce";
    envelope["seed"] = result.second.value("seed", 0ULL);
    envelope["version"] = artifact_version();
    envelope["report"] = result.second;
    envelope["csv"] = result.first;
    write_file(out_dir, name + ".csv", result.first);
    write_file(out_dir, name + ".json", envelope.dump(2) + "\n");
    return envelope.dump(2);
}

}  // namespace feesim
