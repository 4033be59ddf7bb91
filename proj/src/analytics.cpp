#include "analytics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace feesim {

namespace {
constexpr double kInvE = 0.36787944117144233;  // 1/e
}

double lambert_w0(double x) {
    if (std::isnan(x)) throw ValidationError("lambert_w0: NaN input");
    if (x < -kInvE - 1e-12) throw ValidationError("lambert_w0: argument below -1/e");
    if (x <= -kInvE) return -1.0;
    if (x == 0.0) return 0.0;

    double w;
    double p2 = 2.0 * (std::exp(1.0) * x + 1.0);
    if (p2 <= 0.0) return -1.0;
    double p = std::sqrt(p2);
    if (p < 1e-4) {
        // branch-point series; error O(p^4)
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    if (x < 1.0) {
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else {
        w = std::log(x);
        w -= std::log(w);
    }

    for (int it = 0; it < 60; ++it) {
        double ew = std::exp(w);
        double f = w * ew - x;
        if (std::abs(f) <= 1e-13 * std::max(1.0, std::abs(x))) break;
        double wp1 = w + 1.0;
        double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        w -= f / denom;
    }
    return w;
}

void validate_equilibrium_gamma(double gamma) {
    if (!(gamma > 0.0) || gamma > 0.5)
        throw ValidationError("equilibrium_f: gamma must be in (0, 1/2]");
    if (2.0 * gamma - std::log(gamma) < 2.0)
        throw ValidationError("equilibrium_f: gamma must satisfy 2*gamma - ln(gamma) >= 2");
}

double equilibrium_f(double x, double gamma) {
    validate_equilibrium_gamma(gamma);
    if (x < 0.0) throw ValidationError("equilibrium_f: x must be nonnegative");
    double upper = 2.0 * gamma - std::log(gamma) - 1.0;
    if (x <= gamma) return x;
    if (x >= upper) return 1.0;
    double arg = -gamma * std::exp(x - 2.0 * gamma);
    // W0 has a square-root singularity at -1/e; rounding of `arg` within a few
    // ulps of the branch point would otherwise smear the breakpoint value
    if (arg <= -kInvE + 4e-16) return 1.0;
    return -lambert_w0(arg);
}

namespace {
void check_alpha(double alpha, const char* who) {
    if (!(alpha > 0.0 && alpha < 0.5))
        throw ValidationError(std::string(who) + ": alpha must be in (0, 0.5)");
}
void check_gamma01(double gamma, const char* who) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ValidationError(std::string(who) + ": gamma must be in [0, 1]");
}
}  // namespace

SelfishStateProbs selfish_state_probs(double alpha) {
    check_alpha(alpha, "selfish_state_probs");
    double d = 2.0 * alpha * alpha * alpha - 4.0 * alpha * alpha + 1.0;
    SelfishStateProbs out;
    out.p0 = (1.0 - 2.0 * alpha) / d;
    out.p0_prime = (1.0 - alpha) * (alpha - 2.0 * alpha * alpha) / d;
    out.pj = [alpha, d](int j) {
        if (j < 1) throw ValidationError("selfish_state_probs: pj requires j >= 1");
        return std::pow(alpha / (1.0 - alpha), j - 1) * alpha * (1.0 - 2.0 * alpha) / d;
    };
    return out;
}

double selfish_reward_fees(double alpha, double gamma) {
    check_alpha(alpha, "selfish_reward_fees");
    check_gamma01(gamma, "selfish_reward_fees");
    double a = alpha, a2 = a * a, a3 = a2 * a, a4 = a3 * a, a5 = a4 * a;
    double num = 5.0 * a2 - 12.0 * a3 + 9.0 * a4 - 2.0 * a5 +
                 gamma * (a - 4.0 * a2 + 6.0 * a3 - 5.0 * a4 + 2.0 * a5);
    double den = 2.0 * a3 - 4.0 * a2 + 1.0;
    return num / den;
}

double selfish_reward_fixed(double alpha, double gamma) {
    check_alpha(alpha, "selfish_reward_fixed");
    check_gamma01(gamma, "selfish_reward_fixed");
    double a = alpha;
    double num = a * (1.0 - a) * (1.0 - a) * (4.0 * a + gamma * (1.0 - 2.0 * a)) - a * a * a;
    double den = 1.0 - a * (1.0 + (2.0 - a) * a);
    return num / den;
}

double fee_selfish_reward(double alpha, double gamma, double beta) {
    check_alpha(alpha, "fee_selfish_reward");
    check_gamma01(gamma, "fee_selfish_reward");
    if (!(beta > 0.0)) throw ValidationError("fee_selfish_reward: beta must be > 0");
    double a = alpha;
    double first;
    double tail = 5.0 * a + (1.0 - a) * (1.0 - a) * gamma + 2.0 * a * a / (1.0 - 2.0 * a) - 2.0 * a * a;
    if (std::isinf(beta)) {
        first = tail;  // the (e^beta - 1)^-1 term vanishes
    } else {
        first = (1.0 + beta * (1.0 - a) * (1.0 - a) * (1.0 - gamma)) / std::expm1(beta) + tail;
    }
    double em = std::isinf(beta) ? 0.0 : std::exp(-beta);
    double one_minus_em = std::isinf(beta) ? 1.0 : -std::expm1(-beta);
    double second = a * (1.0 - 2.0 * a) * one_minus_em /
                    (1.0 - 2.0 * em * a - 3.0 * one_minus_em * a * a);
    return first * second;
}

double optimal_beta(double alpha, double gamma) {
    check_alpha(alpha, "optimal_beta");
    check_gamma01(gamma, "optimal_beta");
    // coarse scan, then golden-section refinement on the bracketing interval
    const int n = 5000;
    double best_b = 1e-4, best_v = -1.0;
    int best_i = 0;
    for (int i = 0; i <= n; ++i) {
        double b = 1e-4 + (50.0 - 1e-4) * i / n;
        double v = fee_selfish_reward(alpha, gamma, b);
        if (v > best_v) {
            best_v = v;
            best_b = b;
            best_i = i;
        }
    }
    double lo = 1e-4 + (50.0 - 1e-4) * std::max(0, best_i - 1) / n;
    double hi = 1e-4 + (50.0 - 1e-4) * std::min(n, best_i + 1) / n;
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = fee_selfish_reward(alpha, gamma, c), fd = fee_selfish_reward(alpha, gamma, d);
    while (b - a > 1e-10) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = fee_selfish_reward(alpha, gamma, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = fee_selfish_reward(alpha, gamma, d);
        }
    }
    double mid = 0.5 * (a + b);
    return fee_selfish_reward(alpha, gamma, mid) >= best_v ? mid : best_b;
}

double whale_overtake_prob(double q, int z) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("whale_overtake_prob: q must be in (0,1)");
    if (z < 0) throw ValidationError("whale_overtake_prob: z must be >= 0");
    double ratio = q / (1.0 - q);
    return std::pow(std::min(1.0, ratio), z + 1);
}

namespace {
void check_whale(const WhaleParams& p) {
    if (!(p.chi_a > 0.0 && p.chi_a < 1.0) || !(p.chi_x > 0.0 && p.chi_x < 1.0))
        throw ValidationError("whale: shares must be in (0,1)");
    if (p.chi_a + p.chi_x >= 1.0)
        throw ValidationError("whale: degenerate shares (chi_a + chi_x >= 1)");
    if (p.z < 0) throw ValidationError("whale: z must be >= 0");
}
}  // namespace

double whale_honest_reward(const WhaleParams& p) {
    check_whale(p);
    double m = 1.0 - p.chi_a;
    double az = std::pow(std::min(1.0, p.chi_a / m), p.z + 1);
    return (1.0 - az) * p.chi_x / m;
}

double whale_fork_reward(const WhaleParams& p, WhaleVariant variant) {
    check_whale(p);
    double m = 1.0 - p.chi_a;
    double q = p.chi_a + p.chi_x;
    double denom = variant == WhaleVariant::Proof ? (m - p.chi_x) : (m + p.chi_x);
    double az = std::pow(std::min(1.0, q / denom), p.z + 1);
    return az * p.chi_x / q * (1.0 + p.delta);
}

double whale_delta_threshold(const WhaleParams& p, WhaleVariant variant) {
    check_whale(p);
    double m = 1.0 - p.chi_a;
    double q = p.chi_a + p.chi_x;
    double denom = variant == WhaleVariant::Proof ? (m - p.chi_x) : (m + p.chi_x);
    double az_fork = std::pow(std::min(1.0, q / denom), p.z + 1);
    double az_honest = std::pow(std::min(1.0, p.chi_a / m), p.z + 1);
    // solve az_fork * chi_x/q * (1+delta) = (1 - az_honest) * chi_x / m
    return (1.0 - az_honest) / m * q / az_fork - 1.0;
}

}  // namespace feesim
