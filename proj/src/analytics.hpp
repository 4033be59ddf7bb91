#pragma once

#include <cstdint>
#include <functional>

#include "errors.hpp"

namespace feesim {

// Upper branch of the Lambert W function: w with w*e^w = x, w >= -1.
// Domain x >= -1/e (a small slack absorbs representation error at the branch
// point). Halley iteration, residual <= 1e-12 * max(1, |x|).
double lambert_w0(double x);

// Equilibrium undercutting claim function from the FunctionFork analysis:
//   f(x) = x                          for x <= g
//   f(x) = -W0(-g * e^(x - 2g))       for g < x < 2g - ln g - 1
//   f(x) = 1                          for x >= 2g - ln g - 1
// Requires g <= 1/2 and 2g - ln g >= 2.
double equilibrium_f(double x, double gamma);
void validate_equilibrium_gamma(double gamma);

struct SelfishParams {
    double alpha;  // hash share in (0, 0.5)
    double gamma;  // race-win probability in [0, 1]
    double beta;   // fee threshold > 0, or +inf for the plain selfish miner
};

struct WhaleParams {
    double chi_a;   // attacker share
    double chi_x;   // candidate miner share
    int z;          // deficit of the fork
    double delta;   // normalized whale fee (used by reward queries)
};

struct SelfishStateProbs {
    double p0;
    double p0_prime;
    std::function<double(int)> pj;  // j >= 1
};

SelfishStateProbs selfish_state_probs(double alpha);

// Expected relative reward of the withholding miner under the fee regime.
double selfish_reward_fees(double alpha, double gamma);

// Same under the fixed block-reward regime.
double selfish_reward_fixed(double alpha, double gamma);

// Value-threshold variant: expected relative reward with publish threshold beta.
double fee_selfish_reward(double alpha, double gamma, double beta);

// Beta maximizing fee_selfish_reward over (0, 50].
double optimal_beta(double alpha, double gamma);

// Probability a fork with relative power q overtakes a lead of z:
// min{1, q/p}^(z+1), p = 1 - q.
double whale_overtake_prob(double q, int z);

enum class WhaleVariant { Statement, Proof };

// Minimal whale fee delta at which joining the fork beats mining honestly.
// The two circulating forms of the threshold differ in the fork-success
// denominator (M + chi_x vs M - chi_x); both are provided for comparison.
double whale_delta_threshold(const WhaleParams& p, WhaleVariant variant);

// Expected rewards for miner X under both choices, given delta.
double whale_honest_reward(const WhaleParams& p);
double whale_fork_reward(const WhaleParams& p, WhaleVariant variant);

}  // namespace feesim
