#pragma once

#include "scar/scheduler_env.hpp"
#include "scar/state_compress.hpp"
#include "scar/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scar {

// one hidden layer, tanh activation, linear outputs
struct Mlp {
    Matrix w1; // hidden x in
    Vector b1;
    Matrix w2; // out x hidden
    Vector b2;

    static Mlp make(int in, int hidden, int out, Rng& rng);

    int in_dim() const { return static_cast<int>(w1.cols()); }
    int out_dim() const { return static_cast<int>(w2.rows()); }

    Vector forward(const Vector& x) const;

    struct Grads {
        Matrix w1;
        Vector b1;
        Matrix w2;
        Vector b2;
    };

    // gradients of a loss with the given dLoss/dOutput at input x
    Grads backward(const Vector& x, const Vector& dout) const;
    void step(const Grads& grads, double lr); // params -= lr * grads
};

enum class RlAlgorithm { Q, DoubleQ, Sarsa, Cacla1, Cacla2 };
std::string algorithm_name(RlAlgorithm algorithm);
RlAlgorithm algorithm_from_name(const std::string& name);

struct RlConfig {
    RlAlgorithm algorithm = RlAlgorithm::Cacla2;
    int hidden = 60;
    double discount = 0.9;
    double critic_lr = 0.005;
    double actor_lr = 0.001;
    int action_grid = 21; // alpha levels for the discrete algorithms
    double eps_start = 1.0;
    double eps_end = 0.05;
    double sigma_start = 0.3;
    double sigma_end = 0.02;
    // correlation time (TTIs) of the exploration noise. The throughput
    // averages respond over ~window TTIs, so a parameter perturbation has
    // to be held about that long before the reward reflects it.
    double explore_tau = 150.0;
    // per-TTI L2 shrink on the actor weight matrices (biases exempt).
    // alpha_prev/beta_prev are state features, so the actor sits in a
    // feedback loop with itself; unchecked weight growth can push the
    // loop gain past one and rail the policy.
    double actor_decay = 1e-4;
    // TTIs with the actor held still at the start of training while the
    // critic learns per-context baselines. Early actor steps against an
    // unresolved baseline credit epoch luck, not the action.
    long actor_warmup = 10000;
    long train_ttis = 50000;
    long eval_ttis = 5000;
    int eval_runs = 5;
};

struct Policy {
    RlAlgorithm algorithm = RlAlgorithm::Cacla2;
    int state_dim = 9;
    int action_grid = 21;
    Mlp critic;  // Q grid for the discrete algorithms, V for CACLA
    Mlp critic2; // Double Q twin (unused otherwise)
    Mlp actor;   // CACLA only
};

Policy make_policy(const RlConfig& config, int state_dim, Rng& rng);

// discrete action index -> alpha, uniform over [-1,1]
double grid_alpha(int index, int grid);

// greedy when rng is null; otherwise epsilon-greedy / Gaussian exploration
// with the given exploration level
FairnessParams policy_action(const Policy& policy, const Vector& state, double exploration,
                             Rng* rng, int* action_index = nullptr);

double reward_for(const RegionCheck& check);

double q_td_target(const Mlp& net, double reward, const Vector& next_state, double discount);
void q_value_update(Mlp& net, const Vector& state, int action, double target, double lr);
void cacla_update(Mlp& critic, Mlp& actor, const Vector& state, const Vector& action_taken,
                  double reward, const Vector& next_state, double discount, double critic_lr,
                  double actor_lr);

struct TrainResult {
    Policy policy;
    EpisodeLog log;
};

TrainResult train_controller(SchedulerEnv& env, const StateBuilder& builder,
                             const RlConfig& config, Rng& rng);

EpisodeLog evaluate_policy(SchedulerEnv& env, const StateBuilder& builder,
                           const Policy& policy, long ttis);

void save_policy(const std::string& path, const Policy& policy, const RlConfig& config);
Policy load_policy(const std::string& path, RlConfig* config_out = nullptr);

struct EvalRow {
    std::string algorithm;
    int m = 0;
    int k = 0;
    std::uint64_t seed = 0;
    RegionShares shares;
};

void save_eval_csv(const std::string& path, const std::vector<EvalRow>& rows);

} // namespace scar
