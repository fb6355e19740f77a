#include "scar/rl_control.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scar {

Mlp Mlp::make(int in, int hidden, int out, Rng& rng) {
    if (in < 1 || hidden < 1 || out < 1)
        throw std::invalid_argument("Mlp::make: bad layer sizes");
    Mlp net;
    net.w1.resize(hidden, in);
    net.b1 = Vector::Zero(hidden);
    net.w2.resize(out, hidden);
    net.b2 = Vector::Zero(out);
    for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
        for (Eigen::Index c = 0; c < net.w1.cols(); ++c)
            net.w1(r, c) = rng.uniform(-0.1, 0.1);
    for (Eigen::Index r = 0; r < net.w2.rows(); ++r)
        for (Eigen::Index c = 0; c < net.w2.cols(); ++c)
            net.w2(r, c) = rng.uniform(-0.1, 0.1);
    return net;
}

Vector Mlp::forward(const Vector& x) const {
    if (x.size() != w1.cols()) throw std::invalid_argument("Mlp::forward: input size mismatch");
    const Vector h = (w1 * x + b1).array().tanh();
    return w2 * h + b2;
}

Mlp::Grads Mlp::backward(const Vector& x, const Vector& dout) const {
    if (x.size() != w1.cols() || dout.size() != w2.rows())
        throw std::invalid_argument("Mlp::backward: size mismatch");
    const Vector h = (w1 * x + b1).array().tanh();
    Grads g;
    g.w2 = dout * h.transpose();
    g.b2 = dout;
    const Vector dh = (w2.transpose() * dout).array() * (1.0 - h.array().square());
    g.w1 = dh * x.transpose();
    g.b1 = dh;
    return g;
}

void Mlp::step(const Grads& grads, double lr) {
    w1 -= lr * grads.w1;
    b1 -= lr * grads.b1;
    w2 -= lr * grads.w2;
    b2 -= lr * grads.b2;
}

std::string algorithm_name(RlAlgorithm algorithm) {
    switch (algorithm) {
    case RlAlgorithm::Q: return "Q";
    case RlAlgorithm::DoubleQ: return "DOUBLEQ";
    case RlAlgorithm::Sarsa: return "SARSA";
    case RlAlgorithm::Cacla1: return "CACLA1";
    case RlAlgorithm::Cacla2: return "CACLA2";
    }
    throw std::invalid_argument("algorithm_name: unknown algorithm");
}

RlAlgorithm algorithm_from_name(const std::string& name) {
    if (name == "Q") return RlAlgorithm::Q;
    if (name == "DOUBLEQ") return RlAlgorithm::DoubleQ;
    if (name == "SARSA") return RlAlgorithm::Sarsa;
    if (name == "CACLA1") return RlAlgorithm::Cacla1;
    if (name == "CACLA2") return RlAlgorithm::Cacla2;
    throw std::invalid_argument("algorithm_from_name: unknown algorithm " + name);
}

namespace {
double clamp_action(double x) { return std::clamp(x, -1.0, 1.0); }

bool is_discrete(RlAlgorithm a) {
    return a == RlAlgorithm::Q || a == RlAlgorithm::DoubleQ || a == RlAlgorithm::Sarsa;
}

int greedy_index(const Mlp& critic, const Mlp* critic2, const Vector& state) {
    Vector q = critic.forward(state);
    if (critic2) q += critic2->forward(state);
    int best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i)
        if (q[i] > q[best]) best = static_cast<int>(i);
    return best;
}
} // namespace

double grid_alpha(int index, int grid) {
    if (grid < 2) throw std::invalid_argument("grid_alpha: grid must have >= 2 points");
    if (index < 0 || index >= grid) throw std::out_of_range("grid_alpha: index outside grid");
    return -1.0 + 2.0 * static_cast<double>(index) / static_cast<double>(grid - 1);
}

Policy make_policy(const RlConfig& config, int state_dim, Rng& rng) {
    Policy p;
    p.algorithm = config.algorithm;
    p.state_dim = state_dim;
    p.action_grid = config.action_grid;
    if (is_discrete(config.algorithm)) {
        p.critic = Mlp::make(state_dim, config.hidden, config.action_grid, rng);
        if (config.algorithm == RlAlgorithm::DoubleQ)
            p.critic2 = Mlp::make(state_dim, config.hidden, config.action_grid, rng);
    } else {
        p.critic = Mlp::make(state_dim, config.hidden, 1, rng);
        const int actions = config.algorithm == RlAlgorithm::Cacla2 ? 2 : 1;
        p.actor = Mlp::make(state_dim, config.hidden, actions, rng);
        // start at proportional fair: (0.8, 0.8) allocates identically to
        // (1, 1) because only beta/alpha orders the argmax, and it keeps the
        // exploration noise off the box boundary where clamping would bias
        // the CACLA pull. A random start sits in capped-reward territory
        // with no gradient to follow.
        p.actor.b2.setConstant(0.8);
        // near-zero initial state gain; see actor_decay
        p.actor.w1 *= 0.05;
        p.actor.w2 *= 0.05;
    }
    return p;
}

FairnessParams policy_action(const Policy& policy, const Vector& state, double exploration,
                             Rng* rng, int* action_index) {
    FairnessParams params{1.0, 1.0};
    if (is_discrete(policy.algorithm)) {
        int index;
        const bool has_twin = policy.algorithm == RlAlgorithm::DoubleQ;
        if (rng && rng->uniform01() < exploration)
            index = static_cast<int>(rng->uniform_below(policy.action_grid));
        else
            index = greedy_index(policy.critic, has_twin ? &policy.critic2 : nullptr, state);
        params.alpha = grid_alpha(index, policy.action_grid);
        if (action_index) *action_index = index;
        return params;
    }
    Vector a = policy.actor.forward(state);
    if (rng)
        for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += exploration * rng->normal();
    params.alpha = clamp_action(a[0]);
    if (policy.algorithm == RlAlgorithm::Cacla2) params.beta = clamp_action(a[1]);
    if (action_index) *action_index = -1;
    return params;
}

double reward_for(const RegionCheck& check) {
    switch (check.region) {
    case Region::FA: return 1.0;
    case Region::UF: return -std::min(1.0, 10.0 * check.max_upper_violation);
    case Region::OF: return -0.5 * std::min(1.0, 10.0 * check.max_lower_deficit);
    }
    throw std::invalid_argument("reward_for: unknown region");
}

double q_td_target(const Mlp& net, double reward, const Vector& next_state, double discount) {
    if (discount == 0.0) return reward;
    const Vector q = net.forward(next_state);
    return reward + discount * q.maxCoeff();
}

void q_value_update(Mlp& net, const Vector& state, int action, double target, double lr) {
    const Vector q = net.forward(state);
    Vector dout = Vector::Zero(q.size());
    dout[action] = q[action] - target;
    net.step(net.backward(state, dout), lr);
}

void cacla_update(Mlp& critic, Mlp& actor, const Vector& state, const Vector& action_taken,
                  double reward, const Vector& next_state, double discount, double critic_lr,
                  double actor_lr) {
    const double v = critic.forward(state)[0];
    const double v_next = critic.forward(next_state)[0];
    const double target = reward + discount * v_next;
    const double td = target - v;
    Vector dout(1);
    dout[0] = v - target;
    critic.step(critic.backward(state, dout), critic_lr);
    if (td > 0.0) {
        const Vector a = actor.forward(state);
        actor.step(actor.backward(state, a - action_taken), actor_lr);
    }
}

namespace {

struct StepContext {
    Vector state;
    FairnessParams params;
    int action_index = -1;
    Vector action_vec;
};

TtiRow make_row(long tti, const FairnessParams& params, const SchedulerEnv::Outcome& out,
                double reward) {
    TtiRow row;
    row.tti = tti;
    row.alpha = params.alpha;
    row.beta = params.beta;
    row.region = out.region.region;
    row.jain = out.jain;
    row.mean_thr = out.mean_thr;
    row.std_thr = out.std_thr;
    row.cell_throughput = out.cell_throughput;
    row.reward = reward;
    return row;
}

} // namespace

TrainResult train_controller(SchedulerEnv& env, const StateBuilder& builder,
                             const RlConfig& config, Rng& rng) {
    if (config.train_ttis < 2)
        throw std::invalid_argument("train_controller: need at least two TTIs");
    TrainResult result;
    result.policy = make_policy(config, builder.dim(), rng);
    Policy& policy = result.policy;
    result.log.rows.reserve(static_cast<std::size_t>(config.train_ttis));

    FairnessParams prev_params{1.0, 1.0};
    const auto* obs = &env.observe();
    Vector state = builder.build(prev_params.alpha, prev_params.beta, obs->reports,
                                 obs->throughputs);

    // SARSA commits to the next action before the value update, so the
    // evaluated action is exactly the one taken
    bool have_carried = false;
    int carried_index = -1;
    FairnessParams carried_params{1.0, 1.0};

    // autocorrelated unit-variance exploration for the continuous
    // algorithms; white per-TTI noise washes out in the throughput filter
    // before the reward can credit it
    const double ou_keep = std::exp(-1.0 / config.explore_tau);
    const double ou_mix = std::sqrt(1.0 - ou_keep * ou_keep);
    double ou[2] = {0.0, 0.0};

    for (long t = 0; t < config.train_ttis; ++t) {
        const double progress =
            static_cast<double>(t) / static_cast<double>(config.train_ttis - 1);
        const double eps = config.eps_start + (config.eps_end - config.eps_start) * progress;
        const double sigma =
            config.sigma_start + (config.sigma_end - config.sigma_start) * progress;
        const double exploration = is_discrete(config.algorithm) ? eps : sigma;

        int action_index = -1;
        FairnessParams params;
        if (have_carried) {
            params = carried_params;
            action_index = carried_index;
            have_carried = false;
        } else if (is_discrete(config.algorithm)) {
            params = policy_action(policy, state, exploration, &rng, &action_index);
        } else {
            ou[0] = ou_keep * ou[0] + ou_mix * rng.normal();
            ou[1] = ou_keep * ou[1] + ou_mix * rng.normal();
            const Vector a = policy.actor.forward(state);
            params.alpha = clamp_action(a[0] + sigma * ou[0]);
            if (config.algorithm == RlAlgorithm::Cacla2)
                params.beta = clamp_action(a[1] + sigma * ou[1]);
        }
        const long tti = env.tti();
        const auto out = env.apply(params);
        const double r = reward_for(out.region);
        result.log.rows.push_back(make_row(tti, params, out, r));

        obs = &env.observe();
        const Vector next_state =
            builder.build(params.alpha, params.beta, obs->reports, obs->throughputs);

        switch (config.algorithm) {
        case RlAlgorithm::Q: {
            const double target = q_td_target(policy.critic, r, next_state, config.discount);
            q_value_update(policy.critic, state, action_index, target, config.critic_lr);
            break;
        }
        case RlAlgorithm::DoubleQ: {
            Mlp& a = rng.uniform01() < 0.5 ? policy.critic : policy.critic2;
            Mlp& b = (&a == &policy.critic) ? policy.critic2 : policy.critic;
            const Vector qa = a.forward(next_state);
            int best = 0;
            for (Eigen::Index i = 1; i < qa.size(); ++i)
                if (qa[i] > qa[best]) best = static_cast<int>(i);
            const double target = r + config.discount * b.forward(next_state)[best];
            q_value_update(a, state, action_index, target, config.critic_lr);
            break;
        }
        case RlAlgorithm::Sarsa: {
            const double next_progress = std::min(1.0, progress + 1.0 /
                                            static_cast<double>(config.train_ttis - 1));
            const double next_eps =
                config.eps_start + (config.eps_end - config.eps_start) * next_progress;
            int next_index = -1;
            carried_params = policy_action(policy, next_state, next_eps, &rng, &next_index);
            carried_index = next_index;
            have_carried = true;
            const double target =
                r + config.discount * policy.critic.forward(next_state)[next_index];
            q_value_update(policy.critic, state, action_index, target, config.critic_lr);
            break;
        }
        case RlAlgorithm::Cacla1: {
            Vector taken(1);
            taken[0] = params.alpha;
            cacla_update(policy.critic, policy.actor, state, taken, r, next_state,
                         config.discount, config.critic_lr,
                         t < config.actor_warmup ? 0.0 : config.actor_lr);
            break;
        }
        case RlAlgorithm::Cacla2: {
            Vector taken(2);
            taken[0] = params.alpha;
            taken[1] = params.beta;
            cacla_update(policy.critic, policy.actor, state, taken, r, next_state,
                         config.discount, config.critic_lr,
                         t < config.actor_warmup ? 0.0 : config.actor_lr);
            break;
        }
        }
        if (!is_discrete(config.algorithm) && config.actor_decay > 0.0) {
            policy.actor.w1 *= 1.0 - config.actor_decay;
            policy.actor.w2 *= 1.0 - config.actor_decay;
        }
        state = next_state;
        prev_params = params;
    }
    return result;
}

EpisodeLog evaluate_policy(SchedulerEnv& env, const StateBuilder& builder,
                           const Policy& policy, long ttis) {
    if (ttis < 1) throw std::invalid_argument("evaluate_policy: no TTIs");
    EpisodeLog log;
    log.rows.reserve(static_cast<std::size_t>(ttis));
    FairnessParams prev{1.0, 1.0};
    for (long t = 0; t < ttis; ++t) {
        const auto& obs = env.observe();
        const Vector state =
            builder.build(prev.alpha, prev.beta, obs.reports, obs.throughputs);
        const FairnessParams params = policy_action(policy, state, 0.0, nullptr);
        const long tti = env.tti();
        const auto out = env.apply(params);
        log.rows.push_back(make_row(tti, params, out, reward_for(out.region)));
        prev = params;
    }
    return log;
}

namespace {

void write_mlp(std::ofstream& out, const Mlp& net) {
    char buf[32];
    out << "mlp " << net.w1.cols() << ' ' << net.w1.rows() << ' ' << net.w2.rows() << '\n';
    auto write_matrix = [&](const Matrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
                out << (c ? " " : "") << buf;
            }
            out << '\n';
        }
    };
    auto write_vector = [&](const Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    };
    write_matrix(net.w1);
    write_vector(net.b1);
    write_matrix(net.w2);
    write_vector(net.b2);
}

Mlp read_mlp(std::ifstream& in) {
    std::string tag;
    int in_dim = 0, hidden = 0, out_dim = 0;
    if (!(in >> tag >> in_dim >> hidden >> out_dim) || tag != "mlp")
        throw std::runtime_error("load_policy: bad mlp block");
    Mlp net;
    net.w1.resize(hidden, in_dim);
    net.b1.resize(hidden);
    net.w2.resize(out_dim, hidden);
    net.b2.resize(out_dim);
    auto read_matrix = [&](Matrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                if (!(in >> m(r, c))) throw std::runtime_error("load_policy: truncated mlp");
    };
    auto read_vector = [&](Vector& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (!(in >> v[i])) throw std::runtime_error("load_policy: truncated mlp");
    };
    read_matrix(net.w1);
    read_vector(net.b1);
    read_matrix(net.w2);
    read_vector(net.b2);
    return net;
}

} // namespace

void save_policy(const std::string& path, const Policy& policy, const RlConfig& config) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_policy: cannot open " + path);
    out << "# scar-policy v1\n";
    out << "algorithm " << algorithm_name(policy.algorithm) << '\n';
    out << "state_dim " << policy.state_dim << '\n';
    out << "action_grid " << policy.action_grid << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", config.discount);
    out << "discount " << buf << '\n';
    const bool discrete = policy.algorithm == RlAlgorithm::Q ||
                          policy.algorithm == RlAlgorithm::DoubleQ ||
                          policy.algorithm == RlAlgorithm::Sarsa;
    int nets = 1;
    if (policy.algorithm == RlAlgorithm::DoubleQ) nets = 2;
    if (!discrete) nets = 2; // critic + actor
    out << "networks " << nets << '\n';
    out << "critic\n";
    write_mlp(out, policy.critic);
    if (policy.algorithm == RlAlgorithm::DoubleQ) {
        out << "critic2\n";
        write_mlp(out, policy.critic2);
    } else if (!discrete) {
        out << "actor\n";
        write_mlp(out, policy.actor);
    }
    if (!out) throw std::runtime_error("save_policy: write failed for " + path);
}

Policy load_policy(const std::string& path, RlConfig* config_out) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_policy: cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line != "# scar-policy v1")
        throw std::runtime_error("load_policy: bad header in " + path);
    Policy policy;
    RlConfig config;
    std::string key, value;
    if (!(in >> key >> value) || key != "algorithm")
        throw std::runtime_error("load_policy: missing algorithm");
    policy.algorithm = algorithm_from_name(value);
    config.algorithm = policy.algorithm;
    auto read_int = [&](const char* name) {
        std::string k;
        int v = 0;
        if (!(in >> k >> v) || k != name)
            throw std::runtime_error(std::string("load_policy: missing field ") + name);
        return v;
    };
    policy.state_dim = read_int("state_dim");
    policy.action_grid = read_int("action_grid");
    config.action_grid = policy.action_grid;
    std::string k;
    if (!(in >> k >> config.discount) || k != "discount")
        throw std::runtime_error("load_policy: missing discount");
    const int nets = read_int("networks");
    std::string tag;
    if (!(in >> tag) || tag != "critic")
        throw std::runtime_error("load_policy: missing critic block");
    policy.critic = read_mlp(in);
    if (nets > 1) {
        if (!(in >> tag)) throw std::runtime_error("load_policy: missing second network");
        if (tag == "critic2") policy.critic2 = read_mlp(in);
        else if (tag == "actor") policy.actor = read_mlp(in);
        else throw std::runtime_error("load_policy: unknown network tag " + tag);
    }
    if (config_out) *config_out = config;
    return policy;
}

void save_eval_csv(const std::string& path, const std::vector<EvalRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_eval_csv: cannot open " + path);
    out << "algorithm,M,K,seed,p_uf,p_fa,p_of,mean_cell_throughput\n";
    char buf[64];
    for (const auto& r : rows) {
        out << r.algorithm << ',' << r.m << ',' << r.k << ',' << r.seed << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.shares.p_uf);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.shares.p_fa);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.shares.p_of);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", r.shares.mean_cell_throughput);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("save_eval_csv: write failed for " + path);
}

} // namespace scar
