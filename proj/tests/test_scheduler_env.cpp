#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scar/scheduler_env.hpp"
#include "scar/types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

using namespace scar;

namespace {

CqiReport make_report(int user, std::vector<int> values) {
    CqiReport r;
    r.user_id = user;
    r.values = std::move(values);
    return r;
}

// independent per-RB argmax with the same tie convention
std::vector<int> brute_allocate(const std::vector<CqiReport>& reports,
                                const std::vector<double>& thr, double alpha, double beta) {
    const std::size_t rbs = reports[0].values.size();
    std::vector<int> out(rbs, -1);
    for (std::size_t j = 0; j < rbs; ++j) {
        double best_metric = -1.0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const double rate = cqi_rate_bps(reports[i].values[j]) / 1e6;
            const double avg = thr[i] > 1e-6 ? thr[i] : 1e-6;
            const double metric = std::pow(rate, beta) / std::pow(avg, alpha);
            if (out[j] < 0 || metric > best_metric) {
                out[j] = static_cast<int>(i);
                best_metric = metric;
            }
        }
    }
    return out;
}

} // namespace

TEST_CASE("per-CQI transport rates pinned to the table") {
    CHECK(cqi_efficiency(8) == doctest::Approx(1.9141));
    CHECK(cqi_bits_per_rb(1) == 26);
    CHECK(cqi_bits_per_rb(7) == 248);
    CHECK(cqi_bits_per_rb(15) == 933);
    CHECK(cqi_rate_bps(1) == doctest::Approx(26000.0));
    CHECK(cqi_rate_bps(15) == doctest::Approx(933000.0));
    CHECK_THROWS_AS(cqi_efficiency(0), std::out_of_range);
    CHECK_THROWS_AS(cqi_efficiency(16), std::out_of_range);
}

TEST_CASE("max-rate specialization ignores the averages") {
    const std::vector<CqiReport> reports{make_report(0, {15, 3, 7}),
                                         make_report(1, {4, 11, 7}),
                                         make_report(2, {4, 11, 9})};
    const std::vector<double> thr{9.0, 0.1, 2.0};
    const Allocation a = gpf_allocate(reports, thr, {0.0, 1.0});
    // RB1 ties between users 1 and 2 at CQI 11, lowest index wins
    CHECK(a.rb_to_user == std::vector<int>{0, 1, 2});
}

TEST_CASE("pure-fairness specialization serves the lowest average") {
    const std::vector<CqiReport> reports{make_report(0, {15, 15}),
                                         make_report(1, {1, 1}),
                                         make_report(2, {8, 8})};
    const std::vector<double> thr{2.0, 0.5, 1.0};
    const Allocation a = gpf_allocate(reports, thr, {1.0, 0.0});
    CHECK(a.rb_to_user == std::vector<int>{1, 1});

    // zero averages floor at the same value, ties to the lowest index
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    const Allocation z = gpf_allocate(reports, zeros, {1.0, 0.0});
    CHECK(z.rb_to_user == std::vector<int>{0, 0});
}

TEST_CASE("allocation matches the per-RB brute force") {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int users = 1 + static_cast<int>(rng.uniform_below(4));
        const int rbs = 1 + static_cast<int>(rng.uniform_below(3));
        std::vector<CqiReport> reports;
        std::vector<double> thr;
        for (int u = 0; u < users; ++u) {
            std::vector<int> v(rbs);
            for (int j = 0; j < rbs; ++j) v[j] = 1 + static_cast<int>(rng.uniform_below(15));
            reports.push_back(make_report(u, v));
            thr.push_back(trial % 5 == 0 ? 0.0 : rng.uniform(0.0, 10.0));
        }
        const double alphas[] = {0.0, 0.5, 1.0, 2.0};
        const double betas[] = {0.0, 0.5, 1.0};
        const double alpha = alphas[rng.uniform_below(4)];
        const double beta = betas[rng.uniform_below(3)];
        const Allocation got = gpf_allocate(reports, thr, {alpha, beta});
        CHECK(got.rb_to_user == brute_allocate(reports, thr, alpha, beta));
    }
}

TEST_CASE("allocation input contracts") {
    const std::vector<CqiReport> reports{make_report(0, {5, 5}), make_report(1, {5})};
    const std::vector<double> thr{1.0, 1.0};
    CHECK_THROWS_AS(gpf_allocate(reports, thr, {1.0, 1.0}), std::invalid_argument);
    const std::vector<double> short_thr{1.0};
    const std::vector<CqiReport> ok{make_report(0, {5}), make_report(1, {5})};
    CHECK_THROWS_AS(gpf_allocate(ok, short_thr, {1.0, 1.0}), std::invalid_argument);
    CHECK(gpf_allocate({}, {}, {1.0, 1.0}).rb_to_user.empty());
}

TEST_CASE("exponential averaging of served rate") {
    const std::vector<CqiReport> reports{make_report(0, {7, 7, 3}), make_report(1, {7, 7, 3})};
    Allocation alloc;
    alloc.rb_to_user = {0, 0, -1}; // user 0 gets two RBs at CQI 7, user 1 nothing
    std::vector<double> thr{1.0, 2.0};
    update_throughputs(thr, reports, alloc, 100.0);
    // served 2 * 248 bits = 0.496 Mbps
    CHECK(thr[0] == doctest::Approx(0.99 * 1.0 + 0.496 / 100.0).epsilon(1e-12));
    CHECK(thr[1] == doctest::Approx(0.99 * 2.0).epsilon(1e-12));

    // window of one replaces the average outright
    std::vector<double> inst{5.0, 5.0};
    update_throughputs(inst, reports, alloc, 1.0);
    CHECK(inst[0] == doctest::Approx(0.496));
    CHECK(inst[1] == 0.0);

    CHECK_THROWS_AS(update_throughputs(thr, reports, alloc, 0.5), std::invalid_argument);
}

TEST_CASE("region names round-trip") {
    for (Region r : {Region::UF, Region::FA, Region::OF})
        CHECK(region_from_name(region_name(r)) == r);
    CHECK_THROWS_AS(region_from_name("XX"), std::invalid_argument);
}

TEST_CASE("equal throughputs sit deep in the over-fair region") {
    const std::vector<double> thr{5.0, 5.0, 5.0};
    const RegionCheck c = fairness_region(thr);
    CHECK(c.region == Region::OF);
    CHECK(c.max_upper_violation == 0.0);
    CHECK(c.max_lower_deficit == doctest::Approx(0.95));
}

TEST_CASE("a starved user forces under-fairness") {
    std::vector<double> thr(10, 1.0);
    thr[0] = 0.0;
    const RegionCheck c = fairness_region(thr);
    CHECK(c.region == Region::UF);
    CHECK(c.max_upper_violation == doctest::Approx(0.09));
}

TEST_CASE("a graded population lands in the fair region") {
    std::vector<double> thr(100);
    for (int i = 1; i <= 100; ++i) thr[i - 1] = i - 0.5;
    const RegionCheck c = fairness_region(thr);
    CHECK(c.region == Region::FA);
    CHECK(c.max_upper_violation == 0.0);

    // fairness is scale free
    std::vector<double> scaled = thr;
    for (double& t : scaled) t *= 7.25;
    const RegionCheck s = fairness_region(scaled);
    CHECK(s.region == Region::FA);
    CHECK(s.max_lower_deficit == doctest::Approx(c.max_lower_deficit));
}

TEST_CASE("degenerate populations and contracts") {
    const std::vector<double> dead{0.0, 0.0};
    const RegionCheck c = fairness_region(dead);
    CHECK(c.region == Region::UF);
    CHECK(c.max_upper_violation == 1.0);

    CHECK_THROWS_AS(fairness_region(std::span<const double>{}), std::invalid_argument);
    const std::vector<double> neg{1.0, -0.5};
    CHECK_THROWS_AS(fairness_region(neg), std::invalid_argument);
    const std::vector<double> ok{1.0, 2.0};
    CHECK_THROWS_AS(fairness_region(ok, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fairness_region(ok, 1.0), std::invalid_argument);
}

TEST_CASE("jain index pinned values") {
    const std::vector<double> equal{3.0, 3.0, 3.0, 3.0};
    CHECK(jain_index(equal) == doctest::Approx(1.0));
    const std::vector<double> half{1.0, 0.0};
    CHECK(jain_index(half) == doctest::Approx(0.5));
    const std::vector<double> skew{2.0, 4.0};
    CHECK(jain_index(skew) == doctest::Approx(0.9));
    CHECK_THROWS_AS(jain_index(std::span<const double>{}), std::invalid_argument);
    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(jain_index(zeros), std::invalid_argument);
}

TEST_CASE("episode shares are percentages that sum to one hundred") {
    EpisodeLog log;
    const Region regions[] = {Region::UF, Region::FA, Region::FA, Region::OF};
    const double cells[] = {1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i < 4; ++i) {
        TtiRow row;
        row.tti = i;
        row.region = regions[i];
        row.cell_throughput = cells[i];
        log.rows.push_back(row);
    }
    const RegionShares s = log.shares();
    CHECK(s.p_uf == doctest::Approx(25.0));
    CHECK(s.p_fa == doctest::Approx(50.0));
    CHECK(s.p_of == doctest::Approx(25.0));
    CHECK(s.p_uf + s.p_fa + s.p_of == doctest::Approx(100.0));
    CHECK(s.mean_cell_throughput == doctest::Approx(2.5));
}

TEST_CASE("trace files are byte-stable") {
    EpisodeLog log;
    TtiRow row;
    row.tti = 3;
    row.alpha = 0.125;
    row.beta = 1.0;
    row.region = Region::FA;
    row.jain = 0.875;
    row.mean_thr = 1.5;
    row.std_thr = 0.25;
    row.cell_throughput = 3.875;
    log.rows.push_back(row);

    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    save_trace_csv("trace_a_test.csv", log);
    save_trace_csv("trace_b_test.csv", log);
    const std::string a = slurp("trace_a_test.csv");
    CHECK(a == slurp("trace_b_test.csv"));
    CHECK(a == "tti,alpha,beta,region,jfi,mean_thr,std_thr,cell_throughput\n"
               "3,0.125,1,FA,0.875,1.5,0.25,3.875\n");
    std::remove("trace_a_test.csv");
    std::remove("trace_b_test.csv");
}

namespace {

EnvConfig desk_env() {
    EnvConfig cfg;
    cfg.channel.num_users = 8;
    cfg.channel.num_rbs = 6;
    cfg.min_active = 3;
    cfg.activity_period = 50;
    return cfg;
}

} // namespace

TEST_CASE("environment observation cache and active-set bounds") {
    SchedulerEnv env(desk_env(), 21);
    for (int t = 0; t < 150; ++t) {
        const auto& obs = env.observe();
        CHECK(obs.tti == t);
        CHECK(obs.active_users.size() >= 3);
        CHECK(obs.active_users.size() <= 8);
        CHECK(obs.reports.size() == obs.active_users.size());
        CHECK(obs.throughputs.size() == obs.active_users.size());
        const auto& again = env.observe();
        CHECK(&again == &obs);
        env.apply({1.0, 1.0});
    }
    CHECK(env.tti() == 150);
}

TEST_CASE("environment replays per seed") {
    SchedulerEnv a(desk_env(), 33);
    SchedulerEnv b(desk_env(), 33);
    SchedulerEnv c(desk_env(), 34);
    bool any_diff = false;
    for (int t = 0; t < 60; ++t) {
        const auto oa = a.apply({1.0, 1.0});
        const auto ob = b.apply({1.0, 1.0});
        const auto oc = c.apply({1.0, 1.0});
        CHECK(oa.jain == ob.jain);
        CHECK(oa.mean_thr == ob.mean_thr);
        CHECK(oa.cell_throughput == ob.cell_throughput);
        CHECK(oa.region.region == ob.region.region);
        any_diff = any_diff || oa.cell_throughput != oc.cell_throughput;
    }
    CHECK(any_diff);
}

TEST_CASE("environment rejects bad configurations") {
    EnvConfig cfg = desk_env();
    cfg.min_active = 0;
    CHECK_THROWS_AS(SchedulerEnv(cfg, 1), std::invalid_argument);
    cfg = desk_env();
    cfg.min_active = 9;
    CHECK_THROWS_AS(SchedulerEnv(cfg, 1), std::invalid_argument);
    cfg = desk_env();
    cfg.activity_period = 0;
    CHECK_THROWS_AS(SchedulerEnv(cfg, 1), std::invalid_argument);
}

TEST_CASE("reference schedulers log complete episodes") {
    SchedulerEnv env(desk_env(), 55);
    const EpisodeLog pf = run_baseline(env, Baseline::PF, 400);
    REQUIRE(pf.rows.size() == 400);
    for (std::size_t i = 0; i < pf.rows.size(); ++i) {
        CHECK(pf.rows[i].tti == static_cast<long>(i));
        CHECK(pf.rows[i].alpha == 1.0);
        CHECK(pf.rows[i].beta == 1.0);
        CHECK(pf.rows[i].cell_throughput >= 0.0);
    }
    const RegionShares s = pf.shares();
    CHECK(s.p_uf + s.p_fa + s.p_of == doctest::Approx(100.0));

    SchedulerEnv env2(desk_env(), 55);
    const EpisodeLog mt = run_baseline(env2, Baseline::MT, 400);
    bool alpha_moved = false;
    for (const auto& r : mt.rows) {
        CHECK(r.alpha >= 0.0);
        CHECK(r.alpha <= 1.0);
        alpha_moved = alpha_moved || r.alpha != 1.0;
    }
    CHECK(alpha_moved);

    CHECK_THROWS_AS(run_baseline(env, Baseline::PF, 0), std::invalid_argument);
}
