#include "scar/cli_commands.hpp"
#include "scar/config.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"CQI clustering, classification and fairness control pipeline"};
    app.require_subcommand(1);

    struct Common {
        std::string config_path;
        std::uint64_t seed = 0;
        bool seed_given = false;
        std::string out_dir;
    };

    using Runner = std::function<void(const scar::Config&, std::uint64_t, const std::string&)>;
    struct Command {
        const char* name;
        const char* help;
        bool needs_config;
        Runner run;
    };
    const Command commands[] = {
        {"collect", "generate and saturate the reduced-histogram dataset", true,
         scar::run_collect},
        {"cluster", "benchmark clustering methods and write ordered centers", true,
         scar::run_cluster},
        {"train-rbfn", "train the classifier on a clustered dataset", true,
         scar::run_train_rbfn},
        {"sweep", "grid-search classifier spread and learning rate", true, scar::run_sweep},
        {"train-rl", "train the fairness controller in the scheduler loop", true,
         scar::run_train_rl},
        {"evaluate", "evaluate policies and baselines over fresh episodes", true,
         scar::run_evaluate},
        {"report", "aggregate result CSVs into a text summary", false, scar::run_report},
    };

    std::vector<std::shared_ptr<Common>> state;
    std::vector<std::pair<CLI::App*, const Command*>> bound;
    for (const Command& c : commands) {
        auto common = std::make_shared<Common>();
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        auto* config_opt = sub->add_option("--config", common->config_path,
                                           "configuration file (key = value lines)");
        if (c.needs_config) config_opt->required();
        sub->add_option("--seed", common->seed, "base RNG seed")->each([common](const std::string&) {
            common->seed_given = true;
        });
        sub->add_option("--out", common->out_dir, "output directory");
        state.push_back(common);
        bound.emplace_back(sub, &c);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < bound.size(); ++i) {
        auto [sub, cmd] = bound[i];
        if (!sub->parsed()) continue;
        const Common& common = *state[i];
        try {
            scar::Config cfg = common.config_path.empty()
                                   ? scar::Config()
                                   : scar::Config::from_file(common.config_path);
            const std::uint64_t seed =
                common.seed_given ? common.seed : cfg.get_u64("seed", 1);
            const std::string out =
                !common.out_dir.empty() ? common.out_dir : cfg.get_string("out", "out");
            cmd->run(cfg, seed, out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }
    return 1;
}
