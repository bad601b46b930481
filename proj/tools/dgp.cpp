#include <iostream>

#include "CLI11.hpp"

#include "dgp/app.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Disentangled graph prompting for graph-level OOD detection"};
    app.require_subcommand(1, 1);
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
    std::vector<std::string> sets;
    bool list_keys = false;

    const char* commands[][2] = {
        {"synth", "write synthetic ID/OOD datasets in TU format"},
        {"pretrain", "contrastive pre-training, writes the encoder checkpoint"},
        {"train", "train prompt generators on a frozen encoder"},
        {"score", "score the test (or val) split into a CSV"},
        {"eval", "metrics JSON from a score CSV"},
        {"pipeline", "data, split, pretrain, train, score, eval and a run manifest"},
        {"grid", "hyper-parameter sweep selected by validation AUC"},
        {"ablate", "V0, V1, V2 and full model comparison"},
        {"dump-prompts", "per-edge prompt weights of both branches"},
    };
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", config, "key=value config file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--out", out, "output directory, overrides the config");
        sub->add_option("--set", sets, "extra key=value overrides, applied last");
    }
    app.add_flag("--list-keys", list_keys, "print every config key and exit");

    if (argc == 2 && std::string(argv[1]) == "--list-keys") {
        for (const auto& k : dgp::config_keys()) std::cout << k.key << "\t" << k.doc << "\n";
        return 0;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // help and version are "errors" with exit code 0
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        dgp::ExperimentConfig cfg = dgp::load_config(config);
        const CLI::App* sub = app.get_subcommands().front();
        if (sub->count("--seed")) cfg.seed = seed;
        if (sub->count("--out")) cfg.out = out;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw dgp::ConfigError("--set expects key=value, got '" + kv + "'");
            dgp::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
        }
        return dgp::run_command(sub->get_name(), cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
