#include "disent/disent.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace {

int exit_code(disent_status s) {
    switch (s) {
        case DISENT_OK: return 0;
        case DISENT_ERR_VALIDATION:
        case DISENT_ERR_INVALID_CONFIG:
        case DISENT_ERR_NULL_ARGUMENT: return 1;
        default: return 2;
    }
}

int report(disent_status s) {
    std::fprintf(stderr, "error (%s): %s\n", disent_status_name(s), disent_last_error());
    return exit_code(s);
}

std::string key_help() {
    char* text = nullptr;
    if (disent_config_help(&text) != DISENT_OK) return {};
    std::string out = text;
    disent_string_free(text);
    return out;
}

struct CommandArgs {
    std::string config_path;
    std::vector<std::string> sets;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustering-friendly representation learning: data, training, clustering and evaluation"};
    app.footer(key_help());
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(disent_version()));

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"gen-data", "write the configured dataset as CSV"},
        {"train", "train one model with loss.kind and save it to model.path"},
        {"embed", "write layer activations of a saved model as CSV"},
        {"cluster", "run kmeans on an embedding CSV"},
        {"evaluate", "print AMI and NMI between two label files"},
        {"run-experiment", "compare methods across seeds; writes report.json and results.csv"},
        {"sweep-k", "AMI for every k in [sweep.k_min, sweep.k_max]; writes sweep.csv"},
        {"diagnostics", "activation histogram CSV and PCA TSV of a saved model"},
    };
    std::vector<std::unique_ptr<CommandArgs>> args;
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->footer("See `disent --help` for every config key.");
        auto& a = *args.emplace_back(std::make_unique<CommandArgs>());
        sub->add_option("--config", a.config_path, "JSON config file");
        sub->add_option("--set", a.sets, "override a config key, key=value (repeatable)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::size_t which = 0;
    while (!app.got_subcommand(commands[which].first)) ++which;
    const std::string& name = commands[which].first;
    const CommandArgs& a = *args[which];

    disent_config* raw = nullptr;
    if (auto s = disent_config_new(&raw); s != DISENT_OK) return report(s);
    std::unique_ptr<disent_config, decltype(&disent_config_free)> config(raw, disent_config_free);

    if (!a.config_path.empty())
        if (auto s = disent_config_load(config.get(), a.config_path.c_str()); s != DISENT_OK) return report(s);
    for (const auto& kv : a.sets)
        if (auto s = disent_config_set(config.get(), kv.c_str()); s != DISENT_OK) return report(s);
    if (auto s = disent_config_apply_env(config.get()); s != DISENT_OK) return report(s);

    char* text = nullptr;
    const disent_status s = disent_run_command(name.c_str(), config.get(), &text);
    if (s != DISENT_OK) return report(s);
    std::fputs(text, stdout);
    disent_string_free(text);
    return 0;
}
