// regmdp: command-line front end for the regularization experiments.
//
//   regmdp run --config sweep.json [--seed S] [--replications N] [--out results.csv] [--workers K]
//   regmdp preset cliff-random [--seed S] [--replications N] [--out results.csv] [--workers K]
//   regmdp preset --list
//   regmdp check [--seed S]
//   regmdp mdp validate spec.json
//   regmdp mdp export cliff --out cliff.json
//   regmdp dataset --preset cliff-random --replications 1 --out steps.csv

#include "regmdp/regmdp.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replications;
    std::string out;
    std::size_t workers = 0;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--replications", o.replications, "number of simulated datasets")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "CSV output path (stdout when omitted)");
    cmd->add_option("--workers", o.workers, "worker threads (default: hardware concurrency)");
}

void apply(regmdp::ExperimentConfig& cfg, const Overrides& o) {
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.replications) cfg.replications = *o.replications;
    if (!o.out.empty()) cfg.output = o.out;
}

std::size_t worker_count(const Overrides& o) {
    if (o.workers > 0) return o.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_sweep(regmdp::ExperimentConfig cfg, const Overrides& o) {
    apply(cfg, o);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = regmdp::run_experiment(cfg, worker_count(o));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cfg.output.empty()) {
        regmdp::write_csv(std::cout, rows);
    } else {
        regmdp::emit_csv(rows, cfg.output);
    }
    std::cerr << regmdp::emit_summary(rows);
    std::cerr << cfg.replications << " replications in " << secs << " s (config " << regmdp::config_hash(cfg)
              << ")\n";
    return 0;
}

int run_checks(std::uint64_t seed) {
    using namespace regmdp::properties;
    const std::vector<PropertyReport> reports = {
        check_uniform_blend_equivalence(seed),      check_discount_blend_equivalence(seed + 1),
        check_dirichlet_matrix_form(seed + 2),      check_implied_prior_equivalence(seed + 3),
        check_eps_greedy_planning(seed + 4),        check_reward_shift(seed + 5),
        check_policy_iteration_oracle(seed + 6),
    };
    bool ok = true;
    for (const auto& r : reports) {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << r.name << " (checked " << r.checked << ", skipped "
                  << r.skipped << ", worst error " << r.worst_error << ")";
        if (!r.passed()) std::cout << ": " << r.first_failure;
        std::cout << '\n';
        ok = ok && r.passed();
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular batch-RL regularization experiments"};
    app.require_subcommand(1);

    Overrides run_o;
    std::string config_path;
    auto* run = app.add_subcommand("run", "run a sweep described by a JSON config");
    run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_overrides(run, run_o);

    Overrides preset_o;
    std::string preset_name;
    bool list_presets = false;
    auto* pre = app.add_subcommand("preset", "run a named preset");
    pre->add_option("name,--preset", preset_name, "preset name");
    pre->add_flag("--list", list_presets, "list preset names and exit");
    add_overrides(pre, preset_o);

    std::uint64_t check_seed = 12345;
    auto* check = app.add_subcommand("check", "run the randomized equivalence checks");
    check->add_option("--seed", check_seed, "generator seed");

    auto* mdp = app.add_subcommand("mdp", "MDP spec file utilities");
    mdp->require_subcommand(1);
    std::string validate_path;
    auto* validate = mdp->add_subcommand("validate", "lint an MDP spec file");
    validate->add_option("path", validate_path, "spec file")->required();
    std::string export_name, export_out;
    double export_gamma = 0.95;
    regmdp::GridNoiseConfig export_noise;
    auto* exp = mdp->add_subcommand("export", "write a builtin MDP as a spec file");
    exp->add_option("name", export_name, "cliff | two_goals | grid")->required();
    exp->add_option("--out", export_out, "output path")->required();
    exp->add_option("--gamma", export_gamma, "discount factor");
    exp->add_option("--slip", export_noise.slip_prob, "slip probability");
    exp->add_option("--reward-std", export_noise.reward_std, "reward noise std");

    Overrides data_o;
    std::string data_preset, data_config;
    auto* dataset = app.add_subcommand("dataset", "dump simulated datasets as CSV");
    dataset->add_option("--preset", data_preset, "preset name");
    dataset->add_option("--config", data_config, "experiment config (JSON)");
    add_overrides(dataset, data_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_sweep(regmdp::load_config(config_path), run_o);

        if (*pre) {
            if (list_presets) {
                for (const auto& [name, cfg] : regmdp::builtin_presets())
                    std::cout << name << "  (" << cfg.mdp << ", n=" << cfg.collection.n_trajectories
                              << ", l=" << cfg.collection.trajectory_length << ", p_optimal=" << cfg.collection.p_optimal
                              << ")\n";
                return 0;
            }
            if (preset_name.empty()) throw regmdp::ArgumentError("preset name required (see --list)");
            return run_sweep(regmdp::preset(preset_name), preset_o);
        }

        if (*check) return run_checks(check_seed);

        if (*validate) {
            const auto m = regmdp::mdp_from_json_unchecked(regmdp::read_json_file(validate_path));
            const auto report = regmdp::validate_mdp(m);
            if (report.empty()) {
                std::cout << validate_path << ": ok (" << m.n_states << " states, " << m.n_actions << " actions)\n";
                return 0;
            }
            for (const auto& line : report) std::cout << validate_path << ": " << line << '\n';
            return 1;
        }

        if (*exp) {
            regmdp::save_mdp_spec(regmdp::builtin_mdp(export_name, export_noise, export_gamma), export_out);
            return 0;
        }

        if (*dataset) {
            if (data_preset.empty() == data_config.empty())
                throw regmdp::ArgumentError("dataset: give exactly one of --preset or --config");
            auto cfg = data_preset.empty() ? regmdp::load_config(data_config) : regmdp::preset(data_preset);
            if (!data_o.replications) data_o.replications = 1;
            apply(cfg, data_o);
            const auto ctx = regmdp::make_context(cfg);
            std::ofstream file;
            if (!cfg.output.empty()) {
                file.open(cfg.output);
                if (!file) throw std::runtime_error("cannot write '" + cfg.output + "'");
            }
            std::ostream& out = cfg.output.empty() ? std::cout : file;
            for (std::size_t i = 0; i < cfg.replications; ++i) {
                const auto data = regmdp::generate_dataset(ctx.mdp, ctx.optimal, cfg.collection,
                                                           regmdp::child_seed(cfg.master_seed, i));
                regmdp::write_dataset_csv(out, data, i, i == 0);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
