#pragma once

#include "regmdp/data.hpp"
#include "regmdp/environments.hpp"
#include "regmdp/estimation.hpp"
#include "regmdp/evaluation.hpp"
#include "regmdp/planning.hpp"
#include "regmdp/regularizers.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace regmdp {

inline std::vector<double> default_eps_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 20; ++i) g.push_back(i / 20.0);
    return g;
}

inline std::vector<double> default_magnitude_grid() { return {0, 1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}; }

/// Declarative description of one sweep.
struct ExperimentConfig {
    std::string name;
    std::string mdp = "cliff";  // builtin name; ignored when mdp_path is set
    std::string mdp_path;        // JSON MDP spec file
    GridNoiseConfig noise;       // builtin MDPs only
    std::optional<double> gamma; // overrides the MDP's discount
    std::vector<Method> methods{Method::dirichlet, Method::discount, Method::eps_greedy};
    std::vector<double> eps_grid = default_eps_grid();
    std::vector<double> magnitude_grid = default_magnitude_grid();
    CollectionConfig collection;
    std::size_t replications = 5000;
    std::uint64_t master_seed = 0;
    std::string output;
    double tie_tol = kTieTol;
};

struct ResultRow {
    Method method = Method::none;
    double strength = 0.0;
    double mean_loss = 0.0;
    double stderr_loss = 0.0;
    double mean_mse_plain = 0.0;
    double mean_mse_absorbing = 0.0;
    std::size_t replications = 0;
    std::string config_hash;
};

// ---------------------------------------------------------------------------
// Config (de)serialization
// ---------------------------------------------------------------------------

inline nlohmann::json start_mode_to_json(const StartMode& m) {
    switch (m.kind) {
    case StartMode::Kind::uniform: return {{"kind", "uniform"}};
    case StartMode::Kind::fixed: return {{"kind", "fixed"}, {"states", m.states}};
    case StartMode::Kind::set: return {{"kind", "set"}, {"states", m.states}};
    }
    return {};
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg, bool include_output = true) {
    nlohmann::json j;
    j["name"] = cfg.name;
    if (cfg.mdp_path.empty())
        j["mdp"] = cfg.mdp;
    else
        j["mdp_path"] = cfg.mdp_path;
    j["noise"] = {{"slip_prob", cfg.noise.slip_prob}, {"reward_std", cfg.noise.reward_std}};
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    j["methods"] = nlohmann::json::array();
    for (auto m : cfg.methods) j["methods"].push_back(std::string(to_string(m)));
    j["eps_grid"] = cfg.eps_grid;
    j["magnitude_grid"] = cfg.magnitude_grid;
    j["collection"] = {{"n_trajectories", cfg.collection.n_trajectories},
                       {"trajectory_length", cfg.collection.trajectory_length},
                       {"p_optimal", cfg.collection.p_optimal},
                       {"start_mode", start_mode_to_json(cfg.collection.start)}};
    j["replications"] = cfg.replications;
    j["master_seed"] = cfg.master_seed;
    j["tie_tol"] = cfg.tie_tol;
    if (include_output && !cfg.output.empty()) j["output"] = cfg.output;
    return j;
}

namespace detail {

template <typename T, typename F>
void optional_field(const nlohmann::json& j, const char* key, T& target, F&& convert) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        target = convert(*it);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(key, e.what());
    }
}

inline std::vector<std::size_t> state_list(const nlohmann::json& j) { return j.get<std::vector<std::size_t>>(); }

} // namespace detail

/// Missing keys keep their defaults; unknown keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("<root>", "expected a JSON object");
    static const std::vector<std::string> known = {"name",           "mdp",        "mdp_path",     "noise",
                                                   "gamma",          "methods",    "eps_grid",     "magnitude_grid",
                                                   "collection",     "replications", "master_seed", "output",
                                                   "tie_tol"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) throw ParseError(it.key(), "unknown field");

    ExperimentConfig cfg;
    auto as_string = [](const nlohmann::json& v) { return v.get<std::string>(); };
    auto as_double = [](const nlohmann::json& v) { return v.get<double>(); };
    auto as_size = [](const nlohmann::json& v) { return v.get<std::size_t>(); };
    auto as_doubles = [](const nlohmann::json& v) { return v.get<std::vector<double>>(); };
    detail::optional_field(j, "name", cfg.name, as_string);
    detail::optional_field(j, "mdp", cfg.mdp, as_string);
    detail::optional_field(j, "mdp_path", cfg.mdp_path, as_string);
    if (auto it = j.find("noise"); it != j.end()) {
        detail::optional_field(*it, "slip_prob", cfg.noise.slip_prob, as_double);
        detail::optional_field(*it, "reward_std", cfg.noise.reward_std, as_double);
    }
    if (auto it = j.find("gamma"); it != j.end() && !it->is_null()) {
        if (!it->is_number()) throw ParseError("gamma", "expected a number");
        cfg.gamma = it->get<double>();
    }
    if (auto it = j.find("methods"); it != j.end()) {
        if (!it->is_array()) throw ParseError("methods", "expected an array");
        cfg.methods.clear();
        for (const auto& m : *it) {
            if (!m.is_string()) throw ParseError("methods", "expected method names");
            try {
                cfg.methods.push_back(parse_method(m.get<std::string>()));
            } catch (const ArgumentError& e) {
                throw ParseError("methods", e.what());
            }
        }
    }
    detail::optional_field(j, "eps_grid", cfg.eps_grid, as_doubles);
    detail::optional_field(j, "magnitude_grid", cfg.magnitude_grid, as_doubles);
    if (auto it = j.find("collection"); it != j.end()) {
        auto& c = cfg.collection;
        detail::optional_field(*it, "n_trajectories", c.n_trajectories, as_size);
        detail::optional_field(*it, "trajectory_length", c.trajectory_length, as_size);
        detail::optional_field(*it, "p_optimal", c.p_optimal, as_double);
        if (auto sm = it->find("start_mode"); sm != it->end()) {
            std::string kind = "uniform";
            detail::optional_field(*sm, "kind", kind, as_string);
            std::vector<std::size_t> states;
            detail::optional_field(*sm, "states", states, detail::state_list);
            if (kind == "uniform")
                c.start = StartMode::uniform();
            else if (kind == "fixed")
                c.start = {StartMode::Kind::fixed, states};
            else if (kind == "set")
                c.start = StartMode::set(states);
            else
                throw ParseError("start_mode.kind", "expected uniform, fixed or set");
        }
    }
    detail::optional_field(j, "replications", cfg.replications, as_size);
    detail::optional_field(j, "master_seed", cfg.master_seed,
                           [](const nlohmann::json& v) { return v.get<std::uint64_t>(); });
    detail::optional_field(j, "output", cfg.output, as_string);
    detail::optional_field(j, "tie_tol", cfg.tie_tol, as_double);
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

/// 64-bit FNV-1a of the canonical config JSON (output path excluded), as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg, false).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline TabularMdp resolve_mdp(const ExperimentConfig& cfg) {
    TabularMdp mdp = cfg.mdp_path.empty() ? builtin_mdp(cfg.mdp, cfg.noise) : load_mdp_spec(cfg.mdp_path);
    if (cfg.gamma) mdp.gamma = *cfg.gamma;
    require_valid(mdp);
    return mdp;
}

inline std::vector<std::string> validate_config(const ExperimentConfig& cfg, std::size_t n_states) {
    std::vector<std::string> out;
    if (cfg.methods.empty()) out.emplace_back("method list is empty");
    if (cfg.replications == 0) out.emplace_back("replications must be at least 1");
    if (cfg.gamma && !(*cfg.gamma >= 0.0 && *cfg.gamma < 1.0)) out.emplace_back("gamma out of [0,1)");
    if (!(cfg.tie_tol >= 0.0)) out.emplace_back("tie_tol must be nonnegative");
    const bool needs_eps = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                       [](Method m) { return m == Method::discount || m == Method::eps_greedy; });
    const bool needs_mag = std::find(cfg.methods.begin(), cfg.methods.end(), Method::dirichlet) != cfg.methods.end();
    if (needs_eps && cfg.eps_grid.empty()) out.emplace_back("eps_grid is empty");
    if (needs_mag && cfg.magnitude_grid.empty()) out.emplace_back("magnitude_grid is empty");
    for (double e : cfg.eps_grid)
        if (!(e >= 0.0 && e <= 1.0)) out.push_back(detail::cat("eps_grid value ", e, " outside [0,1]"));
    for (double m : cfg.magnitude_grid)
        if (!(m >= 0.0) || !std::isfinite(m)) out.push_back(detail::cat("magnitude_grid value ", m, " is negative"));
    if (!(cfg.noise.slip_prob >= 0.0 && cfg.noise.slip_prob < 1.0)) out.emplace_back("noise.slip_prob outside [0,1)");
    if (!(cfg.noise.reward_std >= 0.0)) out.emplace_back("noise.reward_std is negative");
    for (auto& s : validate_collection(cfg.collection, n_states)) out.push_back("collection: " + s);
    return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/**
 * Named sweeps. The base `<mdp>-random` presets use uniform starts and a
 * uniformly random behaviour policy; `-mixed` and `-optimal` raise the share
 * of optimal actions to 0.5 and 1, and `-start-*` restrict start states.
 */
inline std::map<std::string, ExperimentConfig> builtin_presets() {
    std::map<std::string, ExperimentConfig> out;
    struct Base {
        std::string prefix, mdp;
        std::size_t n, l;
        std::vector<std::pair<std::string, StartMode>> starts;
    };
    const std::vector<Base> bases = {
        {"grid", "grid", 15, 10,
         {{"start-5", StartMode::set({0, 1, 2, 3, 4})}, {"start-1", StartMode::fixed(0)}}},
        {"twogoals", "two_goals", 15, 10, {{"start-1", StartMode::fixed(1)}, {"start-10", StartMode::fixed(10)}}},
        {"cliff", "cliff", 25, 20,
         {{"start-s", StartMode::fixed(cliff::kStart)}, {"start-near-goal", StartMode::set(cliff::near_goal_states())}}},
    };
    for (const auto& b : bases) {
        ExperimentConfig base;
        base.mdp = b.mdp;
        base.collection.n_trajectories = b.n;
        base.collection.trajectory_length = b.l;
        base.collection.p_optimal = 0.0;
        base.collection.start = StartMode::uniform();
        base.master_seed = 20210101;

        auto add = [&](const std::string& suffix, auto&& tweak) {
            ExperimentConfig c = base;
            c.name = b.prefix + "-" + suffix;
            tweak(c);
            out.emplace(c.name, std::move(c));
        };
        add("random", [](ExperimentConfig&) {});
        add("mixed", [](ExperimentConfig& c) { c.collection.p_optimal = 0.5; });
        add("optimal", [](ExperimentConfig& c) { c.collection.p_optimal = 1.0; });
        for (const auto& [suffix, mode] : b.starts)
            add("random-" + suffix, [&](ExperimentConfig& c) { c.collection.start = mode; });
    }
    return out;
}

inline ExperimentConfig preset(const std::string& name) {
    auto all = builtin_presets();
    auto it = all.find(name);
    if (it == all.end()) throw ArgumentError("unknown preset '" + name + "'");
    return it->second;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// One (method, strength) cell of the sweep.
struct SweepCell {
    Method method;
    double strength;
};

/// Cells sorted by (method name, strength), duplicates removed.
inline std::vector<SweepCell> sweep_cells(const ExperimentConfig& cfg) {
    std::vector<SweepCell> cells;
    for (auto m : cfg.methods) {
        switch (m) {
        case Method::none: cells.push_back({m, 0.0}); break;
        case Method::dirichlet:
            for (double g : cfg.magnitude_grid) cells.push_back({m, g});
            break;
        case Method::discount:
        case Method::eps_greedy:
            for (double e : cfg.eps_grid) cells.push_back({m, e});
            break;
        }
    }
    auto key = [](const SweepCell& c) { return std::make_pair(std::string(to_string(c.method)), c.strength); };
    std::sort(cells.begin(), cells.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    cells.erase(std::unique(cells.begin(), cells.end(), [&](const auto& a, const auto& b) { return key(a) == key(b); }),
                cells.end());
    return cells;
}

struct CellOutcome {
    double loss = 0.0;
    double mse_plain = 0.0;
    double mse_absorbing = 0.0;
};

/// Everything a replication needs, shared read-only across workers.
struct ExperimentContext {
    TabularMdp mdp;
    DeterministicPolicy optimal;
    Vector loss_start;
    std::vector<SweepCell> cells;
};

inline RegularizedModel regularize(const CountsTensor& counts, const EstimatedModel& model, const SweepCell& cell,
                                   double gamma) {
    switch (cell.method) {
    case Method::none: return unregularized(model, gamma);
    case Method::dirichlet: return dirichlet_posterior_mean(counts, cell.strength, model.r_hat, gamma);
    case Method::discount: return discount_blend(model, cell.strength, gamma);
    case Method::eps_greedy: return eps_greedy_blend(model, cell.strength, gamma);
    }
    throw ArgumentError("bad method");
}

/// One pass of the estimate / regularize / plan / score loop on a fresh dataset.
inline std::vector<CellOutcome> run_replication(const ExperimentContext& ctx, const ExperimentConfig& cfg,
                                                std::size_t index) {
    const auto& mdp = ctx.mdp;
    const Dataset data = generate_dataset(mdp, ctx.optimal, cfg.collection, child_seed(cfg.master_seed, index));
    const CountsTensor counts = count(data, mdp.n_states, mdp.n_actions);
    const EstimatedModel model = mle_model(counts, mdp.absorbing);
    std::vector<CellOutcome> out;
    out.reserve(ctx.cells.size());
    for (const auto& cell : ctx.cells) {
        const auto reg = regularize(counts, model, cell, mdp.gamma);
        const auto plan = policy_iteration(reg.planning_problem(), cfg.tie_tol);
        const auto loss = policy_loss(mdp, plan.policy, ctx.optimal, ctx.loss_start);
        const auto mse = transition_mse(mdp.transition, reg);
        out.push_back({loss.loss, mse.mse_plain, mse.mse_absorbing});
    }
    return out;
}

/// Raised when a replication fails; carries the replication index.
class ReplicationError : public std::runtime_error {
public:
    ReplicationError(std::size_t index, const std::string& what)
        : std::runtime_error(detail::cat("replication ", index, " failed: ", what)), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

inline ExperimentContext make_context(const ExperimentConfig& cfg) {
    ExperimentContext ctx;
    ctx.mdp = resolve_mdp(cfg);
    auto problems = validate_config(cfg, ctx.mdp.n_states);
    if (!problems.empty()) throw ValidationError(std::move(problems));
    ctx.optimal = policy_iteration(PlanningProblem::from_mdp(ctx.mdp), cfg.tie_tol).policy;
    ctx.loss_start = cfg.collection.start.distribution(ctx.mdp.n_states);
    ctx.cells = sweep_cells(cfg);
    return ctx;
}

/**
 * Runs the sweep. Replications are spread over `workers` threads; results are
 * aggregated in replication order afterwards so every aggregate is
 * independent of scheduling.
 */
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, std::size_t workers = 1) {
    const ExperimentContext ctx = make_context(cfg);
    const std::size_t reps = cfg.replications;
    std::vector<std::vector<CellOutcome>> per_rep(reps);

    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::optional<std::size_t> failed_index;
    std::string failed_what;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= reps) return;
            try {
                per_rep[i] = run_replication(ctx, cfg, i);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mutex);
                if (!failed_index || i < *failed_index) {
                    failed_index = i;
                    failed_what = e.what();
                }
            }
        }
    };
    workers = std::clamp<std::size_t>(workers, 1, reps);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failed_index) throw ReplicationError(*failed_index, failed_what);

    const std::string hash = config_hash(cfg);
    std::vector<ResultRow> rows;
    for (std::size_t c = 0; c < ctx.cells.size(); ++c) {
        double sum = 0.0, sum_plain = 0.0, sum_abs = 0.0;
        for (std::size_t i = 0; i < reps; ++i) {
            sum += per_rep[i][c].loss;
            sum_plain += per_rep[i][c].mse_plain;
            sum_abs += per_rep[i][c].mse_absorbing;
        }
        const double n = static_cast<double>(reps);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < reps; ++i) {
            const double d = per_rep[i][c].loss - mean;
            ss += d * d;
        }
        const double stderr_loss = reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        rows.push_back({ctx.cells[c].method, ctx.cells[c].strength, mean, stderr_loss, sum_plain / n, sum_abs / n,
                        reps, hash});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "method,strength,mean_loss,stderr_loss,mean_mse_plain,mean_mse_absorbing,replications,config_hash";

namespace detail {

inline std::string g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

} // namespace detail

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows)
        out << to_string(r.method) << ',' << detail::g12(r.strength) << ',' << detail::g12(r.mean_loss) << ','
            << detail::g12(r.stderr_loss) << ',' << detail::g12(r.mean_mse_plain) << ','
            << detail::g12(r.mean_mse_absorbing) << ',' << r.replications << ',' << r.config_hash << '\n';
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    if (rows.empty()) throw ArgumentError("emit_csv: no rows");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out, rows);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline std::vector<ResultRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("header", "unexpected CSV header");
    std::vector<ResultRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 8) throw ParseError(detail::cat("line ", lineno), "expected 8 columns");
        try {
            rows.push_back({parse_method(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                            std::stod(f[5]), static_cast<std::size_t>(std::stoull(f[6])), f[7]});
        } catch (const std::exception& e) {
            throw ParseError(detail::cat("line ", lineno), e.what());
        }
    }
    return rows;
}

/// Fixed-width table sorted by (method, strength).
inline std::string emit_summary(std::vector<ResultRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return std::make_pair(std::string(to_string(a.method)), a.strength) <
               std::make_pair(std::string(to_string(b.method)), b.strength);
    });
    std::ostringstream os;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-11s %10s %14s %12s %14s %14s\n", "method", "strength", "mean_loss", "stderr",
                  "mse_plain", "mse_absorbing");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-11s %10.4g %14.6g %12.4g %14.6g %14.6g\n",
                      std::string(to_string(r.method)).c_str(), r.strength, r.mean_loss, r.stderr_loss,
                      r.mean_mse_plain, r.mean_mse_absorbing);
        os << buf;
    }
    return os.str();
}

} // namespace regmdp
