// SPDX-License-Identifier: MIT
//
// mwrelay — CLI parsing and experiment dispatch implementation.

#include "mwrelay/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "mwrelay/analytics.hpp"
#include "mwrelay/simulator.hpp"

namespace mwrelay {

namespace {

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = {
        "closed-form", "monte-carlo", "sweep-m", "sweep-tau",
        "cdf",         "compare-two-way", "scaling"};
    return names;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> split_csv_doubles(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(key + ": empty entry in list '" + s + "'");
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError(key + ": cannot parse number '" + item + "'");
        }
        if (pos != item.size()) throw ConfigError(key + ": cannot parse number '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError(key + ": list must be nonempty");
    return out;
}

// Flat key=value config file -> option tokens (plus an optional subcommand).
void read_config_file(const std::string& path, std::string& sub_out,
                      std::vector<std::string>& tokens_out) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    std::string line;
    while (std::getline(f, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.rfind("--", 0) == 0) key = key.substr(2);
        if (key.empty()) throw ConfigError("config: empty key in line '" + line + "'");
        if (key == "subcommand") {
            sub_out = val;
            continue;
        }
        // An empty value means "keep the default". Emitting "--key=" would
        // make the parser treat the next token as this option's value.
        if (val.empty()) continue;
        tokens_out.push_back("--" + key + "=" + val);
    }
}

void add_options(CLI::App* sub, RunConfig& cfg) {
    auto last = [](CLI::Option* o) { o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };
    last(sub->add_option("--M", cfg.M, "Relay antennas"));
    last(sub->add_option("--K", cfg.K, "Users"));
    last(sub->add_option("--T", cfg.T, "Coherence interval (symbols)"));
    last(sub->add_option("--tau", cfg.tau, "Pilot length; -1 means tau = K"));
    last(sub->add_option("--snr-db", cfg.snr_db, "User data power P_u in dB"));
    last(sub->add_option("--pp-db", cfg.pp_db, "Pilot power P_p in dB"));
    last(sub->add_option("--pr-db", cfg.pr_db, "Relay power P_r in dB"));
    last(sub->add_option("--beta", cfg.beta,
                         "Large-scale coefficient: one value or K comma-separated values"));
    last(sub->add_flag("--geometry", cfg.use_geometry,
                       "Draw beta from one random drop of the disk geometry"));
    last(sub->add_option("--disk-diameter", cfg.disk_diameter, "Cell disk diameter (m)"));
    last(sub->add_option("--ref-distance", cfg.ref_distance, "Path-loss reference distance (m)"));
    last(sub->add_option("--path-loss-exp", cfg.path_loss_exp, "Path-loss exponent"));
    last(sub->add_option("--shadow-std-db", cfg.shadow_std_db, "Shadowing std dev (dB)"));
    last(sub->add_option("--trials", cfg.trials, "Monte-Carlo trials"));
    last(sub->add_option("--seed", cfg.seed, "Master seed"));
    last(sub->add_option("--workers", cfg.workers, "Worker threads"));
    last(sub->add_option("--engines", cfg.engines, "closed | mc | both"));
    last(sub->add_option("--m-grid", cfg.m_grid, "Comma-separated antenna grid"));
    last(sub->add_option("--snr-list", cfg.snr_list, "Comma-separated SNR grid (dB)"));
    last(sub->add_option("--scale-m-grid", cfg.scale_m_grid,
                         "Comma-separated antenna grid for power scaling"));
    last(sub->add_flag("--full-tau-range", cfg.full_tau_range,
                       "Search tau over [K, T] instead of [K, T/2]"));
    last(sub->add_option("--drops", cfg.drops, "Random user drops for the CDF"));
    last(sub->add_option("--eu-db", cfg.eu_db, "E_u in dB for power scaling"));
    last(sub->add_option("--er-db", cfg.er_db, "E_r in dB for power scaling"));
    last(sub->add_option("--out", cfg.out, "Output CSV path (empty or '-': stdout)"));
    last(sub->add_flag("--json", cfg.json, "Also write a JSON mirror next to the CSV"));
}

void merge_record(ResultTable& table, const ExperimentRecord& rec) {
    table.columns = rec.columns;
    table.rows = rec.rows;
    for (const auto& d : rec.derived) table.derived.push_back(d);
    table.undersampled = table.undersampled || rec.undersampled;
}

}  // namespace

SystemParams RunConfig::params() const {
    SystemParams p;
    p.M = M;
    p.K = K;
    p.T = T;
    p.tau = tau < 0 ? K : tau;
    p.P_u = db_to_linear(snr_db);
    p.P_p = db_to_linear(pp_db);
    p.P_r = db_to_linear(pr_db);
    p.validate();
    return p;
}

FadingSpec RunConfig::fading() const {
    FadingSpec f;
    f.use_geometry = use_geometry;
    f.geometry.D_d = disk_diameter;
    f.geometry.d_0 = ref_distance;
    f.geometry.nu = path_loss_exp;
    f.geometry.sigma_z_dB = shadow_std_db;
    if (f.geometry.D_d <= 0) throw ConfigError("disk-diameter: must be positive");
    if (f.geometry.d_0 <= 0) throw ConfigError("ref-distance: must be positive");
    if (f.geometry.sigma_z_dB < 0) throw ConfigError("shadow-std-db: must be nonnegative");
    const std::vector<double> vals = split_csv_doubles(beta, "beta");
    for (double v : vals)
        if (v <= 0) throw ConfigError("beta: coefficients must be positive");
    if (vals.size() == 1) {
        f.beta = vals[0];
    } else {
        if (static_cast<int>(vals.size()) != K)
            throw ConfigError("beta: expected 1 or K=" + std::to_string(K) + " values, got " +
                              std::to_string(vals.size()));
        f.beta_list = vals;
    }
    return f;
}

EngineChoice RunConfig::engine_choice() const {
    if (engines == "closed" || engines == "closed-form") return EngineChoice::closed_form;
    if (engines == "mc" || engines == "monte-carlo") return EngineChoice::monte_carlo;
    if (engines == "both") return EngineChoice::both;
    throw ConfigError("engines: must be one of closed | mc | both, got '" + engines + "'");
}

std::vector<double> RunConfig::m_grid_values() const { return split_csv_doubles(m_grid, "m-grid"); }
std::vector<double> RunConfig::snr_list_values() const {
    return split_csv_doubles(snr_list, "snr-list");
}
std::vector<double> RunConfig::scale_m_grid_values() const {
    return split_csv_doubles(scale_m_grid, "scale-m-grid");
}
double RunConfig::E_u() const { return db_to_linear(eu_db); }
double RunConfig::E_r() const { return db_to_linear(er_db); }

RunConfig parse_config(const std::vector<std::string>& args) {
    // Extract --config and locate the subcommand.
    std::vector<std::string> rest;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("config: missing file path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }

    std::string file_sub;
    std::vector<std::string> file_tokens;
    if (!config_path.empty()) read_config_file(config_path, file_sub, file_tokens);

    const auto& names = subcommand_names();
    std::size_t sub_pos = rest.size();
    for (std::size_t i = 0; i < rest.size(); ++i)
        if (std::find(names.begin(), names.end(), rest[i]) != names.end()) {
            sub_pos = i;
            break;
        }

    // File tokens go right after the subcommand; explicit flags follow and win.
    std::vector<std::string> tokens;
    if (sub_pos < rest.size()) {
        tokens.insert(tokens.end(), rest.begin(), rest.begin() + sub_pos + 1);
        tokens.insert(tokens.end(), file_tokens.begin(), file_tokens.end());
        tokens.insert(tokens.end(), rest.begin() + sub_pos + 1, rest.end());
    } else if (!file_sub.empty()) {
        tokens.push_back(file_sub);
        tokens.insert(tokens.end(), file_tokens.begin(), file_tokens.end());
        tokens.insert(tokens.end(), rest.begin(), rest.end());
    } else {
        tokens = rest;  // plain --help, or an error CLI11 will explain
    }

    RunConfig cfg;
    CLI::App app{"mwrelay — multi-way massive MIMO relaying with maximum-ratio processing"};
    app.set_version_flag("--version", "mwrelay 1.0.0");
    app.require_subcommand(0, 1);
    for (const auto& name : names) {
        CLI::App* sub = app.add_subcommand(name, "");
        add_options(sub, cfg);
    }
    app.get_subcommand("closed-form")->description("Closed-form SINR/SE per user");
    app.get_subcommand("monte-carlo")->description("Monte-Carlo SINR/SE per user");
    app.get_subcommand("sweep-m")->description("Sum SE vs. antenna count");
    app.get_subcommand("sweep-tau")->description("Sum SE vs. pilot length per SNR, with argmax");
    app.get_subcommand("cdf")->description("Sum-SE CDF over random drops, with two-way baseline");
    app.get_subcommand("compare-two-way")->description("Per-user multi-way vs. two-way SE");
    app.get_subcommand("scaling")->description("Power-scaling convergence to the SE limits");

    std::vector<const char*> argv;
    argv.push_back("mwrelay");
    for (const auto& t : tokens) argv.push_back(t.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        throw CliExit{0};
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        throw CliExit{0};
    } catch (const CLI::CallForVersion&) {
        std::cout << app.version() << "\n";
        throw CliExit{0};
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }

    const auto subs = app.get_subcommands();
    if (subs.empty())
        throw ConfigError("subcommand: expected one of closed-form | monte-carlo | sweep-m | "
                          "sweep-tau | cdf | compare-two-way | scaling");
    cfg.subcommand = subs[0]->get_name();

    // Fail early on malformed values so errors name the offending key.
    (void)cfg.params();
    (void)cfg.fading();
    (void)cfg.engine_choice();
    return cfg;
}

std::vector<std::pair<std::string, std::string>> echo_config(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> e;
    auto add = [&](const std::string& k, const std::string& v) { e.emplace_back(k, v); };
    add("subcommand", cfg.subcommand);
    add("M", std::to_string(cfg.M));
    add("K", std::to_string(cfg.K));
    add("T", std::to_string(cfg.T));
    add("tau", std::to_string(cfg.tau));
    add("snr-db", format_sig9(cfg.snr_db));
    add("pp-db", format_sig9(cfg.pp_db));
    add("pr-db", format_sig9(cfg.pr_db));
    add("beta", cfg.beta);
    add("geometry", cfg.use_geometry ? "1" : "0");
    add("disk-diameter", format_sig9(cfg.disk_diameter));
    add("ref-distance", format_sig9(cfg.ref_distance));
    add("path-loss-exp", format_sig9(cfg.path_loss_exp));
    add("shadow-std-db", format_sig9(cfg.shadow_std_db));
    add("trials", std::to_string(cfg.trials));
    add("seed", std::to_string(cfg.seed));
    // workers deliberately not echoed: it cannot affect any result byte.
    add("engines", cfg.engines);
    add("m-grid", cfg.m_grid);
    add("snr-list", cfg.snr_list);
    add("scale-m-grid", cfg.scale_m_grid);
    add("full-tau-range", cfg.full_tau_range ? "1" : "0");
    add("drops", std::to_string(cfg.drops));
    add("eu-db", format_sig9(cfg.eu_db));
    add("er-db", format_sig9(cfg.er_db));
    add("out", cfg.out);
    add("json", cfg.json ? "1" : "0");
    return e;
}

ResultTable dispatch(const RunConfig& cfg) {
    const SystemParams params = cfg.params();
    const FadingSpec fading = cfg.fading();

    ResultTable table;
    table.config = echo_config(cfg);
    table.notes.emplace_back("artifact", "mwrelay 1.0.0");

    if (cfg.subcommand == "closed-form") {
        const FadingProfile profile = resolve_profile(fading, params, cfg.seed);
        const ClosedFormReport rep = se_per_user(params, profile);
        table.columns = {"k", "sinr_closed", "se_closed"};
        for (int k = 0; k < params.K; ++k)
            table.rows.push_back({static_cast<double>(k), rep.sinr(k), rep.se(k)});
        table.derived.emplace_back("alpha1", rep.alpha1);
        table.derived.emplace_back("se_sum_closed", rep.se_sum);
    } else if (cfg.subcommand == "monte-carlo") {
        const FadingProfile profile = resolve_profile(fading, params, cfg.seed);
        const McSummary s =
            run_trials_summary(params, profile, cfg.trials, cfg.seed, cfg.workers);
        table.columns = {"k", "sinr_mc", "sinr_halfwidth", "se_mc", "se_halfwidth"};
        for (int k = 0; k < params.K; ++k) {
            const TrialBatchResult& r = s.per_user[k];
            table.rows.push_back({static_cast<double>(k), r.sinr_hat, r.half_width.sinr,
                                  r.se_hat, r.half_width.se});
        }
        table.derived.emplace_back("alpha_hat", s.alpha_hat);
        table.derived.emplace_back("alpha_halfwidth", s.alpha_half_width);
        table.derived.emplace_back("se_sum_mc", s.se_sum);
        table.derived.emplace_back("se_sum_mc_halfwidth", s.se_sum_half_width);
        table.undersampled = s.undersampled;
    } else if (cfg.subcommand == "sweep-m") {
        SweepSpec spec;
        spec.variable = SweepVariable::antennas;
        spec.grid = cfg.m_grid_values();
        spec.base = params;
        spec.fading = fading;
        spec.engines = cfg.engine_choice();
        spec.n_trials = cfg.trials;
        spec.seed = cfg.seed;
        spec.workers = cfg.workers;
        merge_record(table, sweep(spec));
    } else if (cfg.subcommand == "sweep-tau") {
        const std::vector<double> snrs = cfg.snr_list_values();
        const int tau_hi = cfg.full_tau_range ? params.T : std::max(params.K, params.T / 2);
        SweepSpec spec;
        spec.variable = SweepVariable::pilot_length;
        for (int tau = params.K; tau <= tau_hi; ++tau) spec.grid.push_back(tau);
        spec.base = params;
        spec.fading = fading;
        spec.engines = EngineChoice::closed_form;
        spec.seed = cfg.seed;

        table.columns = {"tau"};
        table.rows.resize(spec.grid.size());
        for (std::size_t i = 0; i < spec.grid.size(); ++i) table.rows[i] = {spec.grid[i]};
        for (double snr : snrs) {
            spec.base.P_u = db_to_linear(snr);
            const ExperimentRecord rec = sweep(spec);
            table.columns.push_back("se_sum_snr(" + format_sig9(snr) + "dB)");
            for (std::size_t i = 0; i < rec.rows.size(); ++i)
                table.rows[i].push_back(rec.rows[i][1]);
        }
        for (const OptimalTau& o :
             optimal_tau(params, fading, snrs, cfg.full_tau_range, cfg.seed)) {
            table.derived.emplace_back("tau_star_snr(" + format_sig9(o.snr_db) + "dB)",
                                       static_cast<double>(o.tau_star));
            table.derived.emplace_back("se_sum_at_star_snr(" + format_sig9(o.snr_db) + "dB)",
                                       o.se_sum);
        }
    } else if (cfg.subcommand == "cdf") {
        CdfSpec spec;
        spec.n_drops = cfg.drops;
        spec.geometry = fading.geometry;
        spec.base = params;
        spec.include_two_way = true;
        spec.seed = cfg.seed;
        merge_record(table, cdf_over_drops(spec));
    } else if (cfg.subcommand == "compare-two-way") {
        const FadingProfile profile = resolve_profile(fading, params, cfg.seed);
        const ClosedFormReport rep = se_per_user(params, profile);
        table.columns = {"k", "se_multiway", "se_twoway"};
        double tw_sum = 0;
        for (int k = 0; k < params.K; ++k) {
            const double tw = two_way_se(params, profile, k);
            tw_sum += tw;
            table.rows.push_back({static_cast<double>(k), rep.se(k), tw});
        }
        table.derived.emplace_back("se_sum_multiway", rep.se_sum);
        table.derived.emplace_back("se_sum_twoway", tw_sum);
    } else if (cfg.subcommand == "scaling") {
        merge_record(table, power_scaling_study(params, fading, cfg.E_u(), cfg.E_r(),
                                                cfg.scale_m_grid_values(), cfg.seed));
    } else {
        throw ConfigError("subcommand: unknown '" + cfg.subcommand + "'");
    }
    return table;
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    try {
        const RunConfig cfg = parse_config(args);
        const ResultTable table = dispatch(cfg);
        write_results(table, cfg.out, cfg.json);
        if (table.undersampled) {
            std::cerr << "mwrelay: result is undersampled (a 95% half-width exceeds 10% of its "
                         "statistic); increase --trials\n";
            return 2;
        }
        return 0;
    } catch (const CliExit& e) {
        return e.code;
    } catch (const ConfigError& e) {
        std::cerr << "mwrelay: configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "mwrelay: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mwrelay
