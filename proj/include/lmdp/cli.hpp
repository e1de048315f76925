#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "generators/augment.hpp"
#include "generators/sat.hpp"

namespace lmdp {

namespace cli {

inline std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (tok.empty() || *end != '\0') throw PreconditionError("not a number: '" + tok + "'");
        out.push_back(v);
    }
    return out;
}

/// "01" → {0, 1}; also accepts comma-separated integers.
inline std::vector<int> parse_actions(const std::string& s) {
    std::vector<int> out;
    if (s.find(',') != std::string::npos) {
        for (double v : parse_numbers(s)) out.push_back(static_cast<int>(v));
        return out;
    }
    for (char c : s) {
        require(c >= '0' && c <= '9', "action string must consist of digits");
        out.push_back(c - '0');
    }
    return out;
}

/// "1,-2,3;2,3" → clauses; n is the largest variable index unless given.
inline Cnf parse_cnf(const std::string& s, int n) {
    Cnf f;
    std::stringstream ss(s);
    std::string clause;
    while (std::getline(ss, clause, ';')) {
        std::vector<int> c;
        for (double v : parse_numbers(clause)) {
            c.push_back(static_cast<int>(v));
            f.n = std::max(f.n, std::abs(static_cast<int>(v)));
        }
        f.clauses.push_back(std::move(c));
    }
    if (n > 0) f.n = n;
    return f;
}

inline void write_out(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / name).string(), text);
}

inline const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::schema: return "schema";
    case ErrorKind::budget: return "budget";
    case ErrorKind::numerical: return "numerical";
    }
    return "usage";
}

inline int fail(std::ostream& err, ErrorKind kind, const std::string& msg) {
    err << json{{"error", kind_name(kind)}, {"message", msg}, {"exit_code", static_cast<int>(kind)}}.dump() << "\n";
    return static_cast<int>(kind);
}

} // namespace cli

/// Entry point of the lmdp_lab command line. Returns the process exit status.
inline int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Latent MDP lab: planning, learning and hard-instance generation"};
    app.require_subcommand(1);

    std::string model_path, out_path, config_path, policy_path;
    std::uint64_t seed = 0, budget_n = 0;
    double epsilon = 0.1;
    int window = 0;

    auto add_budget = [&](CLI::App* c) {
        c->add_option("--budget", budget_n, "Enumeration leaf budget (default 1e7 or LMDP_LAB_BUDGET)");
    };

    auto* plan_cmd = app.add_subcommand("plan", "Short-memory planning with context inference");
    plan_cmd->add_option("--model", model_path, "Model document")->required();
    plan_cmd->add_option("--epsilon", epsilon, "Target suboptimality; picks the window");
    plan_cmd->add_option("--window", window, "Explicit window W (overrides --epsilon)");
    std::string stitch = "decoded";
    plan_cmd->add_option("--stitch", stitch, "decoded | mixture")->check(CLI::IsMember({"decoded", "mixture"}));
    plan_cmd->add_option("--out", out_path, "Output directory for policy.json and certificate.csv");
    add_budget(plan_cmd);

    auto* sim_cmd = app.add_subcommand("simulate", "Sample episodes");
    int episodes = 1;
    sim_cmd->add_option("--model", model_path, "Model document")->required();
    sim_cmd->add_option("--policy", policy_path, "Policy document (uniform random when omitted)");
    sim_cmd->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", seed, "Random seed");
    sim_cmd->add_option("--out", out_path, "Output directory for episodes.jsonl");

    auto* learn_cmd = app.add_subcommand("learn", "OMLE over a finite model class");
    learn_cmd->add_option("--config", config_path, "Learning config JSON")->required();
    learn_cmd->add_option("--seed", seed, "Random seed");
    learn_cmd->add_option("--out", out_path, "Output directory for trace.jsonl and summary.json");
    add_budget(learn_cmd);

    auto* gen_cmd = app.add_subcommand("gen-hard", "Generate hard instances");
    gen_cmd->require_subcommand(1);
    int n = 3, A = 2, H = 0, N = 0, r = 1, d = 0, w = 2, nvars = 0;
    double delta = 0.1, lambda = 1.0;
    std::string theta, preset, cnf;
    bool reference = false;
    auto* g_lock = gen_cmd->add_subcommand("comb-lock", "Combination lock");
    g_lock->add_option("--n", n)->required();
    g_lock->add_option("--A", A);
    g_lock->add_option("--H", H, "Horizon (default n+1)");
    g_lock->add_option("--theta", theta, "Lock code, e.g. 01");
    g_lock->add_flag("--reference", reference, "Reference model with identical components");
    auto* g_dec = gen_cmd->add_subcommand("comb-lock-decodable", "N-step decodable combination lock");
    g_dec->add_option("--N", N)->required();
    g_dec->add_option("--n", n)->required();
    g_dec->add_option("--A", A);
    g_dec->add_option("--theta", theta);
    auto* g_fam = gen_cmd->add_subcommand("family", "Separated family with matched moments");
    g_fam->add_option("--preset", preset, "a | b | computed")->check(CLI::IsMember({"a", "b", "computed"}));
    g_fam->add_option("--r", r);
    g_fam->add_option("--d", d);
    g_fam->add_option("--H", H)->required();
    g_fam->add_option("--delta", delta);
    g_fam->add_option("--lambda", lambda);
    auto* g_aug = gen_cmd->add_subcommand("augmented-lock", "Combination lock augmented with a preset (a) family");
    g_aug->add_option("--n", n)->required();
    g_aug->add_option("--A", A);
    g_aug->add_option("--theta", theta);
    g_aug->add_option("--delta", delta);
    auto* g_sat = gen_cmd->add_subcommand("sat", "3SAT embedding");
    g_sat->add_option("--cnf", cnf, "Clauses as '1,-2,3;2,3'")->required();
    g_sat->add_option("--vars", nvars, "Number of variables (default: largest index)");
    g_sat->add_option("--w", w);
    g_sat->add_option("--delta", delta, "Separation; 0 for the plain gadget");
    for (auto* c : {g_lock, g_dec, g_fam, g_aug, g_sat}) c->add_option("--out", out_path, "Output file");

    auto* sep_cmd = app.add_subcommand("check-separation", "Separation certificates and ϖ profile");
    int hmax = 8;
    sep_cmd->add_option("--model", model_path)->required();
    sep_cmd->add_option("--hmax", hmax)->check(CLI::PositiveNumber);
    sep_cmd->add_option("--out", out_path, "Output directory for varpi.csv and summary.json");
    add_budget(sep_cmd);

    auto* div_cmd = app.add_subcommand("divergence", "TV, squared Hellinger and Bhattacharyya");
    std::string p_str, q_str;
    div_cmd->add_option("--p", p_str)->required();
    div_cmd->add_option("--q", q_str)->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimal value");
    std::string method = "tree";
    oracle_cmd->add_option("--model", model_path)->required();
    oracle_cmd->add_option("--method", method, "tree | belief")->check(CLI::IsMember({"tree", "belief"}));
    oracle_cmd->add_option("--out", out_path, "Output directory for optimal_policy.json");
    add_budget(oracle_cmd);

    auto* exp_cmd = app.add_subcommand("experiment", "Run a sweep described by a config file");
    exp_cmd->add_option("--config", config_path)->required();
    exp_cmd->add_option("--out", out_path, "Output directory for results.csv and record.json");
    add_budget(exp_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        return cli::fail(err, ErrorKind::usage, e.what());
    }

    try {
        Budget budget = Budget::from_env();
        if (budget_n > 0) budget.max_leaves = budget_n;

        if (*plan_cmd) {
            Lmdp M = load_model(model_path);
            int W = window;
            if (W <= 0) {
                auto w0 = choose_window(M, epsilon);
                if (!w0) throw NumericalError("no certified window <= H for epsilon = " + fmt_double(epsilon));
                W = *w0;
            }
            PlanOptions po;
            po.budget = budget;
            po.stitch = stitch == "mixture" ? StitchRule::full_mixture : StitchRule::decoded_only;
            auto P = plan(M, W, po);
            json summary = {{"window", W}, {"certificate", P.certificate}};
            if (budget.fits_power(static_cast<std::uint64_t>(M.S()) * M.A(), M.H()))
                summary["value"] = value(M, *P.to_policy(budget), budget);
            if (!out_path.empty()) {
                cli::write_out(out_path, "policy.json", planner_to_json(P).dump(1) + "\n");
                std::string csv = "s1,initial_prob,v_hat\n";
                for (int s = 0; s < M.S(); ++s) {
                    double p0 = 0.0;
                    for (int m = 0; m < M.L(); ++m) p0 += M.rho()[m] * M.nu(m)[s];
                    csv += std::to_string(s) + "," + fmt_double(p0) + "," + fmt_double(P.head_value[0][s]) + "\n";
                }
                csv += "expected,1," + fmt_double(P.certificate) + "\n";
                cli::write_out(out_path, "certificate.csv", csv);
            }
            out << summary.dump() << "\n";
        } else if (*sim_cmd) {
            Lmdp M = load_model(model_path);
            PolicyPtr pi = policy_path.empty() ? Policy::uniform(M.S(), M.A(), M.H())
                                               : policy_from_json(parse_json(read_file(policy_path), policy_path));
            std::mt19937_64 rng(seed);
            std::string lines;
            for (int i = 0; i < episodes; ++i) {
                auto t = simulate(M, pi, rng);
                lines += json{{"latent", t.latent}, {"states", t.states}, {"actions", t.actions}}.dump() + "\n";
            }
            if (out_path.empty()) out << lines;
            else cli::write_out(out_path, "episodes.jsonl", lines);
        } else if (*learn_cmd) {
            json cfg = parse_json(read_file(config_path), config_path);
            std::vector<Lmdp> models;
            int truth = 0;
            OmleConfig oc;
            std::vector<int> windows;
            try {
                for (const auto& p : cfg.at("models")) models.push_back(load_model(p.get<std::string>()));
                truth = cfg.value("truth", 0);
                oc.K = cfg.value("K", oc.K);
                oc.W = cfg.value("W", models.front().H());
                oc.epsilon_s = cfg.value("epsilon_s", oc.epsilon_s);
                oc.beta = cfg.value("beta", 0.0);
                oc.p = cfg.value("p", oc.p);
                for (int w2 = 1; w2 <= models.front().H(); ++w2) windows.push_back(w2);
                windows = cfg.value("windows", windows);
            } catch (const json::exception& e) {
                throw SchemaError(std::string("learn config: ") + e.what());
            }
            require(truth >= 0 && truth < static_cast<int>(models.size()), "truth index out of range");
            oc.seed = seed;
            oc.budget = budget;
            ModelClass cls(models);
            SimulatedEnvironment env(cls[truth], splitmix64(seed ^ 0x5eedull));
            auto res = omle_run(cls, env, oc, planner_candidates(windows, budget));
            json summary = {{"K", oc.K},
                            {"beta", res.beta},
                            {"counts", res.counts},
                            {"output_value", value(cls[truth], *res.output, budget)},
                            {"optimal_value", brute_force_optimal(cls[truth], budget).value}};
            if (!out_path.empty()) {
                cli::write_out(out_path, "trace.jsonl", res.trace_jsonl());
                cli::write_out(out_path, "summary.json", summary.dump(2) + "\n");
                cli::write_out(out_path, "output_policy.json", policy_to_json(*res.output).dump() + "\n");
            }
            out << summary.dump() << "\n";
        } else if (*gen_cmd) {
            std::string text;
            auto code = [&](int len) { return theta.empty() ? std::vector<int>(len, 0) : cli::parse_actions(theta); };
            if (*g_lock) {
                const int HH = H > 0 ? H : n + 1;
                text = model_to_json(reference ? comb_lock_reference(n, A, HH) : comb_lock(n, A, HH, code(n - 1))).dump(1);
            } else if (*g_dec) {
                text = model_to_json(comb_lock_decodable(N, n, A, code(n - 1))).dump(1);
            } else if (*g_fam) {
                Family f;
                if (preset == "a") f = family_preset_a(delta, H);
                else if (preset == "b") f = family_preset_b(delta, H, lambda, d);
                else {
                    require(d > 0, "computed family needs --d");
                    f = make_family(r, d, H, delta);
                }
                if (preset == "a" || preset == "b") f = tensor_family(f, r);
                text = family_to_json(f).dump(1);
            } else if (*g_aug) {
                int bits = 0;
                while ((1 << bits) < n) ++bits;
                Family f = tensor_family(family_preset_a(delta, n + 1), bits).truncate(n);
                text = model_to_json(augment_lmdp(comb_lock(n, A, n + 1, code(n - 1)), f)).dump(1);
            } else {
                Cnf f = cli::parse_cnf(cnf, nvars);
                text = model_to_json(delta > 0.0 ? sat_to_separated_lmdp(f, w, delta) : sat_to_lmdp(f, w)).dump(1);
            }
            if (out_path.empty()) out << text << "\n";
            else write_file(out_path, text + "\n");
        } else if (*sep_cmd) {
            Lmdp M = load_model(model_path);
            auto prof = certified_varpi(M, hmax);
            std::string csv = "h,varpi,nondecreasing\n";
            bool mono = true;
            for (int h = 1; h <= hmax; ++h) {
                if (h > 1 && prof.at(h) < prof.at(h - 1)) mono = false;
                csv += std::to_string(h) + "," + fmt_double(prof.at(h)) + "," + (mono ? "1" : "0") + "\n";
            }
            auto sep = min_pairwise_tv(M);
            json summary = {{"min_pairwise_tv", fmt_double(sep.delta)}, {"profile_nondecreasing", mono}};
            json dec = nullptr;
            for (int h = 1; h <= hmax; ++h)
                if (is_n_step_decodable(M, h, DecodeScope::all_states, budget)) {
                    dec = h;
                    break;
                }
            summary["decodable_N"] = dec;
            std::vector<int> ranks;
            for (int m = 0; m < M.L(); ++m) ranks.push_back(component_rank(M, m));
            summary["component_ranks"] = ranks;
            if (out_path.empty()) {
                out << csv;
            } else {
                cli::write_out(out_path, "varpi.csv", csv);
                cli::write_out(out_path, "summary.json", summary.dump(2) + "\n");
            }
        } else if (*div_cmd) {
            Dist p(cli::parse_numbers(p_str)), q(cli::parse_numbers(q_str));
            out << json{{"tv", fmt_double(tv(p, q))},
                        {"hellinger_sq", fmt_double(hellinger_sq(p, q))},
                        {"bhattacharyya", fmt_double(bhattacharyya(p, q))}}
                       .dump()
                << "\n";
        } else if (*oracle_cmd) {
            Lmdp M = load_model(model_path);
            json res;
            if (method == "belief") {
                res = {{"method", "belief"}, {"value", optimal_value_belief_dp(M, budget)}};
            } else {
                auto o = brute_force_optimal(M, budget);
                res = {{"method", "tree"}, {"value", o.value}};
                if (!out_path.empty()) cli::write_out(out_path, "optimal_policy.json", policy_to_json(*o.policy).dump() + "\n");
            }
            out << res.dump() << "\n";
        } else if (*exp_cmd) {
            auto rr = run_experiment(parse_json(read_file(config_path), config_path), budget);
            if (!out_path.empty()) save_run(rr, out_path);
            else out << rr.csv;
        }
    } catch (const Error& e) {
        return cli::fail(err, e.kind(), e.what());
    } catch (const std::exception& e) {
        return cli::fail(err, ErrorKind::numerical, e.what());
    }
    return 0;
}

} // namespace lmdp
