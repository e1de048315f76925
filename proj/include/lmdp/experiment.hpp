#pragma once

#include <chrono>
#include <filesystem>
#include <future>
#include <random>
#include <thread>
#include <string>
#include <vector>

#include "generators/comb_lock.hpp"
#include "io.hpp"
#include "learner.hpp"
#include "random.hpp"

namespace lmdp {

/// Build an instance from a descriptor: {"source": "file" | "random" | "comb-lock" |
/// "comb-lock-decodable", ...}. Random instances draw from `seed`.
inline Lmdp instance_from_json(const json& d, std::uint64_t seed) {
    try {
        const auto src = d.at("source").get<std::string>();
        if (src == "file") return load_model(d.at("path").get<std::string>());
        if (src == "random") {
            RandomLmdpSpec spec;
            spec.S = d.value("S", spec.S);
            spec.A = d.value("A", spec.A);
            spec.H = d.value("H", spec.H);
            spec.L = d.value("L", spec.L);
            spec.alpha = d.value("alpha", spec.alpha);
            spec.min_row_tv = d.value("min_row_tv", spec.min_row_tv);
            spec.uniform_rho = d.value("uniform_rho", spec.uniform_rho);
            std::mt19937_64 rng(seed);
            return random_lmdp(spec, rng);
        }
        if (src == "comb-lock") {
            const int n = d.at("n").get<int>();
            return comb_lock(n, d.value("A", 2), d.value("H", n + 1),
                             d.value("theta", std::vector<int>(n - 1, 0)));
        }
        if (src == "comb-lock-decodable") {
            const int n = d.at("n").get<int>();
            return comb_lock_decodable(d.at("N").get<int>(), n, d.value("A", 2),
                                       d.value("theta", std::vector<int>(n - 1, 0)));
        }
        throw SchemaError("unknown instance source '" + src + "'");
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed instance descriptor: ") + e.what());
    }
}

struct RunRecord {
    json record;     // command, config snapshot, seeds, wall time, hashes
    std::string csv; // long format: instance_id,seed,parameter,metric,value
};

namespace detail {

struct Row {
    std::string instance_id;
    std::uint64_t seed;
    std::string parameter;
    std::string metric;
    double value;
};

inline std::string rows_csv(const std::vector<Row>& rows) {
    std::string out;
    for (const auto& r : rows)
        out += r.instance_id + "," + std::to_string(r.seed) + "," + r.parameter + "," + r.metric + "," +
               fmt_double(r.value) + "\n";
    return out;
}

inline std::vector<Row> run_point(const json& cfg, const std::string& algo, const std::string& param, double x,
                                  std::uint64_t seed, const Budget& budget) {
    const json inst = cfg.at("instance");
    const json opt = cfg.value("options", json::object());
    const std::string pname = param + "=" + fmt_double(x);
    std::string id = inst.value("id", inst.at("source").get<std::string>());
    if (inst.at("source") == "random") id += "-" + std::to_string(seed);
    std::vector<Row> rows;
    auto emit = [&](const std::string& metric, double v) { rows.push_back({id, seed, pname, metric, v}); };
    Lmdp M = instance_from_json(inst, seed);

    if (algo == "decoding-error") {
        const int W = static_cast<int>(x);
        std::mt19937_64 rng(splitmix64(seed));
        PolicyPtr pi = opt.value("policy", std::string("uniform")) == "random-markov"
                           ? random_markov_policy(M.S(), M.A(), M.H(), rng)
                           : Policy::uniform(M.S(), M.A(), M.H());
        emit("decoding_error", decoding_error_exact(M, *pi, W, budget));
        emit("bound", M.L() * std::exp(-certified_varpi(M, W).at(W)));
    } else if (algo == "planner") {
        const int W = static_cast<int>(x);
        PlanOptions po;
        po.budget = budget;
        auto P = plan(M, W, po);
        const double opt_v = brute_force_optimal(M, budget).value;
        const double v = value(M, *P.to_policy(budget), budget);
        emit("value", v);
        emit("certificate", P.certificate);
        emit("suboptimality", opt_v - v);
        if (opt.contains("epsilon")) {
            auto w = choose_window(M, opt["epsilon"].get<double>());
            emit("certified_window", w ? *w : -1);
        }
    } else if (algo == "omle") {
        std::vector<Lmdp> models;
        for (const auto& d : opt.at("class")) models.push_back(instance_from_json(d, seed));
        ModelClass cls(std::move(models));
        const int truth = opt.value("truth", 0);
        OmleConfig oc;
        oc.K = static_cast<int>(x);
        oc.W = opt.value("W", cls.front().H());
        oc.epsilon_s = opt.value("epsilon_s", 0.5);
        oc.p = opt.value("p", 0.01);
        oc.seed = seed;
        oc.budget = budget;
        SimulatedEnvironment env(cls[truth], splitmix64(seed ^ 0x5eedull));
        std::vector<int> windows;
        for (int w = 1; w <= cls.front().H(); ++w) windows.push_back(w);
        auto res = omle_run(cls, env, oc, planner_candidates(opt.value("windows", windows), budget));
        const double opt_v = brute_force_optimal(cls[truth], budget).value;
        emit("suboptimality", opt_v - value(cls[truth], *res.output, budget));
        bool realizable = true;
        for (const auto& it : res.trace) {
            bool in = false;
            for (int i : it.confidence_set) in = in || i == truth;
            realizable = realizable && in;
        }
        emit("truth_in_confidence_set", realizable ? 1.0 : 0.0);
    } else {
        throw SchemaError("unknown algorithm '" + algo + "'");
    }
    return rows;
}

} // namespace detail

inline constexpr const char* kCsvHeader = "instance_id,seed,parameter,metric,value\n";

/// Execute every (grid value, seed) point. Points run concurrently; rows are merged
/// in grid order, so the CSV is identical across runs.
inline RunRecord run_experiment(const json& cfg, const Budget& budget = Budget::from_env(), int workers = 0) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string algo, param;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    try {
        algo = cfg.at("algorithm").get<std::string>();
        cfg.at("instance");
        const auto& grid = cfg.at("grid");
        param = grid.at("parameter").get<std::string>();
        values = grid.at("values").get<std::vector<double>>();
        seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("experiment config: ") + e.what());
    }
    if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());

    struct Point {
        double x;
        std::uint64_t seed;
    };
    std::vector<Point> points;
    for (double x : values)
        for (auto s : seeds) points.push_back({x, s});

    std::vector<std::string> chunks(points.size());
    for (std::size_t start = 0; start < points.size(); start += workers) {
        std::vector<std::future<std::string>> running;
        for (std::size_t i = start; i < std::min(points.size(), start + workers); ++i)
            running.push_back(std::async(std::launch::async, [&, i] {
                return detail::rows_csv(detail::run_point(cfg, algo, param, points[i].x, points[i].seed, budget));
            }));
        for (std::size_t i = 0; i < running.size(); ++i) chunks[start + i] = running[i].get();
    }

    RunRecord rr;
    rr.csv = kCsvHeader;
    for (const auto& c : chunks) rr.csv += c;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rr.record = {{"command", "experiment"},
                 {"config", cfg},
                 {"seeds", seeds},
                 {"points", points.size()},
                 {"wall_time_s", secs},
                 {"artifact_hashes", {{"results.csv", hex64(fnv1a64(rr.csv))}}}};
    return rr;
}

/// Write results.csv and record.json into dir.
inline void save_run(const RunRecord& rr, const std::string& dir) {
    std::filesystem::create_directories(dir);
    write_file((std::filesystem::path(dir) / "results.csv").string(), rr.csv);
    write_file((std::filesystem::path(dir) / "record.json").string(), rr.record.dump(2) + "\n");
}

} // namespace lmdp
