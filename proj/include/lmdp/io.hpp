#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "generators/family.hpp"
#include "planner.hpp"

namespace lmdp {

using nlohmann::json;

inline constexpr const char* kModelSchema = "lmdp-lab/model/1";
inline constexpr const char* kPolicySchema = "lmdp-lab/policy/1";

namespace detail {

inline double read_prob(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() && *end == '\0') return v;
    }
    throw SchemaError(where + ": expected a number or a decimal string");
}

inline std::vector<double> read_vec(const json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n)
        throw SchemaError(where + ": expected an array of length " + std::to_string(n));
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(read_prob(j[i], where));
    return out;
}

inline int read_int(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_number_integer() || doc[key].get<long>() < 1)
        throw SchemaError(std::string("field '") + key + "' must be a positive integer");
    return doc[key].get<int>();
}

} // namespace detail

/// JSON model document. Doubles are written as the shortest decimal that
/// round-trips, so load(save(M)) reproduces every probability bit for bit.
inline json model_to_json(const Lmdp& M) {
    const int S = M.S(), A = M.A(), H = M.H();
    json comps = json::array();
    for (int m = 0; m < M.L(); ++m) {
        json T = json::array();
        for (int s = 0; s < S; ++s) {
            json rows = json::array();
            for (int a = 0; a < A; ++a) {
                auto r = M.T(m, s, a);
                rows.push_back(std::vector<double>(r.begin(), r.end()));
            }
            T.push_back(std::move(rows));
        }
        comps.push_back({{"nu", M.nu(m).weights()}, {"T", std::move(T)}});
    }
    json R = json::array();
    for (int h = 1; h <= H; ++h) {
        json layer = json::array();
        for (int s = 0; s < S; ++s) {
            std::vector<double> row;
            for (int a = 0; a < A; ++a) row.push_back(M.R(h, s, a));
            layer.push_back(std::move(row));
        }
        R.push_back(std::move(layer));
    }
    return {{"schema_version", kModelSchema},
            {"S", S},
            {"A", A},
            {"H", H},
            {"L", M.L()},
            {"rho", M.rho().weights()},
            {"components", std::move(comps)},
            {"reward", std::move(R)},
            {"metadata", M.metadata()}};
}

inline Lmdp model_from_json(const json& doc) {
    if (!doc.is_object()) throw SchemaError("model document must be a JSON object");
    if (!doc.contains("schema_version") || doc["schema_version"] != kModelSchema)
        throw SchemaError(std::string("schema_version must be '") + kModelSchema + "'");
    const int S = detail::read_int(doc, "S"), A = detail::read_int(doc, "A"), H = detail::read_int(doc, "H"),
              L = detail::read_int(doc, "L");
    if (!doc.contains("components") || !doc["components"].is_array() || doc["components"].size() != static_cast<std::size_t>(L))
        throw SchemaError("components must be an array of length L");
    if (!doc.contains("rho") || !doc.contains("reward")) throw SchemaError("missing rho or reward");
    try {
        auto rho = detail::read_vec(doc["rho"], L, "rho");
        std::vector<Component> comps;
        for (int m = 0; m < L; ++m) {
            const auto& c = doc["components"][m];
            if (!c.is_object() || !c.contains("nu") || !c.contains("T"))
                throw SchemaError("component " + std::to_string(m) + " needs nu and T");
            Component comp;
            comp.nu = Dist(detail::read_vec(c["nu"], S, "nu"));
            const auto& T = c["T"];
            if (!T.is_array() || T.size() != static_cast<std::size_t>(S)) throw SchemaError("T must be S x A x S");
            for (int s = 0; s < S; ++s) {
                if (!T[s].is_array() || T[s].size() != static_cast<std::size_t>(A)) throw SchemaError("T must be S x A x S");
                for (int a = 0; a < A; ++a)
                    for (double x : detail::read_vec(T[s][a], S, "T")) comp.T.push_back(x);
            }
            comps.push_back(std::move(comp));
        }
        const auto& Rj = doc["reward"];
        if (!Rj.is_array() || Rj.size() != static_cast<std::size_t>(H)) throw SchemaError("reward must be H x S x A");
        std::vector<double> R;
        for (int h = 0; h < H; ++h) {
            if (!Rj[h].is_array() || Rj[h].size() != static_cast<std::size_t>(S)) throw SchemaError("reward must be H x S x A");
            for (int s = 0; s < S; ++s)
                for (double x : detail::read_vec(Rj[h][s], A, "reward")) R.push_back(x);
        }
        json meta = doc.contains("metadata") ? doc["metadata"] : json::object();
        return Lmdp(S, A, H, Dist(std::move(rho)), std::move(comps), std::move(R), std::move(meta));
    } catch (const PreconditionError& e) {
        throw SchemaError(std::string("model violates an invariant: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionError("cannot write '" + path + "'");
    out << text;
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError(what + " is not valid JSON: " + e.what());
    }
}

inline Lmdp load_model(const std::string& path) { return model_from_json(parse_json(read_file(path), path)); }
inline void save_model(const std::string& path, const Lmdp& M) { write_file(path, model_to_json(M).dump(1) + "\n"); }

inline json policy_to_json(const Policy& p) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, OpenLoop>) {
                return {{"type", "open_loop"}, {"actions", v.actions}};
            } else if constexpr (std::is_same_v<T, Markov>) {
                return {{"type", "markov"}, {"S", v.S}, {"A", v.A}, {"H", v.H}, {"probs", v.probs}};
            } else if constexpr (std::is_same_v<T, HistoryTree>) {
                return {{"type", "history_tree"}, {"S", v.S}, {"A", v.A}, {"layers", v.layers}};
            } else if constexpr (std::is_same_v<T, Mixture>) {
                json parts = json::array();
                for (const auto& q : v.parts) parts.push_back(policy_to_json(*q));
                return {{"type", "mixture"}, {"weights", v.weights}, {"parts", std::move(parts)}};
            } else {
                return {{"type", "concat"},
                        {"switch_step", v.switch_step},
                        {"head", policy_to_json(*v.head)},
                        {"tail", policy_to_json(*v.tail)}};
            }
        },
        p.variant());
}

inline PlannerPolicy planner_from_json(const json& j) {
    try {
        PlannerPolicy P;
        P.S = j.at("S").get<int>();
        P.A = j.at("A").get<int>();
        P.H = j.at("H").get<int>();
        P.L = j.at("L").get<int>();
        P.W = j.at("window").get<int>();
        P.head = j.at("head").get<std::vector<std::vector<int>>>();
        P.decoder = j.at("decoder").get<std::vector<int>>();
        P.head_value = j.value("head_value", P.head_value);
        P.certificate = j.value("certificate", 0.0);
        for (const auto& t : j.at("tails")) {
            MdpSolution m;
            m.h0 = t.at("from_step").get<int>();
            m.act = t.at("actions").get<std::vector<std::vector<int>>>();
            m.V = t.at("values").get<std::vector<std::vector<double>>>();
            P.tails.push_back(std::move(m));
        }
        HistoryIndex idx{P.S, P.A};
        bool ok = P.S >= 1 && P.A >= 1 && P.W >= 1 && P.W <= P.H && static_cast<int>(P.tails.size()) == P.L &&
                  static_cast<int>(P.head.size()) == P.W - 1 && P.decoder.size() == idx.layer_size(P.W);
        for (int h = 1; ok && h < P.W; ++h) {
            ok = P.head[h - 1].size() == idx.layer_size(h);
            for (int a : P.head[h - 1]) ok = ok && a >= 0 && a < P.A;
        }
        for (int m : P.decoder) ok = ok && m >= 0 && m < P.L;
        for (const auto& t : P.tails) {
            ok = ok && t.h0 <= P.W && static_cast<int>(t.act.size()) == P.H - t.h0 + 1;
            for (const auto& row : t.act) {
                ok = ok && static_cast<int>(row.size()) == P.S;
                for (int a : row) ok = ok && a >= 0 && a < P.A;
            }
        }
        if (!ok) throw SchemaError("planner policy document has inconsistent shapes");
        return P;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed planner policy document: ") + e.what());
    }
}

inline PolicyPtr policy_from_json(const json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "short_memory_planner") return planner_from_json(j).to_policy();
        if (type == "open_loop") return Policy::open_loop(j.at("actions").get<std::vector<int>>());
        if (type == "markov")
            return Policy::markov(j.at("S").get<int>(), j.at("A").get<int>(), j.at("H").get<int>(),
                                  j.at("probs").get<std::vector<double>>());
        if (type == "history_tree")
            return Policy::history_tree(j.at("S").get<int>(), j.at("A").get<int>(),
                                        j.at("layers").get<std::vector<std::vector<double>>>());
        if (type == "mixture") {
            std::vector<PolicyPtr> parts;
            for (const auto& q : j.at("parts")) parts.push_back(policy_from_json(q));
            return Policy::mixture(j.at("weights").get<std::vector<double>>(), std::move(parts));
        }
        if (type == "concat")
            return Policy::concat(policy_from_json(j.at("head")), j.at("switch_step").get<int>(),
                                  policy_from_json(j.at("tail")));
        throw SchemaError("unknown policy type '" + type + "'");
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed policy document: ") + e.what());
    } catch (const PreconditionError& e) {
        throw SchemaError(std::string("policy violates an invariant: ") + e.what());
    }
}

/// Planner output: window, decoder, head actions and value certificates, keyed by
/// the mixed-radix prefix code.
inline json planner_to_json(const PlannerPolicy& P) {
    json tails = json::array();
    for (const auto& t : P.tails) tails.push_back({{"from_step", t.h0}, {"actions", t.act}, {"values", t.V}});
    return {{"schema_version", kPolicySchema},
            {"type", "short_memory_planner"},
            {"S", P.S},
            {"A", P.A},
            {"H", P.H},
            {"L", P.L},
            {"window", P.W},
            {"head", P.head},
            {"decoder", P.decoder},
            {"tails", std::move(tails)},
            {"head_value", P.head_value},
            {"certificate", P.certificate}};
}

inline json family_to_json(const Family& f) {
    json mu = json::array(), xi = json::array();
    for (const auto& d : f.mu) mu.push_back(d.weights());
    for (const auto& d : f.xi) xi.push_back(d.weights());
    return {{"schema_version", "lmdp-lab/family/1"},
            {"outcomes", f.outcomes},
            {"H", f.H},
            {"delta", f.delta},
            {"gamma", f.gamma},
            {"K", f.K},
            {"mu", std::move(mu)},
            {"xi", std::move(xi)},
            {"points", f.points}};
}

/// FNV-1a 64-bit, used for artifact hashes in run records.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
    return h;
}

inline std::string hex64(std::uint64_t x) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, x >>= 4) s[i] = digits[x & 15];
    return s;
}

/// Shortest decimal that reads back to the same double; "inf", "-inf", "nan" otherwise.
inline std::string fmt_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return json(x).dump();
}

} // namespace lmdp
