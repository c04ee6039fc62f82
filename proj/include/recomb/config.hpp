#pragma once

// Model configuration files. A model is a JSON document:
//
//   {
//     "sites": 3,                        // or ["A", "B", "C"]
//     "alphabetSizes": [2, 2, 2],        // optional, default 2 per site
//     "weights": [["{1,2,3}", "1/5"],    // or [{"partition": ..., "weight": ...}]
//                 ["{1}{2,3}", "1/2"],   // or {"{1,2,3}": "1/5", ...}
//                 ["{1,2}{3}", "3/10"]],
//     "measure": {"table": ["1/8", ...]} // or {"random": {"seed": 7}}
//                                        // or {"marginals": [["1/2","1/2"], ...]}
//     "mode": "exact",                   // or "float"
//     "caps": {"states": 50000, "table": 1048576}
//   }
//
// Weights and probabilities are `p/q` strings, decimal strings, or JSON numbers.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recomb/measure.hpp"
#include "recomb/partition.hpp"
#include "recomb/scalar.hpp"
#include "recomb/weights.hpp"

namespace recomb {

struct MeasureSpec {
    enum class Kind { none, table, random, marginals };
    Kind kind = Kind::none;
    std::vector<std::string> table;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> marginals;
};

struct ModelConfig {
    std::size_t sites = 0;
    std::vector<std::string> site_labels;
    std::vector<std::size_t> alphabet_sizes;
    /// Weight texts, kept verbatim until the number mode is known.
    std::vector<std::pair<Partition, std::string>> weights;
    MeasureSpec measure;
    std::optional<NumberMode> mode;
    std::size_t state_cap = default_state_cap;
    std::size_t table_cap = default_table_cap;
};

namespace detail {

inline std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Numbers keep their shortest round-trip text so "0.3" stays 3/10 in exact mode.
inline std::string number_text(const nlohmann::json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return j.dump();
    throw ValidationError(where + ": expected a number or a numeric string");
}

inline std::size_t positive_count(const nlohmann::json& j, const std::string& where) {
    if (!j.is_number_unsigned() || j.get<std::size_t>() == 0) throw ValidationError(where + ": expected a positive integer");
    return j.get<std::size_t>();
}

}  // namespace detail

inline ModelConfig parse_model_config(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("parse error at " + detail::line_column(text, e.byte ? e.byte - 1 : 0) + ": " +
                              e.what());
    }
    if (!doc.is_object()) throw ValidationError("model config must be a JSON object");

    ModelConfig cfg;
    if (!doc.contains("sites")) throw ValidationError("/sites: missing");
    const auto& sites = doc["sites"];
    if (sites.is_array()) {
        for (const auto& s : sites) {
            if (!s.is_string()) throw ValidationError("/sites: labels must be strings");
            cfg.site_labels.push_back(s.get<std::string>());
        }
        cfg.sites = cfg.site_labels.size();
        if (cfg.sites == 0) throw ValidationError("/sites: at least one site is required");
    } else {
        cfg.sites = detail::positive_count(sites, "/sites");
    }

    if (doc.contains("alphabetSizes")) {
        const auto& a = doc["alphabetSizes"];
        if (!a.is_array() || a.size() != cfg.sites)
            throw ValidationError("/alphabetSizes: expected one size per site");
        for (std::size_t i = 0; i < a.size(); ++i)
            cfg.alphabet_sizes.push_back(detail::positive_count(a[i], "/alphabetSizes/" + std::to_string(i)));
    } else {
        cfg.alphabet_sizes.assign(cfg.sites, 2);
    }

    if (!doc.contains("weights")) throw ValidationError("/weights: missing");
    const auto& w = doc["weights"];
    auto add_weight = [&](const std::string& partition, const nlohmann::json& value, const std::string& where) {
        Partition p;
        try {
            p = parse_partition(partition, cfg.sites);
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        }
        cfg.weights.emplace_back(std::move(p), detail::number_text(value, where));
    };
    if (w.is_object()) {
        for (auto it = w.begin(); it != w.end(); ++it) add_weight(it.key(), it.value(), "/weights/" + it.key());
    } else if (w.is_array()) {
        for (std::size_t k = 0; k < w.size(); ++k) {
            const std::string where = "/weights/" + std::to_string(k);
            const auto& e = w[k];
            if (e.is_array() && e.size() == 2 && e[0].is_string())
                add_weight(e[0].get<std::string>(), e[1], where);
            else if (e.is_object() && e.contains("partition") && e.contains("weight") && e["partition"].is_string())
                add_weight(e["partition"].get<std::string>(), e["weight"], where);
            else
                throw ValidationError(where + ": expected [partition, weight] or {partition, weight}");
        }
    } else {
        throw ValidationError("/weights: expected an array or an object");
    }
    if (cfg.weights.empty()) throw ValidationError("/weights: empty");

    if (doc.contains("mode")) {
        const auto& m = doc["mode"];
        if (m == "exact")
            cfg.mode = NumberMode::exact;
        else if (m == "float")
            cfg.mode = NumberMode::floating;
        else
            throw ValidationError("/mode: expected \"exact\" or \"float\"");
    }

    if (doc.contains("caps")) {
        const auto& c = doc["caps"];
        if (!c.is_object()) throw ValidationError("/caps: expected an object");
        if (c.contains("states")) cfg.state_cap = detail::positive_count(c["states"], "/caps/states");
        if (c.contains("table")) cfg.table_cap = detail::positive_count(c["table"], "/caps/table");
    }

    if (doc.contains("measure") && !doc["measure"].is_null()) {
        const auto& m = doc["measure"];
        if (!m.is_object() || m.size() != 1) throw ValidationError("/measure: expected exactly one of table, random, marginals");
        if (m.contains("table")) {
            cfg.measure.kind = MeasureSpec::Kind::table;
            const auto& t = m["table"];
            if (!t.is_array()) throw ValidationError("/measure/table: expected an array");
            for (std::size_t k = 0; k < t.size(); ++k)
                cfg.measure.table.push_back(detail::number_text(t[k], "/measure/table/" + std::to_string(k)));
        } else if (m.contains("random")) {
            cfg.measure.kind = MeasureSpec::Kind::random;
            const auto& r = m["random"];
            if (r.is_object() && r.contains("seed") && r["seed"].is_number_unsigned())
                cfg.measure.seed = r["seed"].get<std::uint64_t>();
            else if (r.is_number_unsigned())
                cfg.measure.seed = r.get<std::uint64_t>();
            else
                throw ValidationError("/measure/random: expected {\"seed\": <u64>}");
        } else if (m.contains("marginals")) {
            cfg.measure.kind = MeasureSpec::Kind::marginals;
            const auto& ms = m["marginals"];
            if (!ms.is_array() || ms.size() != cfg.sites)
                throw ValidationError("/measure/marginals: expected one probability vector per site");
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const std::string where = "/measure/marginals/" + std::to_string(i);
                if (!ms[i].is_array() || ms[i].size() != cfg.alphabet_sizes[i])
                    throw ValidationError(where + ": expected " + std::to_string(cfg.alphabet_sizes[i]) + " entries");
                std::vector<std::string> vec;
                for (std::size_t a = 0; a < ms[i].size(); ++a)
                    vec.push_back(detail::number_text(ms[i][a], where + "/" + std::to_string(a)));
                cfg.measure.marginals.push_back(std::move(vec));
            }
        } else {
            throw ValidationError("/measure: expected exactly one of table, random, marginals");
        }
    }
    return cfg;
}

inline ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_config(buf.str());
}

/// Exact mode requires the weights to total exactly 1. Float mode accepts a
/// total within 1e-9 and renormalizes, appending a warning when it had to.
template <Scalar S>
PartitionWeights<S> build_weights(const ModelConfig& cfg, std::vector<std::string>* warnings = nullptr) {
    std::vector<typename PartitionWeights<S>::Entry> entries;
    for (const auto& [p, text] : cfg.weights) entries.emplace_back(p, parse_scalar<S>(text));
    if constexpr (is_exact_v<S>) {
        return PartitionWeights<S>(std::move(entries));
    } else {
        S total(0);
        for (const auto& e : entries) total += e.second;
        if (std::abs(total - 1.0) > float_weight_tolerance)
            throw ValidationError("weights total " + format_scalar(total) + ", expected 1");
        if (total != 1.0 && warnings) warnings->push_back("weights total " + format_scalar(total) + "; renormalized");
        return PartitionWeights<S>::normalized(std::move(entries));
    }
}

template <Scalar S>
std::optional<ProductMeasure<S>> build_measure(const ModelConfig& cfg) {
    switch (cfg.measure.kind) {
        case MeasureSpec::Kind::none:
            return std::nullopt;
        case MeasureSpec::Kind::table: {
            table_cells(cfg.alphabet_sizes, cfg.table_cap);
            std::vector<S> table;
            for (const auto& t : cfg.measure.table) table.push_back(parse_scalar<S>(t));
            return ProductMeasure<S>(cfg.alphabet_sizes, std::move(table));
        }
        case MeasureSpec::Kind::random:
            return ProductMeasure<S>::random(cfg.alphabet_sizes, cfg.measure.seed, cfg.table_cap);
        case MeasureSpec::Kind::marginals: {
            table_cells(cfg.alphabet_sizes, cfg.table_cap);
            std::vector<ProductMeasure<S>> blocks;
            for (std::size_t i = 0; i < cfg.sites; ++i) {
                std::vector<S> vec;
                for (const auto& t : cfg.measure.marginals[i]) vec.push_back(parse_scalar<S>(t));
                blocks.emplace_back(std::vector<std::size_t>{cfg.alphabet_sizes[i]}, std::move(vec));
            }
            return tensor(FactorizedMeasure<S>(Partition::finest(cfg.sites), std::move(blocks)));
        }
    }
    return std::nullopt;
}

}  // namespace recomb
