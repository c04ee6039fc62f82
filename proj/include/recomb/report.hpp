#pragma once

// JSON and CSV renderings of the analyses. Exact values are emitted as
// "p/q" strings, float values as JSON numbers. Key order is fixed by the
// code, so outputs are byte-stable for golden-file comparisons.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "recomb/chain.hpp"
#include "recomb/montecarlo.hpp"
#include "recomb/quasistationary.hpp"
#include "recomb/verify.hpp"

namespace recomb {

using Json = nlohmann::ordered_json;

template <Scalar S>
Json scalar_json(const S& x) {
    if constexpr (is_exact_v<S>)
        return format_scalar(x);
    else
        return x;
}

inline Json state_list_json(const StateSpace& space, std::span<const StateIndex> states) {
    Json out = Json::array();
    for (StateIndex k : states) out.push_back(to_string(space[k]));
    return out;
}

/// RFC 4180 quoting for fields holding commas or quotes.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string csv_header(const StateSpace& space, std::string_view first) {
    std::string out(first);
    for (const auto& p : space.states()) out += "," + csv_field(to_string(p));
    return out + "\n";
}

template <Scalar S>
Json closure_json(const Chain<S>& chain) {
    Json j;
    j["sites"] = chain.rho.sites();
    Json support = Json::array();
    for (const auto& [p, w] : chain.rho) support.push_back(to_string(p));
    j["support"] = support;
    Json closed = Json::array();
    for (const auto& p : closure(chain.rho.support(), chain.space.size() + 1)) closed.push_back(to_string(p));
    j["closure"] = closed;
    Json states = Json::array();
    for (const auto& p : chain.space.states()) states.push_back(to_string(p));
    j["states"] = states;
    j["absorbing"] = to_string(chain.space[chain.space.absorbing()]);
    return j;
}

template <Scalar S>
Json matrix_json(const Chain<S>& chain, bool degenerate) {
    Json j;
    Json states = Json::array();
    for (const auto& p : chain.space.states()) states.push_back(to_string(p));
    j["states"] = states;
    Json rows = Json::array();
    for (StateIndex i = 0; i < chain.P.size(); ++i) {
        Json row = Json::array();
        for (const auto& v : chain.P.row(i)) row.push_back(scalar_json(v));
        rows.push_back(row);
    }
    j["P"] = rows;
    j["absorbing"] = to_string(chain.space[chain.space.absorbing()]);
    j["degenerate"] = degenerate;
    return j;
}

template <Scalar S>
std::string matrix_csv(const Chain<S>& chain) {
    std::string out = csv_header(chain.space, "state");
    for (StateIndex i = 0; i < chain.P.size(); ++i) {
        out += csv_field(to_string(chain.space[i]));
        for (const auto& v : chain.P.row(i)) out += "," + format_scalar(v);
        out += "\n";
    }
    return out;
}

/// n, b_n per state, P(ζ > n).
template <Scalar S>
std::string evolution_csv(const Chain<S>& chain, const std::vector<std::vector<S>>& series) {
    std::string out = csv_header(chain.space, "n");
    out.pop_back();
    out += ",survival\n";
    for (std::size_t n = 0; n < series.size(); ++n) {
        out += std::to_string(n);
        for (const auto& v : series[n]) out += "," + format_scalar(v);
        out += "," + format_scalar(S(S(1) - series[n][chain.space.absorbing()])) + "\n";
    }
    return out;
}

template <Scalar S>
Json state_vector_json(const StateSpace& space, std::span<const S> v, bool skip_absorbing) {
    Json j = Json::object();
    for (StateIndex k = 0; k < space.size(); ++k) {
        if (skip_absorbing && k == space.absorbing()) continue;
        j[to_string(space[k])] = scalar_json(v[k]);
    }
    return j;
}

template <Scalar S>
Json submatrix_json(const StateSpace& space, const SubMatrix<S>& Q) {
    Json j;
    j["states"] = state_list_json(space, Q.states);
    Json rows = Json::array();
    for (std::size_t r = 0; r < Q.size(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < Q.size(); ++c) row.push_back(scalar_json(Q.at(r, c)));
        rows.push_back(row);
    }
    j["matrix"] = rows;
    return j;
}

template <Scalar S>
Json qsd_json(const Chain<S>& chain, const QuasiStationaryReport<S>& r) {
    const auto& space = chain.space;
    Json j;
    j["degenerate"] = r.degenerate;
    if (r.degenerate) {
        j["reason"] = r.degenerate_reason;
        j["absorptionBound"] = r.absorption_bound;
        j["eta"] = r.delta.empty() ? Json(nullptr) : scalar_json(r.eta);
        j["F"] = state_list_json(space, r.F);
        j["delta"] = state_list_json(space, r.delta);
        for (const char* key : {"beta0", "phi", "Q", "quasiLimiting", "limitConstant"}) j[key] = nullptr;
        return j;
    }
    j["eta"] = scalar_json(r.eta);
    j["beta0"] = scalar_json(r.beta0);
    j["F"] = state_list_json(space, r.F);
    j["delta"] = state_list_json(space, r.delta);
    j["phi"] = state_vector_json<S>(space, r.phi, true);
    j["boundary"] = state_list_json(space, r.Q.states);
    j["Q"] = submatrix_json(space, r.Q);
    Json ql = Json::object();
    for (StateIndex k = 0; k < space.size(); ++k)
        if (k != space.absorbing()) ql[to_string(space[k])] = scalar_json(r.quasi_limiting[k]);
    j["quasiLimiting"] = ql;
    j["limitConstant"] = scalar_json(r.limit_constant);
    j["convergenceRatio"] = scalar_json(r.convergence_ratio());
    return j;
}

inline Json path_comparisons_json(const StateSpace& space, const std::vector<PathComparison>& cs) {
    Json arr = Json::array();
    for (const auto& c : cs) {
        Json e;
        e["path"] = state_list_json(space, c.path);
        e["conditioned"] = c.conditioned;
        e["product"] = c.product;
        e["error"] = std::abs(c.conditioned - c.product);
        arr.push_back(e);
    }
    return arr;
}

/// n, estimate, stderr, exact (blank when unavailable).
inline std::string survival_csv(const std::vector<SurvivalEstimate>& est, const std::vector<double>* exact) {
    std::string out = "n,estimate,stderr,exact\n";
    for (const auto& e : est) {
        out += std::to_string(e.n) + "," + format_scalar(e.estimate) + "," + format_scalar(e.standard_error) + ",";
        if (exact && e.n < exact->size()) out += format_scalar((*exact)[e.n]);
        out += "\n";
    }
    return out;
}

inline Json verify_json(const std::vector<CheckResult>& results) {
    Json j;
    j["passed"] = all_passed(results);
    Json checks = Json::array();
    for (const auto& r : results) {
        Json c;
        c["name"] = r.name;
        c["passed"] = r.passed;
        if (!r.detail.empty()) c["detail"] = r.detail;
        checks.push_back(c);
    }
    j["checks"] = checks;
    return j;
}

}  // namespace recomb
