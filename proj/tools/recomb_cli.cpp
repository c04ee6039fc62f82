// recomb: batch front end for the partition recombination chain.
//
//   recomb <command> <config.json> [flags]
//
// Commands: closure, matrix, evolve, qsd, qprocess, simulate, verify.
// The main report is printed to stdout as JSON; with --out the report and
// CSV series are also written into that directory.
//
// Exit status: 0 success (including degenerate-model notices), 1 usage,
// 2 validation or parse error, 3 cap exceeded, 4 identity violation,
// 5 any other failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "recomb/config.hpp"
#include "recomb/recomb.hpp"
#include "recomb/report.hpp"

namespace fs = std::filesystem;
using namespace recomb;

namespace {

struct Options {
    std::string command;
    std::string config_path;
    std::string mode;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::optional<std::size_t> steps;
    std::size_t horizon = 50;
    std::uint64_t seeds = 100'000;
    std::optional<std::size_t> state_cap;
    std::optional<std::size_t> table_cap;
};

class Output {
public:
    explicit Output(std::string dir) : dir_(std::move(dir)) {
        if (!dir_.empty()) fs::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& contents) const {
        if (dir_.empty()) return;
        std::ofstream f(fs::path(dir_) / name, std::ios::binary);
        if (!f) throw Error("cannot write " + (fs::path(dir_) / name).string());
        f << contents;
    }

    void report(const std::string& name, const Json& j) const {
        const std::string text = j.dump(2) + "\n";
        std::cout << text;
        write(name, text);
    }

private:
    std::string dir_;
};

template <Scalar S>
int run(const Options& opt, const ModelConfig& cfg) {
    std::vector<std::string> warnings;
    Chain<S> chain = build_chain(build_weights<S>(cfg, &warnings), cfg.state_cap);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const Output out(opt.out_dir);
    const std::string mode(to_string(is_exact_v<S> ? NumberMode::exact : NumberMode::floating));

    auto header = [&](Json& j) {
        Json h;
        h["command"] = opt.command;
        h["mode"] = mode;
        if (!cfg.site_labels.empty()) h["siteLabels"] = cfg.site_labels;
        if (!warnings.empty()) h["warnings"] = warnings;
        Json merged = h;
        for (auto it = j.begin(); it != j.end(); ++it) merged[it.key()] = it.value();
        j = std::move(merged);
    };

    if (opt.command == "closure") {
        Json j = closure_json(chain);
        header(j);
        out.report("closure.json", j);
        return 0;
    }

    if (opt.command == "matrix") {
        const auto analysis = analyze(chain.P);
        Json j = matrix_json(chain, analysis.degenerate);
        header(j);
        out.report("matrix.json", j);
        out.write("matrix.csv", matrix_csv(chain));
        return 0;
    }

    if (opt.command == "evolve") {
        const std::size_t steps = opt.steps.value_or(10);
        const auto series = distribution_series(chain.P, steps);
        Json j;
        j["steps"] = steps;
        Json surv = Json::array();
        for (const auto& b : series) surv.push_back(scalar_json(S(S(1) - b[chain.space.absorbing()])));
        j["survival"] = surv;
        j["distribution"] = state_vector_json<S>(chain.space, series.back(), false);
        int status = 0;
        if (auto measure = build_measure<S>(cfg)) {
            const double tol = is_exact_v<S> ? 0.0 : 1e-10;
            Json diffs = Json::array();
            bool ok = true;
            ProductMeasure<S> iterated = *measure;
            for (std::size_t k = 0; k <= steps; ++k) {
                if (k) iterated = xi_apply(iterated, chain.rho);
                const auto mixed = mixture_of_factorizations<S>(chain.space.states(), series[k], *measure);
                const double d = max_abs_difference(iterated, mixed);
                ok = ok && d <= tol;
                diffs.push_back(d);
            }
            Json check;
            check["maxAbsDifference"] = diffs;
            check["tolerance"] = tol;
            check["passed"] = ok;
            j["chainMixtureCheck"] = check;
            if (!ok) status = 4;
        }
        header(j);
        out.report("evolve.json", j);
        out.write("evolve.csv", evolution_csv(chain, series));
        return status;
    }

    if (opt.command == "qsd") {
        const auto r = analyze(chain.P);
        Json j = qsd_json(chain, r);
        if (!r.degenerate) {
            Json ratios = Json::object();
            for (StateIndex k : chain.space.transient())
                ratios[to_string(chain.space[k])] = scalar_json(S(r.phi[k] / r.limit_constant));
            j["ratioLimit"] = ratios;
        }
        header(j);
        out.report("qsd.json", j);
        return 0;
    }

    if (opt.command == "qprocess") {
        const auto r = analyze(chain.P);
        Json j;
        j["degenerate"] = r.degenerate;
        int status = 0;
        if (!r.degenerate) {
            const std::size_t horizon = opt.steps.value_or(300);
            const std::size_t max_length = 3;
            const auto paths = compare_conditioned_paths<S>(chain.P, r.Q, r.eta, horizon, max_length);
            j["Q"] = submatrix_json(chain.space, r.Q);
            j["horizon"] = horizon;
            j["maxPathLength"] = max_length;
            j["maxError"] = max_path_error(paths);
            j["paths"] = path_comparisons_json(chain.space, paths);
            // The η^{+ζ_F} weighting, kept for comparison; it is not a valid h-transform.
            const auto h_alt = hitting_functionals(chain.P, r.F, r.eta);
            const auto q_alt = h_transform<S>(chain.P, h_alt, r.eta);
            Json alt;
            alt["Q"] = submatrix_json(chain.space, q_alt);
            alt["maxError"] = max_path_error(compare_conditioned_paths<S>(chain.P, q_alt, r.eta, horizon, max_length));
            j["alternateReading"] = alt;
            if (!rows_sum_to_one(r.Q) || !absorbing_under<S>(r.Q, r.F)) status = 4;
        } else {
            j["reason"] = r.degenerate_reason;
        }
        header(j);
        out.report("qprocess.json", j);
        return status;
    }

    if (opt.command == "simulate") {
        const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
        const auto est = estimate_survival(chain.rho, opt.seeds, opt.horizon, opt.seed, cfg.state_cap, threads);
        std::vector<double> exact;
        for (const auto& b : distribution_series(chain.P, opt.horizon))
            exact.push_back(to_double(S(S(1) - b[chain.space.absorbing()])));
        Json j;
        j["seeds"] = opt.seeds;
        j["horizon"] = opt.horizon;
        j["seed"] = opt.seed;
        Json rows = Json::array();
        for (const auto& e : est) {
            Json row;
            row["n"] = e.n;
            row["estimate"] = e.estimate;
            row["stderr"] = e.standard_error;
            row["exact"] = exact[e.n];
            rows.push_back(row);
        }
        j["survival"] = rows;
        header(j);
        out.report("simulate.json", j);
        out.write("simulate.csv", survival_csv(est, &exact));
        return 0;
    }

    if (opt.command == "verify") {
        auto measure = build_measure<S>(cfg);
        VerifyOptions vo;
        vo.steps = opt.steps.value_or(8);
        vo.seed = opt.seed;
        const auto results = verify_model(chain, measure ? &*measure : nullptr, vo);
        Json j = verify_json(results);
        header(j);
        out.report("verify.json", j);
        return all_passed(results) ? 0 : 4;
    }

    throw ValidationError("unknown command '" + opt.command + "'");
}

int fail(const char* kind, const std::string& message, int status, std::optional<std::size_t> partial = {}) {
    Json e;
    e["kind"] = kind;
    e["message"] = message;
    if (partial) e["partialCount"] = *partial;
    Json j;
    j["error"] = e;
    std::cerr << j.dump() << "\n";
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recombination dynamics on partitions: chain, quasi-stationary analysis, simulation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", opt.config_path, "Model config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--mode", opt.mode, "Number mode")->check(CLI::IsMember({"exact", "float"}));
        sub->add_option("--out", opt.out_dir, "Directory for report files");
        sub->add_option("--seed", opt.seed, "Base seed");
        sub->add_option("--state-cap", opt.state_cap, "Maximum number of partitions");
        sub->add_option("--table-cap", opt.table_cap, "Maximum joint-table entries");
    };
    auto* closure_cmd = app.add_subcommand("closure", "Closure of the weight support and the absorbing state");
    auto* matrix_cmd = app.add_subcommand("matrix", "Transition matrix");
    auto* evolve_cmd = app.add_subcommand("evolve", "Distribution and survival series, recombination cross-check");
    auto* qsd_cmd = app.add_subcommand("qsd", "Quasi-stationary report");
    auto* qprocess_cmd = app.add_subcommand("qprocess", "Q-process matrix and conditioned-path checks");
    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo survival estimates");
    auto* verify_cmd = app.add_subcommand("verify", "Run every exact invariant on the model");
    for (auto* sub : {closure_cmd, matrix_cmd, evolve_cmd, qsd_cmd, qprocess_cmd, simulate_cmd, verify_cmd})
        add_common(sub);
    for (auto* sub : {evolve_cmd, qprocess_cmd, verify_cmd})
        sub->add_option("--steps", opt.steps, "Steps (evolve, verify) or conditioning horizon (qprocess)");
    for (auto* sub : {simulate_cmd}) {
        sub->add_option("--horizon", opt.horizon, "Trajectory horizon");
        sub->add_option("--seeds", opt.seeds, "Number of trajectories")->check(CLI::PositiveNumber);
    }

    CLI11_PARSE(app, argc, argv);
    opt.command = app.get_subcommands().front()->get_name();

    try {
        ModelConfig cfg = load_model_config(opt.config_path);
        if (opt.state_cap) cfg.state_cap = *opt.state_cap;
        if (opt.table_cap) cfg.table_cap = *opt.table_cap;
        NumberMode mode = cfg.mode.value_or(NumberMode::exact);
        if (!opt.mode.empty()) mode = opt.mode == "float" ? NumberMode::floating : NumberMode::exact;
        return mode == NumberMode::exact ? run<Rational>(opt, cfg) : run<double>(opt, cfg);
    } catch (const ResourceError& e) {
        return fail(e.kind(), e.what(), 3, e.partial_count());
    } catch (const ConsistencyError& e) {
        return fail(e.kind(), e.what(), 4);
    } catch (const ValidationError& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const DegenerateModelError& e) {
        return fail(e.kind(), e.what(), 0);
    } catch (const std::exception& e) {
        return fail("error", e.what(), 5);
    }
}
