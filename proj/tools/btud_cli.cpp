// Command-line front end: generate, decompose, select, evaluate, ensemble, report.

#include "btud/errors.hpp"
#include "btud/io.hpp"
#include "btud/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out_dir = ".";
    std::string config_path;
    std::string experiment;
};

/// Flag values that override config keys; only set flags are applied.
struct Overrides {
    std::optional<std::string> ranks;
    std::optional<std::string> solver;
    std::optional<double> alpha;
    std::optional<int> max_iter;
    std::optional<double> tol;
    std::optional<double> factor_tol;
    std::optional<int> max_sweeps;
    std::optional<double> btud_tol;
    std::optional<double> consistency_tol;
    std::optional<std::string> components;
    std::optional<std::string> rule;
    std::optional<std::string> fixed_l2;
    std::optional<std::string> fixed_l3;
    std::optional<long> by_core_count;
    std::optional<double> threshold;
    std::optional<std::string> method;
    std::optional<int> ensembles;
    std::map<std::string, double> generator;
    std::optional<bool> classic;
};

json parse_index_list(const std::string& text, const char* what) {
    json out = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw btud::ArgumentError(std::string(what) + ": '" + text + "' is not a comma-separated integer list");
        }
    }
    if (out.empty()) throw btud::ArgumentError(std::string(what) + " is empty");
    return out;
}

btud::ExperimentConfig build_config(const GlobalOptions& g, const Overrides& o, const char* default_experiment) {
    json j = json::object();
    if (!g.config_path.empty()) {
        try {
            j = json::parse(btud::read_file(g.config_path));
        } catch (const json::exception& e) {
            throw btud::ArgumentError(g.config_path + ": " + e.what());
        }
    }
    if (!g.experiment.empty()) j["experiment"] = g.experiment;
    if (!j.contains("experiment")) j["experiment"] = default_experiment;
    if (g.seed) j["seed"] = *g.seed;
    if (g.threads) j["threads"] = *g.threads;
    if (o.ranks) j["ranks"] = parse_index_list(*o.ranks, "--ranks");
    if (o.solver) j["solver"] = *o.solver;
    if (o.alpha) j["alpha"] = *o.alpha;
    if (o.max_iter) j["hooi"]["max_iter"] = *o.max_iter;
    if (o.tol) j["hooi"]["tol"] = *o.tol;
    if (o.factor_tol) j["hooi"]["factor_tol"] = *o.factor_tol;
    if (o.max_sweeps) j["btud"]["max_sweeps"] = *o.max_sweeps;
    if (o.btud_tol) j["btud"]["tol"] = *o.btud_tol;
    if (o.consistency_tol) j["consistency_tol"] = *o.consistency_tol;
    if (o.components) j["components"] = parse_index_list(*o.components, "--components");
    if (o.rule) j["component_rule"] = *o.rule;
    if (o.fixed_l2) j["fixed_l2"] = parse_index_list(*o.fixed_l2, "--fixed-l2");
    if (o.fixed_l3) j["fixed_l3"] = parse_index_list(*o.fixed_l3, "--fixed-l3");
    if (o.by_core_count) j["by_core_count"] = *o.by_core_count;
    if (o.threshold) j["threshold"] = *o.threshold;
    if (o.method) j["method"] = *o.method;
    if (o.ensembles) j["ensembles"] = *o.ensembles;
    for (const auto& [key, value] : o.generator) {
        if (key == "n" || key == "m" || key == "k" || key == "n1" || key == "steps") {
            j["generator"][key] = static_cast<long long>(value);
        } else {
            j["generator"][key] = value;
        }
    }
    if (o.classic) j["generator"]["classic"] = *o.classic;
    btud::ExperimentConfig c = btud::config_from_json(j.dump());
    btud::validate(c);
    return c;
}

void add_decomp_flags(CLI::App* app, Overrides& o) {
    app->add_option("--ranks", o.ranks, "L1,L2,L3");
    app->add_option("--solver", o.solver, "hooi | btud | hooi-then-check");
    app->add_option("--alpha", o.alpha, "prior precision (0 = pseudoinverse branch)");
    app->add_option("--max-iter", o.max_iter, "HOOI iteration cap");
    app->add_option("--tol", o.tol, "HOOI relative error-change tolerance");
    app->add_option("--factor-tol", o.factor_tol, "HOOI factor-change tolerance (0 = off)");
    app->add_option("--max-sweeps", o.max_sweeps, "btud sweep cap");
    app->add_option("--btud-tol", o.btud_tol, "btud factor-change tolerance");
    app->add_option("--consistency-tol", o.consistency_tol, "self-consistency tolerance");
}

void add_select_flags(CLI::App* app, Overrides& o) {
    app->add_option("--components", o.components, "1-based components, e.g. 1,2");
    app->add_option("--rule", o.rule, "fixed | by-core");
    app->add_option("--fixed-l2", o.fixed_l2, "by-core rule: mode-2 components");
    app->add_option("--fixed-l3", o.fixed_l3, "by-core rule: mode-3 components");
    app->add_option("--by-core-count", o.by_core_count, "by-core rule: number of l1 kept");
    app->add_option("--threshold", o.threshold, "adjusted P-value cutoff");
    app->add_option("--method", o.method, "btud | td");
}

void add_generator_flags(CLI::App* app, Overrides& o) {
    for (const char* key : {"n", "m", "k", "n1", "mu", "period", "steps", "a", "c"}) {
        app->add_option_function<double>(
            std::string("--") + key, [&o, key](double v) { o.generator[key] = v; }, "generator parameter");
    }
    app->add_flag_function("--classic", [&o](std::int64_t) { o.classic = true; }, "rcs-gcm: classic uniform coupling");
}

fs::path prepare_out_dir(const GlobalOptions& g) {
    const fs::path dir(g.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw btud::IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

btud::Tensor3 as_tensor(const btud::DataArray& data) {
    if (const auto* t = std::get_if<btud::Tensor3>(&data)) return *t;
    const auto& x = std::get<btud::Matrix>(data);
    return btud::Tensor3({x.rows(), x.cols(), 1}, std::vector<double>(x.data(), x.data() + x.size()));
}

void print_confusion(const btud::Confusion& c) {
    std::printf("tn %s\nfn %s\nfp %s\ntp %s\n", btud::format_number(c.tn).c_str(), btud::format_number(c.fn).c_str(),
                btud::format_number(c.fp).c_str(), btud::format_number(c.tp).c_str());
}

int cmd_generate(const GlobalOptions& g, const Overrides& o) {
    const btud::ExperimentConfig c = build_config(g, o, "synthetic-block");
    const btud::Dataset d = btud::generate(c, c.seed);
    const fs::path dir = prepare_out_dir(g);
    btud::save_data(dir / "data.txt", d.data);
    if (!d.truth.empty()) btud::save_truth(dir / "truth.csv", d.truth);
    btud::write_file(dir / "config.json", btud::config_to_json(c));
    std::printf("seed %llu\nchecksum %s\n", static_cast<unsigned long long>(c.seed),
                btud::file_checksum(dir / "data.txt").c_str());
    return kOk;
}

int cmd_decompose(const GlobalOptions& g, const Overrides& o, const std::string& data_path) {
    const btud::ExperimentConfig c = build_config(g, o, "custom");
    const btud::Tensor3 t = as_tensor(btud::load_data(data_path));
    const btud::ModelDocument doc = btud::decompose(t, c);
    const fs::path dir = prepare_out_dir(g);
    btud::save_model(dir / "model.json", doc);
    std::printf("solver %s\nsweeps %d\nconverged %s\n", doc.solver.c_str(), doc.report.sweeps,
                doc.report.converged ? "true" : "false");
    if (c.solver != btud::SolverKind::hooi) {
        std::printf("self_consistent %s\nmax_mode_deviation %s\n", doc.report.self_consistent ? "true" : "false",
                    btud::format_number(doc.report.max_mode_deviation).c_str());
    }
    std::printf("beta %s\n", btud::format_number(doc.beta).c_str());
    return kOk;
}

int cmd_select(const GlobalOptions& g, const Overrides& o, const std::string& data_path,
               const std::string& model_path) {
    const btud::DataArray data = btud::load_data(data_path);
    const bool tensor = std::holds_alternative<btud::Tensor3>(data);
    const btud::ExperimentConfig c = build_config(g, o, tensor ? "custom" : "sinusoid");
    btud::SelectionOutcome out;
    if (tensor) {
        const auto& t = std::get<btud::Tensor3>(data);
        const btud::ModelDocument doc = model_path.empty() ? btud::decompose(t, c) : btud::load_model(model_path);
        out = btud::select_tensor(t, doc, c);
    } else {
        out = btud::select_matrix(std::get<btud::Matrix>(data), c);
    }
    const fs::path dir = prepare_out_dir(g);
    btud::save_selection(dir / "selection.csv", out.result);
    std::printf("selected %zu\n", out.result.selected_count());
    return kOk;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& selection_path, const std::string& truth_path) {
    const btud::SelectionResult sel = btud::load_selection(selection_path);
    const std::vector<bool> truth = btud::load_truth(truth_path);
    const btud::Confusion conf = btud::evaluate(sel.selected, truth);
    btud::ConfusionReport report = btud::aggregate({btud::MemberRecord{0, 0, conf, sel.selected_count()}});
    const fs::path dir = prepare_out_dir(g);
    btud::write_file(dir / "confusion.json", btud::report_to_json(report));
    print_confusion(conf);
    return kOk;
}

int cmd_ensemble(const GlobalOptions& g, const Overrides& o) {
    const btud::ExperimentConfig c = build_config(g, o, "synthetic-block");
    const fs::path dir = prepare_out_dir(g);
    btud::write_file(dir / "config.json", btud::config_to_json(c));
    std::vector<btud::MemberRecord> done;
    try {
        const btud::ConfusionReport r = btud::run_ensemble(c, [&done](const btud::MemberRun& run) {
            done.push_back(run.record);
            std::fprintf(stderr, "member %d seed %llu selected %zu\n", run.record.member,
                         static_cast<unsigned long long>(run.record.seed), run.record.selected);
        });
        btud::write_file(dir / "summary.json", btud::report_to_json(r));
        btud::write_file(dir / "members.csv", btud::members_to_csv(r));
        std::printf("ensembles %d\n", r.ensembles);
        print_confusion(r.mean);
    } catch (...) {
        const btud::ConfusionReport partial = btud::aggregate(done);
        btud::write_file(dir / "summary.partial.json", btud::report_to_json(partial));
        btud::write_file(dir / "members.partial.csv", btud::members_to_csv(partial));
        throw;
    }
    return kOk;
}

int cmd_report(const GlobalOptions& g, const std::string& data_path, const std::string& model_path,
               const std::string& selection_path, const std::string& truth_path, long rank) {
    btud::ReportInputs in;
    in.data = btud::load_data(data_path);
    if (!model_path.empty()) in.model = btud::load_model(model_path);
    if (!selection_path.empty()) in.selection = btud::load_selection(selection_path);
    if (!truth_path.empty()) in.truth = btud::load_truth(truth_path);
    in.matrix_rank = rank;
    const fs::path dir = prepare_out_dir(g);
    for (const fs::path& p : btud::write_report(dir, in)) {
        std::printf("%s %s\n", p.filename().string().c_str(), btud::file_checksum(p).c_str());
    }
    return kOk;
}

/// Missing report inputs are a usage error rather than an I/O failure.
int require_file(const std::string& path, const char* what) {
    if (!fs::exists(path)) {
        std::fprintf(stderr, "error: %s '%s' does not exist\n", what, path.c_str());
        return kUsage;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian Tucker decomposition and unsupervised feature selection"};
    app.require_subcommand(1);

    GlobalOptions g;
    Overrides o;
    app.add_option("--seed", g.seed, "base seed (ensemble member m uses seed + m)");
    app.add_option("--threads", g.threads, "worker threads (0 = all cores)");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--config", g.config_path, "experiment config JSON");
    app.add_option("--experiment", g.experiment, "synthetic-block | sinusoid | rcs-gcm | custom");

    auto* gen = app.add_subcommand("generate", "write a generated data set and its truth mask");
    add_generator_flags(gen, o);

    std::string data_path;
    std::string model_path;
    auto* dec = app.add_subcommand("decompose", "fit a Tucker model to a data file");
    dec->add_option("--data", data_path, "tensor or matrix file")->required();
    add_decomp_flags(dec, o);

    auto* sel = app.add_subcommand("select", "compute P-values and the selected features");
    sel->add_option("--data", data_path, "tensor or matrix file")->required();
    sel->add_option("--model", model_path, "model JSON (tensor data; decomposed on the fly if absent)");
    add_decomp_flags(sel, o);
    add_select_flags(sel, o);

    std::string selection_path;
    std::string truth_path;
    auto* eva = app.add_subcommand("evaluate", "confusion counts against a truth mask");
    eva->add_option("--selection", selection_path, "selection CSV")->required();
    eva->add_option("--truth", truth_path, "truth CSV")->required();

    auto* ens = app.add_subcommand("ensemble", "repeat generate/decompose/select/evaluate");
    ens->add_option("--ensembles", o.ensembles, "member count");
    add_generator_flags(ens, o);
    add_decomp_flags(ens, o);
    add_select_flags(ens, o);

    long report_rank = 2;
    auto* rep = app.add_subcommand("report", "plot-ready CSVs from earlier outputs");
    rep->add_option("--data", data_path, "tensor or matrix file")->required();
    rep->add_option("--model", model_path, "model JSON (tensor data)");
    rep->add_option("--selection", selection_path, "selection CSV");
    rep->add_option("--truth", truth_path, "truth CSV");
    rep->add_option("--rank", report_rank, "matrix data: SVD components to write");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_generate(g, o);
        if (*dec) return cmd_decompose(g, o, data_path);
        if (*sel) return cmd_select(g, o, data_path, model_path);
        if (*eva) return cmd_evaluate(g, selection_path, truth_path);
        if (*ens) return cmd_ensemble(g, o);
        if (*rep) {
            if (const int rc = require_file(data_path, "--data")) return rc;
            for (const std::string* p : {&model_path, &selection_path, &truth_path}) {
                if (!p->empty()) {
                    if (const int rc = require_file(*p, "input")) return rc;
                }
            }
            return cmd_report(g, data_path, model_path, selection_path, truth_path, report_rank);
        }
    } catch (const btud::ArgumentError& e) {
        std::fprintf(stderr, "argument error: %s\n", e.what());
        return kUsage;
    } catch (const btud::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    } catch (const btud::DegenerateVarianceError& e) {
        std::fprintf(stderr, "numerical error (component %ld): %s\n", e.component() + 1, e.what());
        return kNumerical;
    } catch (const btud::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kNumerical;
    }
    return kUsage;
}
