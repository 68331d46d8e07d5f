#include "btud/pipeline.hpp"

#include "btud/errors.hpp"
#include "btud/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace btud {

using nlohmann::json;

namespace {

json components_json(const ComponentSet& s) {
    json out = json::array();
    for (Index c : s) out.push_back(c + 1);
    return out;
}

ComponentSet components_from_json(const json& j, const char* key) {
    ComponentSet out;
    for (const json& v : j) {
        const long long c = v.get<long long>();
        if (c < 1) throw ArgumentError(std::string(key) + ": components are 1-based");
        out.push_back(static_cast<Index>(c - 1));
    }
    return out;
}

Ranks ranks_from_json(const json& j) {
    const auto r = j.get<std::vector<Index>>();
    if (r.size() != 3) throw ArgumentError("ranks needs three entries");
    return {r[0], r[1], r[2]};
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void check_components_in(const ComponentSet& s, Index extent, const char* what) {
    for (Index c : s) {
        if (c < 0 || c >= extent) {
            throw ArgumentError(std::string(what) + " component " + std::to_string(c + 1) +
                                " exceeds rank " + std::to_string(extent));
        }
    }
}

ComponentSet choose_components(const TuckerModel& model, const ExperimentConfig& c) {
    if (c.rule == ComponentRule::fixed) return c.components;
    const auto ranked = rank_components_by_core(model.core, c.fixed_l2, c.fixed_l3);
    const auto keep = static_cast<std::size_t>(std::min<Index>(c.by_core_count, static_cast<Index>(ranked.size())));
    ComponentSet out;
    for (std::size_t i = 0; i < keep; ++i) out.push_back(ranked[i].first);
    std::sort(out.begin(), out.end());
    return out;
}

double sample_sd(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

std::optional<Ranks> rank_caps(Experiment e) {
    switch (e) {
    case Experiment::synthetic_block:
        return Ranks{10, 5, 5};
    case Experiment::sinusoid:
        return Ranks{10, 2, 1};
    default:
        return std::nullopt;
    }
}

ExperimentConfig preset(Experiment e) {
    ExperimentConfig c;
    c.experiment = e;
    switch (e) {
    case Experiment::synthetic_block:
        c.ranks = {10, 5, 5};
        c.components = {0};
        // A fixed point to 1e-6 needs the factors themselves to settle, which
        // the error-change test alone does not guarantee on this data. Kept an
        // order below btud_fit's default tol so a refit stops after one sweep.
        c.hooi = {20000, 1e-8, 1e-9};
        break;
    case Experiment::sinusoid:
        c.ranks = {10, 2, 1};
        c.components = {0, 1};
        break;
    case Experiment::rcs_gcm:
        c.ranks = {10, 1, 1};
        c.components = {0};
        break;
    case Experiment::custom:
        break;
    }
    return c;
}

void validate(const ExperimentConfig& c) {
    if (c.ranks.l1 < 1 || c.ranks.l2 < 1 || c.ranks.l3 < 1) throw ArgumentError("ranks must be >= 1");
    if (const auto caps = rank_caps(c.experiment)) {
        for (int mode = 1; mode <= 3; ++mode) {
            if (c.ranks[mode] > (*caps)[mode]) {
                throw ArgumentError("rank " + std::to_string(c.ranks[mode]) + " for mode " +
                                    std::to_string(mode) + " exceeds the " + to_string(c.experiment) +
                                    " cap " + std::to_string((*caps)[mode]));
            }
        }
    }
    if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) throw ArgumentError("alpha must be >= 0");
    if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ArgumentError("threshold must lie in (0, 1)");
    if (c.ensembles < 1) throw ArgumentError("ensembles must be >= 1");
    if (!(c.consistency_tol > 0.0)) throw ArgumentError("consistency tolerance must be > 0");
    if (c.hooi.max_iter < 1 || !(c.hooi.tol > 0.0) || !(c.hooi.factor_tol >= 0.0)) {
        throw ArgumentError("invalid HOOI settings");
    }
    if (c.btud.max_sweeps < 1 || !(c.btud.tol > 0.0)) throw ArgumentError("invalid btud settings");

    const bool matrix = c.experiment == Experiment::sinusoid || c.experiment == Experiment::rcs_gcm;
    const Index extent = matrix ? c.ranks.l2 : c.ranks.l1;
    if (c.rule == ComponentRule::fixed) {
        if (c.components.empty()) throw ArgumentError("component list is empty");
        check_components_in(c.components, extent, "selection");
    } else {
        if (matrix) throw ArgumentError("the by-core rule needs tensor data");
        if (c.by_core_count < 1 || c.by_core_count > c.ranks.l1) {
            throw ArgumentError("by-core count must lie in [1, L1]");
        }
        check_components_in(c.fixed_l2, c.ranks.l2, "fixed l2");
        check_components_in(c.fixed_l3, c.ranks.l3, "fixed l3");
    }
}

std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::synthetic_block:
        return "synthetic-block";
    case Experiment::sinusoid:
        return "sinusoid";
    case Experiment::rcs_gcm:
        return "rcs-gcm";
    default:
        return "custom";
    }
}

std::string to_string(SolverKind s) {
    switch (s) {
    case SolverKind::hooi:
        return "hooi";
    case SolverKind::btud:
        return "btud";
    default:
        return "hooi-then-check";
    }
}

Experiment parse_experiment(const std::string& s) {
    if (s == "synthetic-block") return Experiment::synthetic_block;
    if (s == "sinusoid") return Experiment::sinusoid;
    if (s == "rcs-gcm") return Experiment::rcs_gcm;
    if (s == "custom") return Experiment::custom;
    throw ArgumentError("unknown experiment '" + s + "'");
}

SolverKind parse_solver(const std::string& s) {
    if (s == "hooi") return SolverKind::hooi;
    if (s == "btud") return SolverKind::btud;
    if (s == "hooi-then-check") return SolverKind::hooi_then_check;
    throw ArgumentError("unknown solver '" + s + "'");
}

ComponentRule parse_rule(const std::string& s) {
    if (s == "fixed") return ComponentRule::fixed;
    if (s == "by-core") return ComponentRule::by_core;
    throw ArgumentError("unknown component rule '" + s + "'");
}

SelectionMethod parse_method(const std::string& s) {
    if (s == "btud") return SelectionMethod::btud;
    if (s == "td") return SelectionMethod::td;
    throw ArgumentError("unknown selection method '" + s + "'");
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig c = preset(parse_experiment(j.value("experiment", std::string("synthetic-block"))));
        if (j.contains("ranks")) c.ranks = ranks_from_json(j.at("ranks"));
        if (j.contains("solver")) c.solver = parse_solver(j.at("solver").get<std::string>());
        read_if(j, "alpha", c.alpha);
        read_if(j, "consistency_tol", c.consistency_tol);
        if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
        if (j.contains("component_rule")) c.rule = parse_rule(j.at("component_rule").get<std::string>());
        if (j.contains("components")) c.components = components_from_json(j.at("components"), "components");
        if (j.contains("fixed_l2")) c.fixed_l2 = components_from_json(j.at("fixed_l2"), "fixed_l2");
        if (j.contains("fixed_l3")) c.fixed_l3 = components_from_json(j.at("fixed_l3"), "fixed_l3");
        read_if(j, "by_core_count", c.by_core_count);
        read_if(j, "threshold", c.threshold);
        read_if(j, "ensembles", c.ensembles);
        read_if(j, "seed", c.seed);
        read_if(j, "threads", c.threads);
        if (j.contains("hooi")) {
            const json& h = j.at("hooi");
            read_if(h, "max_iter", c.hooi.max_iter);
            read_if(h, "tol", c.hooi.tol);
            read_if(h, "factor_tol", c.hooi.factor_tol);
        }
        if (j.contains("btud")) {
            const json& b = j.at("btud");
            read_if(b, "max_sweeps", c.btud.max_sweeps);
            read_if(b, "tol", c.btud.tol);
        }
        if (j.contains("sigma")) {
            const json& s = j.at("sigma");
            read_if(s, "bins", c.sigma.bins);
            read_if(s, "exclusion_threshold", c.sigma.exclusion_threshold);
            if (s.contains("sharing")) {
                const auto v = s.at("sharing").get<std::string>();
                if (v != "shared" && v != "per-component") throw ArgumentError("unknown sigma sharing '" + v + "'");
                c.sigma.sharing = v == "shared" ? SigmaSharing::shared : SigmaSharing::per_component;
            }
        }
        if (j.contains("generator")) {
            const json& g = j.at("generator");
            auto& sb = c.synthetic;
            auto& sn = c.sinusoid;
            auto& gc = c.gcm;
            switch (c.experiment) {
            case Experiment::synthetic_block:
                read_if(g, "n", sb.n);
                read_if(g, "m", sb.m);
                read_if(g, "k", sb.k);
                read_if(g, "n1", sb.n1);
                read_if(g, "mu", sb.mu);
                break;
            case Experiment::sinusoid:
                read_if(g, "n", sn.n);
                read_if(g, "m", sn.m);
                read_if(g, "n1", sn.n1);
                read_if(g, "period", sn.period);
                break;
            case Experiment::rcs_gcm:
                read_if(g, "n", gc.n);
                read_if(g, "steps", gc.steps);
                read_if(g, "a", gc.a);
                read_if(g, "c", gc.c);
                read_if(g, "classic", gc.classic);
                break;
            case Experiment::custom:
                break;
            }
        }
        c.btud.consistency_tol = c.consistency_tol;
        return c;
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("bad config value: ") + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["ranks"] = {c.ranks.l1, c.ranks.l2, c.ranks.l3};
    j["solver"] = to_string(c.solver);
    j["alpha"] = c.alpha;
    j["consistency_tol"] = c.consistency_tol;
    j["method"] = c.method == SelectionMethod::btud ? "btud" : "td";
    j["component_rule"] = c.rule == ComponentRule::fixed ? "fixed" : "by-core";
    j["components"] = components_json(c.components);
    j["fixed_l2"] = components_json(c.fixed_l2);
    j["fixed_l3"] = components_json(c.fixed_l3);
    j["by_core_count"] = c.by_core_count;
    j["threshold"] = c.threshold;
    j["ensembles"] = c.ensembles;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["hooi"] = {{"max_iter", c.hooi.max_iter}, {"tol", c.hooi.tol}, {"factor_tol", c.hooi.factor_tol}};
    j["btud"] = {{"max_sweeps", c.btud.max_sweeps}, {"tol", c.btud.tol}};
    j["sigma"] = {{"bins", c.sigma.bins},
                  {"exclusion_threshold", c.sigma.exclusion_threshold},
                  {"sharing", c.sigma.sharing == SigmaSharing::shared ? "shared" : "per-component"}};
    switch (c.experiment) {
    case Experiment::synthetic_block:
        j["generator"] = {{"n", c.synthetic.n}, {"m", c.synthetic.m}, {"k", c.synthetic.k},
                          {"n1", c.synthetic.n1}, {"mu", c.synthetic.mu}};
        break;
    case Experiment::sinusoid:
        j["generator"] = {{"n", c.sinusoid.n}, {"m", c.sinusoid.m}, {"n1", c.sinusoid.n1},
                          {"period", c.sinusoid.period}};
        break;
    case Experiment::rcs_gcm:
        j["generator"] = {{"n", c.gcm.n}, {"steps", c.gcm.steps}, {"a", c.gcm.a}, {"c", c.gcm.c},
                          {"classic", c.gcm.classic}};
        break;
    case Experiment::custom:
        break;
    }
    return j.dump(2) + "\n";
}

Dataset generate(const ExperimentConfig& c, std::uint64_t seed) {
    switch (c.experiment) {
    case Experiment::synthetic_block: {
        SyntheticBlockParams p = c.synthetic;
        p.seed = seed;
        LabeledTensor d = gen_synthetic_block(p);
        return {std::move(d.data), std::move(d.truth)};
    }
    case Experiment::sinusoid: {
        SinusoidParams p = c.sinusoid;
        p.seed = seed;
        LabeledMatrix d = gen_sinusoid(p);
        return {std::move(d.data), std::move(d.truth)};
    }
    case Experiment::rcs_gcm: {
        GcmParams p = c.gcm;
        p.seed = seed;
        return {simulate_rcs_gcm(p, c.gcm_options), {}};
    }
    default:
        throw ArgumentError("custom experiments read their data from a file");
    }
}

ModelDocument decompose(const Tensor3& t, const ExperimentConfig& c) {
    ModelDocument doc;
    doc.alpha = c.alpha;
    doc.solver = to_string(c.solver);
    HooiResult h = hooi(t, c.ranks, c.hooi);
    if (c.solver == SolverKind::btud) {
        BtudOptions opt = c.btud;
        opt.consistency_tol = c.consistency_tol;
        BtudResult b = btud_fit(t, h.model, c.alpha, opt);
        doc.model = std::move(b.model);
        doc.beta = b.posterior.beta;
        doc.report = std::move(b.report);
        return doc;
    }
    doc.model = std::move(h.model);
    doc.report = std::move(h.report);
    doc.beta = estimate_beta(t, doc.model);
    if (c.solver == SolverKind::hooi_then_check) {
        const SelfConsistency sc = self_consistency_check(t, doc.model, c.alpha, doc.beta, c.consistency_tol);
        doc.report.self_consistent = sc.self_consistent;
        doc.report.max_mode_deviation = sc.max_mode_deviation();
        doc.consistency = sc;
    }
    return doc;
}

SelectionOutcome select_tensor(const Tensor3& t, const ModelDocument& model, const ExperimentConfig& c) {
    if (!(model.model.data_dims() == t.dims())) throw ArgumentError("model does not match the data dimensions");
    SelectionOutcome out;
    out.components = choose_components(model.model, c);
    check_components_in(out.components, model.model.ranks().l1, "selection");
    if (c.method == SelectionMethod::td) {
        const SigmaFit fit = optimize_sigma(model.model.factors[0], out.components, c.sigma);
        out.sigma = fit.sigma;
        out.result = select_features(td_pvalues(model.model.factors[0], fit.sigma, out.components), c.threshold);
        return out;
    }
    out.beta = model.beta > 0.0 ? model.beta : estimate_beta(t, model.model);
    const ModeStats post = posterior_stats(t, model.model, 1, c.alpha, out.beta);
    out.result = select_features(btud_pvalues(post.mean, post.cov, out.components), c.threshold);
    return out;
}

SelectionOutcome select_matrix(const Matrix& x, const ExperimentConfig& c) {
    if (c.rule != ComponentRule::fixed) throw ArgumentError("the by-core rule needs tensor data");
    SvdSelectOptions opt;
    opt.model_rank = c.ranks.l2;
    opt.sigma = c.sigma;
    SvdSelectResult r = svd_select(x, c.components, c.method, c.threshold, opt);
    SelectionOutcome out;
    out.result = std::move(r.selection);
    out.components = c.components;
    out.beta = r.beta;
    out.sigma = std::move(r.sigma);
    out.feature_loadings = std::move(r.feature_loadings);
    out.sample_loadings = std::move(r.sample_loadings);
    return out;
}

Confusion evaluate(const std::vector<bool>& selected, const std::vector<bool>& truth) {
    if (selected.size() != truth.size()) {
        throw ArgumentError("selection has " + std::to_string(selected.size()) + " features, truth has " +
                            std::to_string(truth.size()));
    }
    Confusion out;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (selected[i]) {
            (truth[i] ? out.tp : out.fp) += 1.0;
        } else {
            (truth[i] ? out.fn : out.tn) += 1.0;
        }
    }
    return out;
}

MemberRun run_member(const ExperimentConfig& c, int member) {
    MemberRun run;
    run.record.member = member;
    run.record.seed = c.seed + static_cast<std::uint64_t>(member);
    run.dataset = generate(c, run.record.seed);
    if (const auto* t = std::get_if<Tensor3>(&run.dataset.data)) {
        run.model = decompose(*t, c);
        run.selection = select_tensor(*t, *run.model, c);
        const FitReport& rep = run.model->report;
        run.record.converged = rep.converged;
        run.record.sweeps = rep.sweeps;
        if (c.solver != SolverKind::hooi) {
            run.record.self_consistent = rep.self_consistent;
            run.record.max_mode_deviation = rep.max_mode_deviation;
        }
    } else {
        run.selection = select_matrix(std::get<Matrix>(run.dataset.data), c);
    }
    run.record.selected = run.selection.result.selected_count();
    if (!run.dataset.truth.empty()) {
        run.record.confusion = evaluate(run.selection.result.selected, run.dataset.truth);
    }
    return run;
}

ConfusionReport aggregate(std::vector<MemberRecord> members) {
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.member < b.member; });
    ConfusionReport r;
    r.ensembles = static_cast<int>(members.size());
    if (members.empty()) return r;
    auto column = [&members](double Confusion::*field) {
        std::vector<double> v;
        for (const auto& m : members) v.push_back(m.confusion.*field);
        return v;
    };
    for (double Confusion::*field : {&Confusion::tn, &Confusion::fn, &Confusion::fp, &Confusion::tp}) {
        const std::vector<double> v = column(field);
        double sum = 0.0;
        for (double x : v) sum += x;
        r.mean.*field = sum / static_cast<double>(v.size());
        r.sd.*field = sample_sd(v, r.mean.*field);
    }
    r.members = std::move(members);
    return r;
}

ConfusionReport run_ensemble(const ExperimentConfig& c, const std::function<void(const MemberRun&)>& on_member) {
    validate(c);
    unsigned workers = c.threads != 0 ? c.threads : std::thread::hardware_concurrency();
    workers = std::clamp(workers, 1u, static_cast<unsigned>(c.ensembles));

    std::vector<MemberRecord> records;
    std::mutex lock;
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;

    auto work = [&] {
        for (;;) {
            if (failed.load()) return;
            const int member = next.fetch_add(1);
            if (member >= c.ensembles) return;
            try {
                MemberRun run = run_member(c, member);
                const std::lock_guard<std::mutex> guard(lock);
                records.push_back(run.record);
                if (on_member) on_member(run);
            } catch (...) {
                const std::lock_guard<std::mutex> guard(lock);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };

    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return aggregate(std::move(records));
}

std::string report_to_json(const ConfusionReport& r) {
    auto conf = [](const Confusion& x) { return json{{"tn", x.tn}, {"fn", x.fn}, {"fp", x.fp}, {"tp", x.tp}}; };
    json j;
    j["ensembles"] = r.ensembles;
    j["mean"] = conf(r.mean);
    j["sd"] = conf(r.sd);
    json members = json::array();
    for (const auto& m : r.members) {
        json row = conf(m.confusion);
        row["member"] = m.member;
        row["seed"] = m.seed;
        row["selected"] = m.selected;
        row["converged"] = m.converged;
        row["self_consistent"] = m.self_consistent;
        row["max_mode_deviation"] = m.max_mode_deviation;
        row["sweeps"] = m.sweeps;
        members.push_back(std::move(row));
    }
    j["members"] = std::move(members);
    return j.dump(2) + "\n";
}

std::string members_to_csv(const ConfusionReport& r) {
    std::string out = "member,seed,tn,fn,fp,tp,selected,converged,self_consistent,max_mode_deviation,sweeps\n";
    for (const auto& m : r.members) {
        out += std::to_string(m.member) + "," + std::to_string(m.seed) + "," + format_number(m.confusion.tn) + "," +
               format_number(m.confusion.fn) + "," + format_number(m.confusion.fp) + "," +
               format_number(m.confusion.tp) + "," + std::to_string(m.selected) + "," +
               (m.converged ? "1" : "0") + "," + (m.self_consistent ? "1" : "0") + "," +
               format_number(m.max_mode_deviation) + "," + std::to_string(m.sweeps) + "\n";
    }
    return out;
}

namespace {

std::string loadings_csv(const char* index_name, const Matrix& u, const std::vector<bool>* truth,
                         const std::vector<int>* group) {
    std::string out = index_name;
    if (group) out += ",group";
    for (Index l = 0; l < u.rows(); ++l) out += ",u" + std::to_string(l + 1);
    if (truth) out += ",truth";
    out += "\n";
    for (Index d = 0; d < u.cols(); ++d) {
        out += std::to_string(d + 1);
        if (group) out += "," + std::to_string((*group)[static_cast<std::size_t>(d)]);
        for (Index l = 0; l < u.rows(); ++l) out += "," + format_number(u(l, d));
        if (truth) out += (*truth)[static_cast<std::size_t>(d)] ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

std::vector<int> halves(Index extent) {
    std::vector<int> g(static_cast<std::size_t>(extent));
    for (Index d = 0; d < extent; ++d) g[static_cast<std::size_t>(d)] = 2 * d < extent ? 1 : 2;
    return g;
}

}  // namespace

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& text) {
        write_file(dir / name, text);
        written.push_back(dir / name);
    };
    Index features = 0;
    if (const auto* t = std::get_if<Tensor3>(&in.data)) {
        if (!in.model) throw ArgumentError("a tensor report needs a model");
        const TuckerModel& m = in.model->model;
        if (!(m.data_dims() == t->dims())) throw ArgumentError("model does not match the data dimensions");
        features = t->dims().n;
        const std::vector<bool>* truth = in.truth.empty() ? nullptr : &in.truth;
        if (truth && static_cast<Index>(truth->size()) != features) throw ArgumentError("truth length mismatch");
        emit("u1i.csv", loadings_csv("feature_index", m.factors[0], truth, nullptr));
        const std::vector<int> g2 = halves(t->dims().m);
        const std::vector<int> g3 = halves(t->dims().k);
        emit("u2j.csv", loadings_csv("j", m.factors[1], nullptr, &g2));
        emit("u3k.csv", loadings_csv("k", m.factors[2], nullptr, &g3));
        std::string core = "l1,l2,l3,value\n";
        const Dims3 cd = m.core.dims();
        for (Index c = 0; c < cd.k; ++c) {
            for (Index b = 0; b < cd.m; ++b) {
                for (Index a = 0; a < cd.n; ++a) {
                    core += std::to_string(a + 1) + "," + std::to_string(b + 1) + "," + std::to_string(c + 1) +
                            "," + format_number(m.core(a, b, c)) + "\n";
                }
            }
        }
        emit("core.csv", core);
    } else {
        const Matrix& x = std::get<Matrix>(in.data);
        features = x.rows();
        const std::vector<bool>* truth = in.truth.empty() ? nullptr : &in.truth;
        if (truth && static_cast<Index>(truth->size()) != features) throw ArgumentError("truth length mismatch");
        if (in.matrix_rank < 1) throw ArgumentError("matrix report rank must be >= 1");
        const SvdResult d = svd(x, in.matrix_rank);
        emit("u_scatter.csv", loadings_csv("feature_index", d.u.transpose(), truth, nullptr));
        emit("u1j.csv", loadings_csv("j", d.v.transpose(), nullptr, nullptr));
    }
    if (in.selection) {
        const auto& sel = in.selection->selected;
        if (static_cast<Index>(sel.size()) != features) throw ArgumentError("selection length mismatch");
        std::string chosen = "feature_index\n";
        std::string rest = "feature_index\n";
        for (std::size_t i = 0; i < sel.size(); ++i) (sel[i] ? chosen : rest) += std::to_string(i + 1) + "\n";
        emit("selected_rows.csv", chosen);
        emit("unselected_rows.csv", rest);
    }
    return written;
}

}  // namespace btud
