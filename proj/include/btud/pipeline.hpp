#pragma once

#include "btud/datagen.hpp"
#include "btud/decomp.hpp"
#include "btud/io.hpp"
#include "btud/select.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace btud {

enum class Experiment { synthetic_block, sinusoid, rcs_gcm, custom };
enum class SolverKind { hooi, btud, hooi_then_check };
enum class ComponentRule { fixed, by_core };

/// One experiment: data source, decomposition, selection rule, ensemble size.
/// Component indices are 0-based here; the JSON form and the CLI are 1-based.
struct ExperimentConfig {
    Experiment experiment = Experiment::synthetic_block;
    SyntheticBlockParams synthetic{};
    SinusoidParams sinusoid{};
    GcmParams gcm{};
    GcmOptions gcm_options{};

    Ranks ranks{10, 5, 5};
    SolverKind solver = SolverKind::hooi_then_check;
    double alpha = 0.0;
    HooiOptions hooi{};
    BtudOptions btud{};
    double consistency_tol = 1e-6;

    SelectionMethod method = SelectionMethod::btud;
    ComponentRule rule = ComponentRule::fixed;
    ComponentSet components{0};
    /// by-core rule: fixed mode-2 / mode-3 components and how many l1 to keep.
    ComponentSet fixed_l2{0};
    ComponentSet fixed_l3{0};
    Index by_core_count = 1;
    double threshold = 0.05;
    SigmaOptions sigma{};

    int ensembles = 1;
    std::uint64_t seed = 1;
    /// Concurrent ensemble members; 0 means hardware concurrency.
    unsigned threads = 1;
};

/// Experiment defaults: synthetic ranks (10,5,5) with l1 = {1}; sinusoid
/// model rank 2 with {1,2}; rcs-gcm model rank 1 with {1}.
ExperimentConfig preset(Experiment e);

/// Rank caps for the named experiments, e.g. (10,5,5) for synthetic-block.
std::optional<Ranks> rank_caps(Experiment e);

/// Throws ArgumentError on inconsistent settings.
void validate(const ExperimentConfig& c);

std::string to_string(Experiment e);
std::string to_string(SolverKind s);
Experiment parse_experiment(const std::string& s);
SolverKind parse_solver(const std::string& s);
ComponentRule parse_rule(const std::string& s);
SelectionMethod parse_method(const std::string& s);

/// JSON form. Missing keys keep the preset value of the named experiment.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& c);

struct Dataset {
    DataArray data;
    std::vector<bool> truth;  ///< empty when the generator has no ground truth
};

/// Generator run for `seed`; custom experiments cannot be generated.
Dataset generate(const ExperimentConfig& c, std::uint64_t seed);

/// Decomposition of tensor data with the configured solver.
ModelDocument decompose(const Tensor3& t, const ExperimentConfig& c);

struct SelectionOutcome {
    SelectionResult result;
    ComponentSet components;   ///< l1 components actually used
    double beta = 0.0;         ///< btud statistic only
    std::vector<double> sigma; ///< td statistic only
    Matrix feature_loadings;   ///< matrix path: R x N
    Matrix sample_loadings;    ///< matrix path: R x M
};

/// Tensor path: statistics from the mode-1 posterior (btud) or the mode-1
/// factor with optimized sigma (td).
SelectionOutcome select_tensor(const Tensor3& t, const ModelDocument& model, const ExperimentConfig& c);

/// Matrix path through svd_select; the model rank is ranks.l2.
SelectionOutcome select_matrix(const Matrix& x, const ExperimentConfig& c);

struct Confusion {
    double tn = 0.0;
    double fn = 0.0;
    double fp = 0.0;
    double tp = 0.0;
};

Confusion evaluate(const std::vector<bool>& selected, const std::vector<bool>& truth);

struct MemberRecord {
    int member = 0;
    std::uint64_t seed = 0;
    Confusion confusion;
    std::size_t selected = 0;
    bool converged = true;
    bool self_consistent = true;
    double max_mode_deviation = 0.0;
    int sweeps = 0;
};

struct ConfusionReport {
    Confusion mean;
    Confusion sd;
    int ensembles = 0;
    std::vector<MemberRecord> members;
};

/// Full result of one ensemble member, kept for reports and acceptance checks.
struct MemberRun {
    MemberRecord record;
    Dataset dataset;
    std::optional<ModelDocument> model;
    SelectionOutcome selection;
};

/// generate -> decompose -> select -> evaluate with seed c.seed + member.
MemberRun run_member(const ExperimentConfig& c, int member);

/// Runs every member (concurrently when c.threads != 1) and aggregates in member
/// order. `on_member`, if given, is called once per finished run; calls are
/// serialized but arrive in completion order, possibly from worker threads.
/// The first member failure stops dispatch and is rethrown after running
/// members finish.
ConfusionReport run_ensemble(const ExperimentConfig& c,
                             const std::function<void(const MemberRun&)>& on_member = {});

ConfusionReport aggregate(std::vector<MemberRecord> members);

std::string report_to_json(const ConfusionReport& r);

struct ReportInputs {
    DataArray data;
    std::optional<ModelDocument> model;       ///< required for tensor data
    std::optional<SelectionResult> selection;
    std::vector<bool> truth;                   ///< optional label column
    Index matrix_rank = 2;                     ///< SVD components written for matrix data
};

/// Plot-ready CSVs.
///
///   tensor: u1i.csv (feature loadings, truth), u2j.csv and u3k.csv (loadings
///           with a first-half/second-half group column), core.csv
///   matrix: u_scatter.csv (feature loadings, truth), u1j.csv (sample loadings)
///   with a selection: selected_rows.csv, unselected_rows.csv
///
/// Returns the paths written.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir, const ReportInputs& in);
std::string members_to_csv(const ConfusionReport& r);

}  // namespace btud
