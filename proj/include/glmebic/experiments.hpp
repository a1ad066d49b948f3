#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "glmebic/select.hpp"
#include "glmebic/simgen.hpp"

namespace glmebic {

struct PdrFdr {
  double pdr = 0.0;
  double fdr = 0.0;
};

/// PDR = |s* n s0| / |s0|, FDR = |s* \ s0| / |s*| (0 when s* is empty).
/// Throws InvalidArgs when the truth is empty.
PdrFdr pdr_fdr(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& truth);
PdrFdr pdr_fdr(const ModelIndex& selected, const TrueModel& truth);

struct ReplicateOutcome {
  std::uint64_t replicate_id = 0;
  bool failed = false;
  std::string error;
  std::vector<PdrFdr> metrics;                     // per gamma
  std::vector<std::vector<std::size_t>> selected;  // per gamma, sorted
};

struct CellSummary {
  int setting = 1;
  double rho = 0.0;
  std::size_t n = 0;
  std::string gamma_label;
  double gamma = 0.0;
  double mean_pdr = 0.0;
  double mean_fdr = 0.0;
  std::optional<double> se_pdr;  // sample SD over replicates; empty below 2 replicates
  std::optional<double> se_fdr;
  std::size_t n_reps = 0;
  std::size_t n_failed = 0;
};

struct ExperimentSummary {
  SimDesign design;
  std::uint64_t seed = 0;
  std::vector<CellSummary> cells;  // one per gamma
  std::vector<ReplicateOutcome> replicates;
};

/// Replicate r uses the RNG stream (seed, r). The fitting link is cloglog,
/// matching the generating model. Replicates run on `threads` workers; each
/// replicate's selection is single-threaded.
ExperimentSummary run_simulation_batch(const SimDesign& design, std::size_t replicates,
                                       SelectConfig config, std::uint64_t seed,
                                       std::size_t threads = 1);

void write_summary_tsv(std::ostream& out, const std::vector<ExperimentSummary>& summaries);
void write_replicates_tsv(std::ostream& out, const std::vector<ExperimentSummary>& summaries);

/// Folds are balanced within each response class. Returns the fold of every row.
std::vector<std::size_t> stratified_folds(std::span<const double> y, std::size_t folds,
                                          std::uint64_t seed);

struct CvOptions {
  std::size_t folds = 8;
  std::size_t path_length = 10;
  std::uint64_t seed = 0;
  GammaSpec gamma = GammaSpec::parse("paper-final");
  std::size_t screen_threshold = 1000;
  std::size_t screen_keep = 400;
  FitOptions fit;
  std::size_t threads = 1;
};

struct CvLinkReport {
  std::vector<std::string> links;
  std::vector<double> criterion;              // held-out log-likelihood summed over folds
  std::vector<std::vector<double>> per_fold;  // [link][fold]
  std::vector<std::size_t> fold_of;           // per row
  std::size_t folds = 0;
  std::size_t chosen = 0;

  const std::string& chosen_link() const { return links.at(chosen); }
};

CvLinkReport cv_select_link(const Dataset& data, const std::vector<LinkFamily>& links,
                            const CvOptions& options);

struct LinkOutcome {
  std::string link;
  SelectionPath path;                   // long path, used for rankings
  std::vector<std::size_t> final_features;  // selection order
  double final_loglik = 0.0;
  double final_ebic = 0.0;
};

struct FinalReport {
  double gamma = 0.0;
  std::size_t path_length = 0;
  bool screened = false;
  std::vector<LinkOutcome> links;
  CvLinkReport cv;
};

struct WorkflowOptions {
  std::size_t path_length = 50;
  CvOptions cv;
};

/// Long forward path per link, CV link choice, and the final EBIC selection
/// at the preset final gamma for every link.
FinalReport real_data_workflow(const Dataset& data, const std::vector<LinkFamily>& links,
                               const WorkflowOptions& options);

void write_cv_tsv(std::ostream& out, const CvLinkReport& report);
void write_paths_tsv(std::ostream& out, const FinalReport& report, const Dataset& data);
void write_final_tsv(std::ostream& out, const FinalReport& report, const Dataset& data);

/// "1834,4438"-style list of 1-based ids.
std::string one_based_list(const std::vector<std::size_t>& features);

}  // namespace glmebic
