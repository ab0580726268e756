#pragma once

// Sweep orchestration for the three approaches.
//
//   classical  k-means on the preprocessed features, one row per (K, seed)
//   hybrid     random circuit -> mapped network -> features appended to the
//              classical ones -> k-means, one row per (K, depth, seed) plus
//              Worst / Average / Best aggregate rows per (K, depth)
//   qnn        SwAV training per (prototypes, depth, seed), k-means on the
//              eval-mode features of every epoch, plus a best-epoch row per
//              (K, prototypes, depth)
//
// Every cell draws its randomness from derive_seed(master_seed, coordinates),
// so results do not depend on the worker count or schedule.

#include <cstddef>
#include <string>
#include <vector>

#include "qclust/config.hpp"
#include "qclust/matrix.hpp"

namespace qclust::harness {

namespace method {
inline const std::string kClassical = "Classical Features";
inline const std::string kQuantum = "Quantum Features";
inline const std::string kWorst = "Quantum Features (Worst Run)";
inline const std::string kAverage = "Quantum Features (Average)";
inline const std::string kBest = "Quantum Features (Best Run)";
inline const std::string kQnn = "QNN";
inline const std::string kQnnBest = "QNN (Best Epoch)";
}  // namespace method

/// -1 marks "not applicable" in depth, prototypes, epoch and seed columns.
inline constexpr int kNotApplicable = -1;

struct MetricsRow {
    int k = 0;
    std::string method;
    int depth = kNotApplicable;
    int prototypes = kNotApplicable;
    int epoch = kNotApplicable;
    int seed = kNotApplicable;
    double silhouette = 0.0;
    double davies_bouldin = 0.0;
    double calinski_harabasz = 0.0;
    bool degenerate = false;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct TrainingLogRow {
    int prototypes = 0;
    int depth = 0;
    int seed = 0;
    int epoch = 0;
    int batch = 0;
    double loss = 0.0;
};

struct Dataset {
    FeatureMatrix features;
    std::vector<int> planted_labels;  // empty for CSV input
    std::size_t dropped = 0;
};

/// Synthesizes or loads the transactions named by the config and preprocesses them.
Dataset load_dataset(const ExperimentConfig& config);

std::vector<MetricsRow> run_classical(const ExperimentConfig& config, const FeatureMatrix& features);
std::vector<MetricsRow> run_hybrid(const ExperimentConfig& config, const FeatureMatrix& features);

struct QnnOutput {
    std::vector<MetricsRow> rows;
    std::vector<TrainingLogRow> log;
    std::vector<std::string> diagnostics;
};
QnnOutput run_qnn(const ExperimentConfig& config, const FeatureMatrix& features);

std::vector<MetricsRow> run_classical(const ExperimentConfig& config);
std::vector<MetricsRow> run_hybrid(const ExperimentConfig& config);
QnnOutput run_qnn(const ExperimentConfig& config);

struct SweepResult {
    std::vector<MetricsRow> rows;  // canonical order
    std::vector<TrainingLogRow> log;
    std::vector<std::string> diagnostics;
};

/// Runs every configured approach on one dataset.
SweepResult run_experiment(const ExperimentConfig& config, const FeatureMatrix& features);

/// Sorts by (method, K, depth, prototypes, seed, epoch) with methods in
/// pipeline order; the order the CSV is written in.
void sort_rows(std::vector<MetricsRow>& rows);

/// Worst / Average / Best rows over the given seed rows (selected by silhouette).
std::vector<MetricsRow> aggregate_runs(const std::vector<MetricsRow>& seed_rows);

}  // namespace qclust::harness
