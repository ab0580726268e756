#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qclust/harness.hpp"

namespace qclust::harness {

inline constexpr const char* kMetricsHeader =
    "K,method,depth,prototypes,epoch,seed,silhouette,davies_bouldin,calinski_harabasz,degenerate";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

void write_training_log(const std::filesystem::path& path, const std::vector<TrainingLogRow>& log);

enum class Metric { Silhouette, DaviesBouldin, CalinskiHarabasz };

/// SVG line chart of the metric against circuit depth, one series per method
/// (averaged over the other axes); depth-less rows are drawn as a dashed
/// reference line. Calinski-Harabasz uses a log10 axis.
std::string render_plot(const std::vector<MetricsRow>& rows, Metric metric);

/// Markdown table of the best row per (K, method), plus a depth-1 comparison.
std::string render_summary(const std::vector<MetricsRow>& rows);

struct ReportFiles {
    std::filesystem::path metrics_csv;
    std::vector<std::filesystem::path> plots;
    std::filesystem::path summary;
};

/// Writes metrics.csv, silhouette.svg, davies_bouldin.svg,
/// calinski_harabasz.svg and summary.md into `output_dir` (created if
/// needed). ArgumentError on empty rows, IoError if the directory is unusable.
ReportFiles report(std::vector<MetricsRow> rows, const std::filesystem::path& output_dir);

}  // namespace qclust::harness
