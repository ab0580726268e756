#pragma once

// Transaction ingestion, synthetic data generation and feature preprocessing
// (label encoding of categorical fields plus median/IQR robust scaling).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qclust/matrix.hpp"

namespace qclust::pipeline {

struct TransactionRecord {
    std::int64_t block_number = 0;
    std::int64_t time_stamp = 0;  // unix seconds
    std::string hash;
    std::string from_addr;
    std::string to_addr;
    double value = 0.0;
    std::string token_name;
    std::string token_symbol;

    friend bool operator==(const TransactionRecord&, const TransactionRecord&) = default;
};

inline constexpr const char* kTransactionHeader =
    "BlockNumber,TimeStamp,Hash,From,To,Value,TokenName,TokenSymbol";

struct LoadResult {
    std::vector<TransactionRecord> records;
    std::size_t dropped = 0;  // incomplete or unparsable rows
};

/// Reads a transaction CSV. The header must match kTransactionHeader exactly
/// (FormatError otherwise); a missing file is an IoError. Rows with empty
/// cells, the wrong cell count, unparsable numbers or a non-finite value are
/// dropped and counted. Surviving rows keep their file order.
LoadResult load_transactions(const std::filesystem::path& path);

void write_transactions(const std::filesystem::path& path,
                        const std::vector<TransactionRecord>& records);

struct LabelEncoding {
    std::vector<std::int64_t> codes;
    std::vector<std::string> classes;  // classes[code] is the original string

    const std::string& decode(std::int64_t code) const { return classes.at(static_cast<std::size_t>(code)); }
};

/// Codes assigned by order of first appearance, starting at 0.
LabelEncoding label_encode(const std::vector<std::string>& column);

/// Per column (x - median) / IQR with linear-interpolation quantiles; a zero
/// IQR is replaced by 1. Needs at least two samples.
FeatureMatrix robust_scale(const FeatureMatrix& matrix);

/// Linear-interpolation quantile of an ascending-sorted sample, q in [0, 1].
double sorted_quantile(const std::vector<double>& sorted, double q);

struct SynthDataset {
    std::vector<TransactionRecord> records;
    std::vector<int> labels;  // planted cluster per record
};

/// Planted Gaussian blobs over (BlockNumber, TimeStamp, Value). Addresses and
/// tokens are drawn from per-blob pools. `spread` is the blob standard
/// deviation relative to the spacing between blob centres. Records come back
/// in chronological order, as a chain export would list them.
SynthDataset synth_transactions(std::size_t n_samples, std::size_t n_clusters, double spread,
                                std::uint64_t seed);

/// Concentric rings in the (BlockNumber, Value) plane with categorical fields
/// independent of ring membership. Hard for centroid-based clustering.
SynthDataset synth_rings(std::size_t n_samples, std::size_t n_rings, double spread,
                         std::uint64_t seed);

/// Feature columns in output order.
const std::vector<std::string>& feature_names();

/// Drops Hash, label-encodes From/To/TokenName/TokenSymbol, and robust-scales
/// all seven columns jointly. Needs at least two records.
FeatureMatrix preprocess(const std::vector<TransactionRecord>& records);

/// Adjusted Rand index between two labelings; diagnostic for planted data only.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace qclust::pipeline
