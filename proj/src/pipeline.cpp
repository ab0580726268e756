#include "qclust/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <unordered_map>

#include "qclust/errors.hpp"
#include "qclust/seeding.hpp"
#include "qclust/text.hpp"

namespace qclust::pipeline {

namespace {

constexpr std::size_t kColumns = 8;
constexpr std::int64_t kGenesisTime = 1'600'000'000;
constexpr std::int64_t kFirstBlock = 18'000'000;
constexpr double kBlockSeconds = 12.0;

std::optional<TransactionRecord> parse_row(const std::vector<std::string>& cells) {
    if (cells.size() != kColumns) return std::nullopt;
    for (const auto& c : cells) {
        if (text::trim(c).empty()) return std::nullopt;
    }
    const auto block = text::parse_int(cells[0]);
    const auto time = text::parse_int(cells[1]);
    const auto value = text::parse_double(cells[5]);
    if (!block || !time || !value || !std::isfinite(*value)) return std::nullopt;
    return TransactionRecord{*block,
                             *time,
                             std::string(text::trim(cells[2])),
                             std::string(text::trim(cells[3])),
                             std::string(text::trim(cells[4])),
                             *value,
                             std::string(text::trim(cells[6])),
                             std::string(text::trim(cells[7]))};
}

std::string hex_string(std::mt19937_64& rng, std::size_t n_hex) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string s = "0x";
    while (s.size() < n_hex + 2) {
        std::uint64_t word = rng();
        for (int i = 0; i < 16 && s.size() < n_hex + 2; ++i, word >>= 4) s += kDigits[word & 0xf];
    }
    return s;
}

std::string address(std::uint64_t pool, std::uint64_t slot) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "0x%016llx%016llx",
                  static_cast<unsigned long long>(derive_seed(pool, {slot, 1})),
                  static_cast<unsigned long long>(derive_seed(pool, {slot, 2})));
    return buf;
}

// Keeps a row-aligned label vector in chronological order.
void sort_chronologically(SynthDataset& ds) {
    std::vector<std::size_t> order(ds.records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = ds.records[a];
        const auto& rb = ds.records[b];
        return std::tie(ra.block_number, ra.time_stamp) < std::tie(rb.block_number, rb.time_stamp);
    });
    SynthDataset sorted;
    sorted.records.reserve(order.size());
    sorted.labels.reserve(order.size());
    for (std::size_t i : order) {
        sorted.records.push_back(std::move(ds.records[i]));
        sorted.labels.push_back(ds.labels[i]);
    }
    ds = std::move(sorted);
}

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

LoadResult load_transactions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transaction file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty transaction file: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line != kTransactionHeader) {
        throw FormatError("unexpected header '" + line + "', expected '" + kTransactionHeader + "'");
    }

    LoadResult result;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        if (auto rec = parse_row(text::split_csv_line(line))) {
            result.records.push_back(std::move(*rec));
        } else {
            ++result.dropped;
        }
    }
    return result;
}

void write_transactions(const std::filesystem::path& path,
                        const std::vector<TransactionRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write transaction file: " + path.string());
    out << kTransactionHeader << '\n';
    for (const auto& r : records) {
        out << r.block_number << ',' << r.time_stamp << ',' << text::csv_escape(r.hash) << ','
            << text::csv_escape(r.from_addr) << ',' << text::csv_escape(r.to_addr) << ','
            << text::format_double(r.value) << ',' << text::csv_escape(r.token_name) << ','
            << text::csv_escape(r.token_symbol) << '\n';
    }
    if (!out) throw IoError("failed writing transaction file: " + path.string());
}

LabelEncoding label_encode(const std::vector<std::string>& column) {
    LabelEncoding enc;
    enc.codes.reserve(column.size());
    std::unordered_map<std::string, std::int64_t> seen;
    for (const auto& s : column) {
        auto [it, inserted] = seen.try_emplace(s, static_cast<std::int64_t>(enc.classes.size()));
        if (inserted) enc.classes.push_back(s);
        enc.codes.push_back(it->second);
    }
    return enc;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FeatureMatrix robust_scale(const FeatureMatrix& matrix) {
    const std::size_t n = matrix.n_samples();
    if (n < 2) throw ArgumentError("robust scaling needs at least 2 samples");
    FeatureMatrix out = matrix;
    std::vector<double> col(n);
    for (std::size_t c = 0; c < matrix.n_dims(); ++c) {
        for (std::size_t r = 0; r < n; ++r) col[r] = matrix.values(r, c);
        std::sort(col.begin(), col.end());
        const double median = sorted_quantile(col, 0.5);
        double iqr = sorted_quantile(col, 0.75) - sorted_quantile(col, 0.25);
        if (iqr == 0.0) iqr = 1.0;
        for (std::size_t r = 0; r < n; ++r) out.values(r, c) = (matrix.values(r, c) - median) / iqr;
    }
    return out;
}

SynthDataset synth_transactions(std::size_t n_samples, std::size_t n_clusters, double spread,
                                std::uint64_t seed) {
    if (n_clusters < 1) throw ArgumentError("n_clusters must be >= 1");
    if (!(spread >= 0.0) || !std::isfinite(spread)) throw ArgumentError("spread must be finite and >= 0");

    constexpr double kBlockSpacing = 50'000.0;
    constexpr double kValueSpacing = 250.0;
    constexpr std::size_t kPool = 4;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pool_slot(0, kPool - 1);
    std::uniform_int_distribution<std::size_t> cluster_pick(0, n_clusters - 1);
    std::uniform_int_distribution<int> jitter(0, 11);

    SynthDataset ds;
    ds.records.reserve(n_samples);
    ds.labels.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        // round-robin keeps blob sizes balanced, except for the shuffled remainder
        const std::size_t c = i < n_samples - n_samples % n_clusters ? i % n_clusters : cluster_pick(rng);
        const double cd = static_cast<double>(c);

        TransactionRecord r;
        const double block = kFirstBlock + kBlockSpacing * (cd + spread * gauss(rng));
        r.block_number = static_cast<std::int64_t>(std::llround(block));
        r.time_stamp = kGenesisTime +
                       static_cast<std::int64_t>(kBlockSeconds * static_cast<double>(r.block_number - kFirstBlock)) +
                       jitter(rng);
        r.hash = hex_string(rng, 64);
        r.from_addr = address(seed ^ 0xf00d, c * kPool + pool_slot(rng));
        r.to_addr = address(seed ^ 0xbeef, c * kPool + pool_slot(rng));
        r.value = round_to(kValueSpacing * (cd + 1.0 + spread * gauss(rng)), 1e-6);
        r.token_name = "Token " + std::to_string(c);
        r.token_symbol = "TK" + std::to_string(c);
        ds.records.push_back(std::move(r));
        ds.labels.push_back(static_cast<int>(c));
    }
    sort_chronologically(ds);
    return ds;
}

SynthDataset synth_rings(std::size_t n_samples, std::size_t n_rings, double spread,
                         std::uint64_t seed) {
    if (n_rings < 1) throw ArgumentError("n_rings must be >= 1");
    if (!(spread >= 0.0) || !std::isfinite(spread)) throw ArgumentError("spread must be finite and >= 0");

    constexpr double kBlockUnit = 20'000.0;
    constexpr double kValueUnit = 100.0;
    constexpr std::size_t kPool = 6;
    constexpr std::size_t kTokens = 3;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<std::size_t> pool_slot(0, kPool - 1);
    std::uniform_int_distribution<std::size_t> token_pick(0, kTokens - 1);
    std::uniform_int_distribution<int> jitter(0, 11);

    SynthDataset ds;
    ds.records.reserve(n_samples);
    ds.labels.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const std::size_t ring = i % n_rings;
        const double radius = static_cast<double>(ring + 1) + spread * gauss(rng);
        const double phi = phase(rng);

        TransactionRecord r;
        const double block = kFirstBlock + 10.0 * kBlockUnit + kBlockUnit * radius * std::cos(phi);
        r.block_number = static_cast<std::int64_t>(std::llround(block));
        r.time_stamp = kGenesisTime +
                       static_cast<std::int64_t>(kBlockSeconds * static_cast<double>(r.block_number - kFirstBlock)) +
                       jitter(rng);
        r.hash = hex_string(rng, 64);
        r.from_addr = address(seed ^ 0xf00d, pool_slot(rng));
        r.to_addr = address(seed ^ 0xbeef, pool_slot(rng));
        r.value = round_to(10.0 * kValueUnit + kValueUnit * radius * std::sin(phi), 1e-6);
        const std::size_t token = token_pick(rng);
        r.token_name = "Token " + std::to_string(token);
        r.token_symbol = "TK" + std::to_string(token);
        ds.records.push_back(std::move(r));
        ds.labels.push_back(static_cast<int>(ring));
    }
    sort_chronologically(ds);
    return ds;
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {"BlockNumber", "TimeStamp", "From",       "To",
                                                   "Value",       "TokenName", "TokenSymbol"};
    return names;
}

FeatureMatrix preprocess(const std::vector<TransactionRecord>& records) {
    if (records.size() < 2) throw ArgumentError("preprocessing needs at least 2 records");

    const std::size_t n = records.size();
    auto encode = [&](auto field) {
        std::vector<std::string> column;
        column.reserve(n);
        for (const auto& r : records) column.push_back(r.*field);
        return label_encode(column).codes;
    };
    const auto from = encode(&TransactionRecord::from_addr);
    const auto to = encode(&TransactionRecord::to_addr);
    const auto token_name = encode(&TransactionRecord::token_name);
    const auto token_symbol = encode(&TransactionRecord::token_symbol);

    FeatureMatrix raw{Matrix(n, feature_names().size()), feature_names()};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[i];
        auto row = raw.values.row(i);
        row[0] = static_cast<double>(r.block_number);
        row[1] = static_cast<double>(r.time_stamp);
        row[2] = static_cast<double>(from[i]);
        row[3] = static_cast<double>(to[i]);
        row[4] = r.value;
        row[5] = static_cast<double>(token_name[i]);
        row[6] = static_cast<double>(token_symbol[i]);
    }
    FeatureMatrix scaled = robust_scale(raw);
    scaled.validate();
    return scaled;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ArgumentError("labelings differ in length");
    const double n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        ra[a[i]] += 1.0;
        rb[b[i]] += 1.0;
    }
    auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, m] : joint) sum_joint += pairs(m);
    for (const auto& [key, m] : ra) sum_a += pairs(m);
    for (const auto& [key, m] : rb) sum_b += pairs(m);
    const double expected = sum_a * sum_b / pairs(n);
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace qclust::pipeline
