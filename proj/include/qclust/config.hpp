#pragma once

// Experiment configuration and its flat "key = value" file format.
//
//   # comment
//   input = synth            (or a path to a transaction CSV)
//   k_range = 2..6           (inclusive range, or a list such as 5,10,20)
//   approaches = classical,hybrid,qnn
//
// Unknown keys and malformed values raise ConfigError naming the line.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qclust/cluster.hpp"
#include "qclust/qfm.hpp"
#include "qclust/swav.hpp"

namespace qclust::harness {

enum class Approach { Classical, Hybrid, Qnn };

std::string to_string(Approach a);
/// Accepts classical, hybrid, qnn, or all (expands to the three).
std::vector<Approach> parse_approaches(const std::string& spec);

struct SynthSpec {
    std::string kind = "blobs";  // blobs | rings
    std::size_t samples = 600;
    std::size_t clusters = 3;
    double spread = 0.05;
    std::uint64_t seed = 7;
};

struct ExperimentConfig {
    std::string input = "synth";
    SynthSpec synth;

    std::vector<std::size_t> k_range = {2, 3, 4, 5, 6};
    std::vector<std::size_t> depth_range = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<std::size_t> prototype_range = {5, 10, 20};
    std::size_t seeds = 10;
    std::uint64_t master_seed = 0;
    std::vector<Approach> approaches = {Approach::Classical, Approach::Hybrid, Approach::Qnn};
    std::filesystem::path output_dir = "results";
    std::size_t workers = 0;  // 0: one per hardware thread

    qfm::MapperConfig mapper;  // d_in is taken from the data
    swav::TrainConfig train;
    double temperature = 0.07;
    double smoothing = 0.1;
    cluster::KMeansOptions kmeans;

    bool uses_synth() const { return input == "synth"; }
    bool has(Approach a) const;
    /// ConfigError on empty ranges, zero seeds, k < 2 or zero prototypes.
    void validate() const;
};

/// Parses "a..b", "a,b,c" or a single integer.
std::vector<std::size_t> parse_range(const std::string& spec);

/// Applies one key/value pair; ConfigError on unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Writes every key in a form parse_config reads back.
void write_config(std::ostream& out, const ExperimentConfig& config);

}  // namespace qclust::harness
