// qclust: classical, hybrid-quantum and SwAV-trained quantum clustering of
// blockchain transaction tables.
//
//   qclust synth  --out data/ [--kind rings] [--samples 600] ...
//   qclust ingest --csv tx.csv --out data/
//   qclust run    --approach all --config sweep.cfg --out results/
//   qclust report --metrics results/metrics.csv --out results/

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "qclust/config.hpp"
#include "qclust/errors.hpp"
#include "qclust/harness.hpp"
#include "qclust/pipeline.hpp"
#include "qclust/report.hpp"
#include "qclust/text.hpp"

namespace fs = std::filesystem;
using namespace qclust;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

harness::ExperimentConfig resolve_config(const GlobalOptions& g) {
    harness::ExperimentConfig cfg;
    if (!g.config_path.empty()) cfg = harness::load_config(g.config_path);
    if (g.seed) cfg.master_seed = *g.seed;
    if (!g.out.empty()) cfg.output_dir = g.out;
    return cfg;
}

void write_features(const fs::path& path, const FeatureMatrix& fm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t c = 0; c < fm.n_dims(); ++c) out << (c ? "," : "") << fm.dim_names[c];
    out << '\n';
    for (std::size_t r = 0; r < fm.n_samples(); ++r) {
        for (std::size_t c = 0; c < fm.n_dims(); ++c) out << (c ? "," : "") << text::format_double(fm.values(r, c));
        out << '\n';
    }
}

int cmd_synth(const GlobalOptions& g, const harness::SynthSpec& spec) {
    auto cfg = resolve_config(g);
    fs::create_directories(cfg.output_dir);
    const auto ds = spec.kind == "rings"
                        ? pipeline::synth_rings(spec.samples, spec.clusters, spec.spread, spec.seed)
                        : pipeline::synth_transactions(spec.samples, spec.clusters, spec.spread, spec.seed);
    const fs::path tx = cfg.output_dir / "transactions.csv";
    pipeline::write_transactions(tx, ds.records);
    std::ofstream labels(cfg.output_dir / "labels.csv", std::ios::binary);
    labels << "label\n";
    for (int l : ds.labels) labels << l << '\n';
    std::cout << "wrote " << ds.records.size() << " " << spec.kind << " transactions to " << tx.string() << '\n';
    return 0;
}

int cmd_ingest(const GlobalOptions& g, const std::string& csv) {
    auto cfg = resolve_config(g);
    const auto loaded = pipeline::load_transactions(csv);
    const auto features = pipeline::preprocess(loaded.records);
    fs::create_directories(cfg.output_dir);
    const fs::path out = cfg.output_dir / "features.csv";
    write_features(out, features);
    std::cout << "kept " << loaded.records.size() << " rows, dropped " << loaded.dropped << "; wrote "
              << features.n_samples() << "x" << features.n_dims() << " features to " << out.string() << '\n';
    return 0;
}

int cmd_run(const GlobalOptions& g, const std::string& approach, std::optional<std::size_t> workers) {
    auto cfg = resolve_config(g);
    if (!approach.empty()) cfg.approaches = harness::parse_approaches(approach);
    if (workers) cfg.workers = *workers;
    cfg.validate();

    const auto dataset = harness::load_dataset(cfg);
    if (dataset.dropped) std::cerr << "dropped " << dataset.dropped << " incomplete rows\n";
    const auto sweep = harness::run_experiment(cfg, dataset.features);

    const auto files = harness::report(sweep.rows, cfg.output_dir);
    harness::write_training_log(cfg.output_dir / "training_log.csv", sweep.log);
    {
        std::ofstream resolved(cfg.output_dir / "config.resolved", std::ios::binary);
        harness::write_config(resolved, cfg);
    }
    for (const auto& d : sweep.diagnostics) std::cerr << d;
    std::cout << "wrote " << sweep.rows.size() << " rows to " << files.metrics_csv.string() << '\n';
    return 0;
}

int cmd_report(const GlobalOptions& g, const std::string& metrics) {
    auto cfg = resolve_config(g);
    const auto rows = harness::read_metrics_csv(metrics);
    const fs::path out = g.out.empty() ? fs::path(metrics).parent_path() : cfg.output_dir;
    const auto files = harness::report(rows, out.empty() ? fs::path(".") : out);
    std::cout << "wrote report for " << rows.size() << " rows to " << files.summary.parent_path().string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum-feature clustering of blockchain transactions"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "Experiment config file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output directory");

    auto* synth = app.add_subcommand("synth", "Write a synthetic transaction CSV");
    harness::SynthSpec spec;
    synth->add_option("--kind", spec.kind, "blobs or rings")->check(CLI::IsMember({"blobs", "rings"}));
    synth->add_option("--samples", spec.samples, "Number of transactions");
    synth->add_option("--clusters", spec.clusters, "Planted blobs or rings");
    synth->add_option("--spread", spec.spread, "Spread relative to cluster spacing");
    synth->add_option("--synth-seed", spec.seed, "Generator seed");

    auto* ingest = app.add_subcommand("ingest", "Clean and preprocess a transaction CSV");
    std::string csv;
    ingest->add_option("--csv", csv, "Transaction CSV")->required()->check(CLI::ExistingFile);

    auto* run = app.add_subcommand("run", "Run the clustering sweep and write the report");
    std::string approach;
    std::optional<std::size_t> workers;
    run->add_option("--approach", approach, "classical|hybrid|qnn|all (comma lists allowed)");
    run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");

    auto* rep = app.add_subcommand("report", "Regenerate plots and summary from metrics.csv");
    std::string metrics;
    rep->add_option("--metrics", metrics, "metrics.csv from a previous run")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            harness::SynthSpec merged = resolve_config(g).synth;
            if (synth->count("--kind")) merged.kind = spec.kind;
            if (synth->count("--samples")) merged.samples = spec.samples;
            if (synth->count("--clusters")) merged.clusters = spec.clusters;
            if (synth->count("--spread")) merged.spread = spec.spread;
            if (synth->count("--synth-seed")) merged.seed = spec.seed;
            return cmd_synth(g, merged);
        }
        if (*ingest) return cmd_ingest(g, csv);
        if (*run) return cmd_run(g, approach, workers);
        if (*rep) return cmd_report(g, metrics);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
