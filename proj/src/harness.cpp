#include "qclust/harness.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "qclust/cluster.hpp"
#include "qclust/errors.hpp"
#include "qclust/pipeline.hpp"
#include "qclust/qfm.hpp"
#include "qclust/seeding.hpp"
#include "qclust/swav.hpp"
#include "qclust/vqc.hpp"

namespace qclust::harness {

namespace {

// Seed-derivation tags, one per kind of random stream.
constexpr std::uint64_t kClassicalTag = 11;
constexpr std::uint64_t kClusterTag = 12;
constexpr std::uint64_t kCircuitTag = 13;
constexpr std::uint64_t kHeadTag = 14;
constexpr std::uint64_t kTrainTag = 15;

std::size_t worker_count(const ExperimentConfig& config, std::size_t tasks) {
    std::size_t w = config.workers;
    if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(w, tasks));
}

// Runs fn(i) for i in [0, n) on `workers` threads; the first exception is rethrown.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

cluster::KMeansOptions kmeans_options(const ExperimentConfig& config, std::uint64_t seed) {
    cluster::KMeansOptions opt = config.kmeans;
    opt.seed = seed;
    return opt;
}

// The clustering seed depends on K only, so Monte Carlo seeds vary the
// circuit and nothing else.
std::uint64_t cluster_seed(const ExperimentConfig& config, std::size_t k) {
    return derive_seed(config.master_seed, {kClusterTag, k});
}

MetricsRow scored_row(const FeatureMatrix& features, std::size_t k, const cluster::KMeansOptions& opt) {
    const auto result = cluster::kmeans(features.values, k, opt);
    const auto s = cluster::score(features.values, result.labels);
    MetricsRow row;
    row.k = static_cast<int>(k);
    row.silhouette = s.silhouette;
    row.davies_bouldin = s.davies_bouldin;
    row.calinski_harabasz = s.calinski_harabasz;
    row.degenerate = s.degenerate;
    return row;
}

qfm::MapperConfig mapper_for(const ExperimentConfig& config, const FeatureMatrix& features) {
    qfm::MapperConfig m = config.mapper;
    m.d_in = features.n_dims();
    m.validate();
    return m;
}

int method_rank(const std::string& m) {
    static const std::vector<std::string> order = {method::kClassical, method::kQuantum, method::kWorst,
                                                   method::kAverage,   method::kBest,    method::kQnn,
                                                   method::kQnnBest};
    const auto it = std::find(order.begin(), order.end(), m);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

}  // namespace

Dataset load_dataset(const ExperimentConfig& config) {
    Dataset ds;
    if (config.uses_synth()) {
        const auto& s = config.synth;
        auto synth = s.kind == "rings" ? pipeline::synth_rings(s.samples, s.clusters, s.spread, s.seed)
                                       : pipeline::synth_transactions(s.samples, s.clusters, s.spread, s.seed);
        ds.features = pipeline::preprocess(synth.records);
        ds.planted_labels = std::move(synth.labels);
    } else {
        auto loaded = pipeline::load_transactions(config.input);
        ds.dropped = loaded.dropped;
        ds.features = pipeline::preprocess(loaded.records);
    }
    return ds;
}

std::vector<MetricsRow> run_classical(const ExperimentConfig& config, const FeatureMatrix& features) {
    config.validate();
    const std::size_t n_k = config.k_range.size();
    const std::size_t n_tasks = n_k * config.seeds;
    std::vector<MetricsRow> rows(n_tasks);
    parallel_for(n_tasks, worker_count(config, n_tasks), [&](std::size_t t) {
        const std::size_t k = config.k_range[t % n_k];
        const std::size_t seed = t / n_k;
        MetricsRow row =
            scored_row(features, k, kmeans_options(config, derive_seed(config.master_seed, {kClassicalTag, k, seed})));
        row.method = method::kClassical;
        row.seed = static_cast<int>(seed);
        rows[t] = std::move(row);
    });
    sort_rows(rows);
    return rows;
}

std::vector<MetricsRow> aggregate_runs(const std::vector<MetricsRow>& seed_rows) {
    if (seed_rows.empty()) throw ArgumentError("cannot aggregate zero runs");
    const MetricsRow* worst = &seed_rows.front();
    const MetricsRow* best = &seed_rows.front();
    MetricsRow avg = seed_rows.front();
    avg.silhouette = avg.davies_bouldin = avg.calinski_harabasz = 0.0;
    avg.degenerate = false;
    for (const auto& r : seed_rows) {
        if (r.silhouette < worst->silhouette) worst = &r;
        if (r.silhouette > best->silhouette) best = &r;
        avg.silhouette += r.silhouette;
        avg.davies_bouldin += r.davies_bouldin;
        avg.calinski_harabasz += r.calinski_harabasz;
        avg.degenerate = avg.degenerate || r.degenerate;
    }
    const double n = static_cast<double>(seed_rows.size());
    avg.silhouette /= n;
    avg.davies_bouldin /= n;
    avg.calinski_harabasz /= n;
    avg.degenerate = avg.degenerate || cluster::collapsed_regime(avg.davies_bouldin, avg.calinski_harabasz);
    avg.seed = kNotApplicable;
    avg.method = method::kAverage;

    MetricsRow w = *worst;
    w.method = method::kWorst;
    MetricsRow b = *best;
    b.method = method::kBest;
    return {w, avg, b};
}

std::vector<MetricsRow> run_hybrid(const ExperimentConfig& config, const FeatureMatrix& features) {
    config.validate();
    const auto mapper = mapper_for(config, features);
    const std::size_t n_qubits = qfm::required_qubits(mapper);
    const std::size_t n_depth = config.depth_range.size();
    const std::size_t n_tasks = n_depth * config.seeds;

    std::vector<std::vector<MetricsRow>> per_task(n_tasks);
    parallel_for(n_tasks, worker_count(config, n_tasks), [&](std::size_t t) {
        const std::size_t depth = config.depth_range[t % n_depth];
        const std::size_t seed = t / n_depth;
        const auto params =
            vqc::init_params(n_qubits, depth, derive_seed(config.master_seed, {kCircuitTag, depth, seed}));
        const auto quantum = qfm::nn_forward(qfm::map_circuit(params, mapper), features);
        const auto hybrid = qfm::hybrid_concat(features, quantum);
        for (std::size_t k : config.k_range) {
            MetricsRow row = scored_row(hybrid, k, kmeans_options(config, cluster_seed(config, k)));
            row.method = method::kQuantum;
            row.depth = static_cast<int>(depth);
            row.seed = static_cast<int>(seed);
            per_task[t].push_back(std::move(row));
        }
    });

    std::vector<MetricsRow> rows;
    for (auto& task_rows : per_task) {
        for (auto& r : task_rows) rows.push_back(std::move(r));
    }
    sort_rows(rows);

    std::map<std::pair<int, int>, std::vector<MetricsRow>> groups;
    for (const auto& r : rows) groups[{r.k, r.depth}].push_back(r);
    for (const auto& [key, group] : groups) {
        for (auto& agg : aggregate_runs(group)) rows.push_back(std::move(agg));
    }
    sort_rows(rows);
    return rows;
}

QnnOutput run_qnn(const ExperimentConfig& config, const FeatureMatrix& features) {
    config.validate();
    const auto mapper = mapper_for(config, features);
    const std::size_t n_depth = config.depth_range.size();
    const std::size_t n_proto = config.prototype_range.size();
    const std::size_t n_tasks = n_proto * n_depth * config.seeds;

    struct TaskOutput {
        std::vector<MetricsRow> rows;
        std::vector<TrainingLogRow> log;
        std::string diagnostic;
    };
    std::vector<TaskOutput> per_task(n_tasks);

    parallel_for(n_tasks, worker_count(config, n_tasks), [&](std::size_t t) {
        const std::size_t protos = config.prototype_range[t % n_proto];
        const std::size_t depth = config.depth_range[(t / n_proto) % n_depth];
        const std::size_t seed = t / (n_proto * n_depth);

        const auto head = swav::make_head(protos, mapper.d_out,
                                          derive_seed(config.master_seed, {kHeadTag, protos, depth, seed}),
                                          config.temperature, config.smoothing);
        swav::TrainConfig tc = config.train;
        tc.seed = derive_seed(config.master_seed, {kTrainTag, protos, depth, seed});
        const auto trained = swav::train(features, depth, head, mapper, tc);

        TaskOutput& out = per_task[t];
        out.diagnostic = trained.diagnostic;
        for (const auto& l : trained.log) {
            out.log.push_back({static_cast<int>(protos), static_cast<int>(depth), static_cast<int>(seed),
                               static_cast<int>(l.epoch), static_cast<int>(l.batch), l.loss});
        }
        const std::size_t first_epoch = config.train.epochs == 0 ? 0 : 1;
        for (std::size_t e = first_epoch; e < trained.epoch_features.size(); ++e) {
            const auto hybrid = qfm::hybrid_concat(features, trained.epoch_features[e]);
            const bool aborted = std::find(trained.aborted_epochs.begin(), trained.aborted_epochs.end(), e) !=
                                 trained.aborted_epochs.end();
            for (std::size_t k : config.k_range) {
                MetricsRow row = scored_row(hybrid, k, kmeans_options(config, cluster_seed(config, k)));
                row.method = method::kQnn;
                row.depth = static_cast<int>(depth);
                row.prototypes = static_cast<int>(protos);
                row.epoch = static_cast<int>(e);
                row.seed = static_cast<int>(seed);
                row.degenerate = row.degenerate || aborted;
                out.rows.push_back(std::move(row));
            }
        }
    });

    QnnOutput result;
    for (auto& task : per_task) {
        for (auto& r : task.rows) result.rows.push_back(std::move(r));
        for (auto& l : task.log) result.log.push_back(l);
        if (!task.diagnostic.empty()) result.diagnostics.push_back(std::move(task.diagnostic));
    }
    sort_rows(result.rows);

    std::map<std::tuple<int, int, int>, const MetricsRow*> best;
    for (const auto& r : result.rows) {
        auto& slot = best[{r.k, r.prototypes, r.depth}];
        if (!slot || r.silhouette > slot->silhouette) slot = &r;
    }
    std::vector<MetricsRow> best_rows;
    for (const auto& [key, row] : best) {
        MetricsRow b = *row;
        b.method = method::kQnnBest;
        best_rows.push_back(std::move(b));
    }
    for (auto& b : best_rows) result.rows.push_back(std::move(b));
    sort_rows(result.rows);
    std::sort(result.log.begin(), result.log.end(), [](const TrainingLogRow& a, const TrainingLogRow& b) {
        return std::tie(a.prototypes, a.depth, a.seed, a.epoch, a.batch) <
               std::tie(b.prototypes, b.depth, b.seed, b.epoch, b.batch);
    });
    return result;
}

std::vector<MetricsRow> run_classical(const ExperimentConfig& config) {
    return run_classical(config, load_dataset(config).features);
}

std::vector<MetricsRow> run_hybrid(const ExperimentConfig& config) {
    return run_hybrid(config, load_dataset(config).features);
}

QnnOutput run_qnn(const ExperimentConfig& config) { return run_qnn(config, load_dataset(config).features); }

SweepResult run_experiment(const ExperimentConfig& config, const FeatureMatrix& features) {
    config.validate();
    SweepResult out;
    if (config.has(Approach::Classical)) {
        auto rows = run_classical(config, features);
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
    if (config.has(Approach::Hybrid)) {
        auto rows = run_hybrid(config, features);
        out.rows.insert(out.rows.end(), rows.begin(), rows.end());
    }
    if (config.has(Approach::Qnn)) {
        auto q = run_qnn(config, features);
        out.rows.insert(out.rows.end(), q.rows.begin(), q.rows.end());
        out.log = std::move(q.log);
        out.diagnostics = std::move(q.diagnostics);
    }
    sort_rows(out.rows);
    return out;
}

void sort_rows(std::vector<MetricsRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
        const int ra = method_rank(a.method);
        const int rb = method_rank(b.method);
        return std::tie(ra, a.method, a.k, a.depth, a.prototypes, a.seed, a.epoch) <
               std::tie(rb, b.method, b.k, b.depth, b.prototypes, b.seed, b.epoch);
    });
}

}  // namespace qclust::harness
