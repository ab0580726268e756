#pragma once

// SwAV-style self-supervised training of the quantum feature map.
//
// For a batch, view 2 picks a hard prototype per row (no gradient), which is
// label-smoothed into the target P2. View 1 gives logits z_i = <y, c_i> from
// the quantum features y and prototypes c_i, and P1 = softmax(z / tau). The
// loss is the batch mean of KL(P2 || P1) by default; KL(P1 || P2) is
// available through KlDirection::ModelFirst. Angles and prototypes are
// updated together by Adam after global-norm gradient clipping.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qclust/matrix.hpp"
#include "qclust/qfm.hpp"
#include "qclust/vqc.hpp"

namespace qclust::swav {

enum class KlDirection { TargetFirst, ModelFirst };

KlDirection parse_kl_direction(const std::string& name);
std::string to_string(KlDirection direction);

struct SwAVHead {
    Matrix prototypes;  // n_prototypes x feature dim, unit rows
    double temperature = 0.07;
    double smoothing = 0.1;

    std::size_t n_prototypes() const { return prototypes.rows(); }
    std::size_t dim() const { return prototypes.cols(); }
    void normalize_rows();
};

/// Gaussian prototypes normalized to unit rows.
SwAVHead make_head(std::size_t n_prototypes, std::size_t dim, std::uint64_t seed,
                   double temperature = 0.07, double smoothing = 0.1);

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double clip_norm = 1.0;
    double augment_sigma = 0.1;
    std::uint64_t seed = 0;
    KlDirection kl_direction = KlDirection::TargetFirst;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

/// Label-smoothed one-hot: (1 - eps) * [i == k] + eps / n_prototypes.
/// The peak entry (or, failing that, the last entry) absorbs rounding so that
/// summing the vector front to back gives exactly 1.0.
std::vector<double> swav_targets(std::size_t k, std::size_t n_prototypes, double smoothing);

/// Index of the largest inner product; ties go to the lowest index.
std::size_t assign_prototype(std::span<const double> feature, const SwAVHead& head);

std::vector<double> log_softmax(std::span<const double> logits, double temperature);

/// KL divergence between the target and softmax(logits / tau), in log space,
/// with 0 log 0 = 0. ArgumentError on non-finite logits.
double swav_loss(std::span<const double> logits, std::span<const double> target, double temperature,
                 KlDirection direction = KlDirection::TargetFirst);

/// d swav_loss / d logits.
std::vector<double> swav_loss_logit_gradient(std::span<const double> logits, std::span<const double> target,
                                             double temperature, KlDirection direction);

struct Gradients {
    double loss = 0.0;
    std::vector<double> theta;  // flat, matches AnsatzParams::angles
    Matrix prototypes;

    double global_norm() const;
};

/// Quantum features (tanh network outputs) for every row of `features`.
FeatureMatrix quantum_features(const vqc::AnsatzParams& params, const qfm::MapperConfig& mapper,
                               const FeatureMatrix& features);

/// Hard assignments of view-2 rows under the current parameters.
std::vector<std::size_t> assign_batch(const vqc::AnsatzParams& params, const SwAVHead& head,
                                      const qfm::MapperConfig& mapper, const FeatureMatrix& view2);

/// Batch-mean loss of view 1 against fixed assignments.
double batch_loss(const vqc::AnsatzParams& params, const SwAVHead& head, const qfm::MapperConfig& mapper,
                  const FeatureMatrix& view1, const std::vector<std::size_t>& assignments,
                  KlDirection direction = KlDirection::TargetFirst);

/// Exact gradients of batch_loss with respect to the angles and prototypes.
Gradients loss_gradients(const vqc::AnsatzParams& params, const SwAVHead& head,
                         const qfm::MapperConfig& mapper, const FeatureMatrix& view1,
                         const std::vector<std::size_t>& assignments,
                         KlDirection direction = KlDirection::TargetFirst);

/// Assigns prototypes from view 2 (stop-gradient) and differentiates view 1.
Gradients loss_gradients(const vqc::AnsatzParams& params, const SwAVHead& head,
                         const qfm::MapperConfig& mapper, const FeatureMatrix& view1,
                         const FeatureMatrix& view2, const TrainConfig& config);

/// Rescales the gradients in place so their joint L2 norm is at most
/// `clip_norm`. Returns the norm before clipping.
double clip_global_norm(Gradients& grads, double clip_norm);

class Adam {
public:
    Adam(std::size_t n_params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double eps = 1e-8);

    void step(std::span<double> params, std::span<const double> grads);
    std::size_t steps() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<double> m_, v_;
};

struct LossRecord {
    std::size_t epoch = 0;  // 1-based
    std::size_t batch = 0;  // 0-based
    double loss = 0.0;
};

struct TrainResult {
    vqc::AnsatzParams params;
    SwAVHead head;
    /// Eval-mode quantum features: index 0 before training, index e after epoch e.
    std::vector<FeatureMatrix> epoch_features;
    std::vector<LossRecord> log;
    std::vector<double> epoch_mean_loss;  // per trained epoch
    std::vector<std::size_t> aborted_epochs;
    std::string diagnostic;

    bool aborted() const { return !aborted_epochs.empty(); }
};

/// Trains from the given initial angles. `features` must be d_in wide.
TrainResult train(const FeatureMatrix& features, const vqc::AnsatzParams& initial, const SwAVHead& head_init,
                  const qfm::MapperConfig& mapper, const TrainConfig& config);

/// Initializes angles for `depth` layers on required_qubits(mapper) qubits
/// from the training seed, then trains.
TrainResult train(const FeatureMatrix& features, std::size_t depth, const SwAVHead& head_init,
                  const qfm::MapperConfig& mapper, const TrainConfig& config);

}  // namespace qclust::swav
