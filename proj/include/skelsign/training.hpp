#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skelsign/data.hpp"
#include "skelsign/models.hpp"

namespace skelsign {

enum class OptimizerKind { sgd, adam };

const char* to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer(std::string_view text);

struct HyperParams {
    std::size_t epochs = 30;
    std::size_t batch_size = 8;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double weight_decay = 0.0;  // L2 penalty folded into the gradients
    double contrastive_tau = 0.5;     // temperature
    double contrastive_weight = 0.0;  // 0 disables the contrastive term
    std::uint64_t seed = 1;
};

// Curves plus final test metrics. wall_seconds is measured but never
// serialized, so report files stay byte-reproducible for a fixed seed.
struct TrainReport {
    std::uint64_t seed = 0;
    std::string model;
    std::string scheme;
    std::string optimizer;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double learning_rate = 0.0;
    std::size_t train_count = 0, val_count = 0, test_count = 0;
    std::vector<double> train_loss, train_accuracy;
    std::vector<double> val_loss, val_accuracy;
    double test_accuracy = 0.0;
    double test_val_accuracy = 0.0;  // correct over test + validation
    std::array<std::array<std::size_t, 2>, 2> confusion{};  // [actual][predicted]
    std::vector<std::string> misclassified;
    double wall_seconds = 0.0;

    void write(std::ostream& os) const;
    void write_file(const std::filesystem::path& path) const;
    static TrainReport read(std::istream& is);
    static TrainReport read_file(const std::filesystem::path& path);
};

// Per-parameter optimizer state (adam moments); one step per mini-batch.
class Optimizer {
public:
    Optimizer(const Model& model, const HyperParams& hp);
    void step(Model& model);

private:
    HyperParams hp_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct Evaluation {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    std::vector<std::string> misclassified;
};

// argmax over logits, ties toward class 0
Evaluation evaluate(const Model& model, const std::vector<PaddedSample>& samples);

TrainReport train_supervised(Model& model, const DatasetSplits& splits,
                             const HyperParams& hp);

// Reconstruction pretext training (labels only consulted by the contrastive
// term when contrastive_weight > 0). Loss curve only.
TrainReport train_reconstruction(Model& autoencoder, const std::vector<PaddedSample>& samples,
                                 const HyperParams& hp);

// Label-selected contrastive loss over a batch of latent vectors: anchors
// attract same-label samples and repel the rest, cosine similarity with
// temperature tau. Throws std::invalid_argument when no positive pair exists.
double contrastive_loss(const std::vector<std::vector<double>>& latents,
                        const std::vector<int>& labels, double tau);
// Same value; also accumulates d(loss)/d(latent) into dlatents (resized and
// zeroed here).
double contrastive_loss_grad(const std::vector<std::vector<double>>& latents,
                             const std::vector<int>& labels, double tau,
                             std::vector<std::vector<double>>& dlatents);

struct SslResult {
    TrainReport pretext;
    TrainReport downstream;
    Model classifier;
};

// Full pipeline: ssl split, reconstruction pretraining on the unsupervised
// set, encoder transfer, supervised fine-tuning on the small labelled splits,
// evaluation on the unsupervised set reused as test.
SslResult run_ssl_pipeline(const std::vector<PaddedSample>& samples,
                           const ModelSpec& autoencoder_spec, const HyperParams& hp_unsup,
                           const HyperParams& hp_sup, std::uint64_t seed);

}  // namespace skelsign
