#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mvkit/motion.hpp"

namespace mvkit {

// Desk-scale defaults run the full test suite in minutes; full() switches to
// the large preset.
struct VaeConfig {
    int window = 90;          // frames per training window
    int input_dim = 144;      // 24 joints x 6-DoF encoding
    int latent_dim = 32;
    int encoder_hidden = 64;  // per direction
    int decoder_hidden = 64;
    int mlp_hidden1 = 128;
    int mlp_hidden2 = 64;
    double kl_weight = 1e-3;
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 8;
    uint64_t rng_seed = 0;

    static VaeConfig full();  // latent 512, MLP 1024/512, hidden 512

    void validate() const;
};

struct LatentCode {
    Eigen::VectorXd mu;
    Eigen::VectorXd log_sigma;
    Eigen::VectorXd z;  // empty until reparameterize
};

struct TensorInfo {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::ptrdiff_t offset = 0;
};

// Sequence VAE: bidirectional gated-recurrent encoder with temporal mean
// pooling and a two-layer tanh perceptron feeding mu / log-sigma heads; an
// autoregressive forward gated-recurrent decoder consuming [previous pose;
// z] from a learned initial pose token, with a two-layer output perceptron.
// All parameters live in one flat vector so optimization, clipping,
// serialization and finite-difference checks see a single contiguous array.
class VaeModel {
public:
    // Uniform +-1/sqrt(fan_in) weights, zero biases, deterministic per seed.
    static VaeModel init(const VaeConfig& config, uint64_t seed);

    const VaeConfig& config() const { return config_; }
    const std::vector<TensorInfo>& layout() const { return layout_; }

    Eigen::VectorXd& params() { return params_; }
    const Eigen::VectorXd& params() const { return params_; }

    Eigen::Map<Eigen::MatrixXd> tensor(std::string_view name);
    Eigen::Map<const Eigen::MatrixXd> tensor(std::string_view name) const;

    int64_t training_steps = 0;

private:
    friend VaeModel load_model(const std::string&);
    VaeModel() = default;

    VaeConfig config_;
    std::vector<TensorInfo> layout_;
    Eigen::VectorXd params_;
};

struct VaeLossParts {
    double total = 0.0;
    double recon_term = 0.0;
    double kl_term = 0.0;
};

struct EpochLoss {
    double total = 0.0;
    double recon_term = 0.0;
    double kl_term = 0.0;
};

struct TrainResult {
    std::vector<EpochLoss> history;  // one entry per epoch, dataset mean
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::string worst_tensor;
    int worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    int parameter_count = 0;

    bool passed(double tolerance = 1e-4) const { return max_rel_error < tolerance; }
};

// Deterministic (mu, log_sigma) for a W x input_dim window; z left empty.
LatentCode encode(const VaeModel& model, const Eigen::MatrixXd& window);

// z = mu + exp(log_sigma) .* eps with seeded standard-normal eps.
Eigen::VectorXd reparameterize(const LatentCode& code, uint64_t rng_seed);

// Autoregressive rollout of `window` steps conditioned on z.
Eigen::MatrixXd decode(const VaeModel& model, const Eigen::VectorXd& z, int window);

// recon_term: mean squared error over all entries. kl_term: Gaussian KL to
// the unit prior averaged over latent dimensions. total = recon_term +
// kl_weight * kl_term (minimized).
VaeLossParts vae_loss(const Eigen::MatrixXd& recon, const Eigen::MatrixXd& target,
                      const LatentCode& code, double kl_weight);

// Minimizes vae_loss with adaptive per-parameter steps (bias-corrected
// first/second moments) and global gradient-norm clipping at 1.0. Bitwise
// deterministic per config seed; latent noise is resampled every epoch,
// while the recorded history evaluates the post-epoch parameters at z = mu,
// so a zero learning rate yields a constant history. Throws NumericError
// naming the step on divergence.
TrainResult train(VaeModel& model, const std::vector<Eigen::MatrixXd>& dataset);

// Central finite differences (given step) against the analytic gradient over
// every parameter, on the batch-mean loss with fixed latent noise. Relative
// error uses |a - n| / max(|a| + |n|, 1e-5).
GradCheckReport gradient_check(const VaeModel& model,
                               const std::vector<Eigen::MatrixXd>& batch,
                               double fd_step = 1e-5);

// Windows the sequence (stride = width, pad-repeat), encodes each window to
// mu (no sampling), decodes, converts rows back to rotations and stitches.
// Shape coefficients and root translation are carried over from the input.
MotionSequence reconstruct_sequence(const VaeModel& model, const MotionSequence& seq);

// Versioned binary model file: magic "MVKM", textual config manifest,
// shape-prefixed little-endian f64 tensors. Round-trips bitwise.
void save_model(const std::string& path, const VaeModel& model);
VaeModel load_model(const std::string& path);

// Rows are frames; joint j occupies columns [6j, 6j+6) in the 6-DoF
// encoding.
Eigen::MatrixXd sixd_encode_sequence(const MotionSequence& seq);

// Inverse of sixd_encode_sequence; frames get rotations only.
MotionSequence sixd_decode_sequence(const Eigen::MatrixXd& rows, double fps,
                                    const std::string& name);

// Fixed-width training windows (stride = width, pad-repeat) in the 6-DoF
// encoding, in deterministic order.
std::vector<Eigen::MatrixXd> build_training_windows(const std::vector<MotionSequence>& seqs,
                                                    int window);

}  // namespace mvkit
