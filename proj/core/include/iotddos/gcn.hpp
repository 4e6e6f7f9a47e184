#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "iotddos/rng.hpp"
#include "iotddos/topology.hpp"

namespace iotddos {

// Two-layer GCN for node-level binary classification:
//   H1 = ReLU(A_hat X W0 + b0), dropout(H1) in training,
//   scores = sigmoid(A_hat H1 W1 + b1).
struct GcnModel {
    Eigen::MatrixXd w0;     // F_in x H
    Eigen::RowVectorXd b0;  // H
    Eigen::VectorXd w1;     // H
    double b1 = 0;
    double dropout_rate = 0.4;

    int input_dim() const { return static_cast<int>(w0.rows()); }
    int hidden_dim() const { return static_cast<int>(w0.cols()); }
    bool finite() const;
};

// Uniform(+-sqrt(6/(fan_in+fan_out))) weights, zero biases.
GcnModel init_model(int f_in, int hidden, double dropout_rate, Rng& rng);

struct ForwardCache {
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd x;
    Eigen::MatrixXd ax;       // A_hat X
    Eigen::MatrixXd z0;       // ax W0 + b0
    Eigen::MatrixXd h1;       // dropout(ReLU(z0)) in train mode
    Eigen::MatrixXd ah1;      // A_hat h1
    Eigen::VectorXd scores;
    Eigen::MatrixXd dropout_mask;  // already scaled by 1/(1-rate); ones in eval
    bool train_mode = false;
};

struct ForwardResult {
    Eigen::VectorXd scores;
    ForwardCache cache;
};

ForwardResult forward(const GcnModel& model, const Eigen::MatrixXd& a_hat,
                      const Eigen::MatrixXd& x, bool train_mode, Rng& rng);

// Class weights w_c = T / (2 T_c) over the masked training labels.
struct LossConfig {
    double w_neg = 1;
    double w_pos = 1;
};

LossConfig balanced_class_weights(double num_neg, double num_pos);

struct LossResult {
    double loss = 0;
    Eigen::VectorXd dscores;  // zero outside the mask
};

// Mean over masked entries of -[w_pos y log s + w_neg (1-y) log(1-s)],
// log arguments clamped at 1e-12.
LossResult weighted_bce_loss(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                             const std::vector<bool>& mask, const LossConfig& cfg);

struct Gradients {
    Eigen::MatrixXd dw0;
    Eigen::RowVectorXd db0;
    Eigen::VectorXd dw1;
    double db1 = 0;

    Gradients() = default;
    explicit Gradients(const GcnModel& model);
    Gradients& operator+=(const Gradients& other);
    Gradients& operator*=(double s);
    bool finite() const;
};

Gradients backward(const GcnModel& model, const ForwardCache& cache,
                   const Eigen::VectorXd& dscores);

struct AdamState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    long step = 0;
    Gradients m;  // first moments
    Gradients v;  // second moments

    explicit AdamState(const GcnModel& model, double lr = 1e-3);
    AdamState() = default;
};

void adam_step(GcnModel& model, const Gradients& grads, AdamState& state);

// Versioned binary checkpoint: model, optimizer state, standardizer.
void save_checkpoint(const std::string& path, const GcnModel& model,
                     const AdamState& state, const Standardizer& standardizer);
void load_checkpoint(const std::string& path, GcnModel& model, AdamState& state,
                     Standardizer& standardizer);

}  // namespace iotddos
