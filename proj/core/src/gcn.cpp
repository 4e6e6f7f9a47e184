#include "iotddos/gcn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace iotddos {

bool GcnModel::finite() const {
    return w0.allFinite() && b0.allFinite() && w1.allFinite() && std::isfinite(b1);
}

GcnModel init_model(int f_in, int hidden, double dropout_rate, Rng& rng) {
    if (f_in < 1 || hidden < 1) throw std::invalid_argument("init_model: dimensions must be >= 1");
    if (!(dropout_rate >= 0 && dropout_rate < 1))
        throw std::invalid_argument("init_model: dropout_rate must be in [0, 1)");
    GcnModel m;
    m.dropout_rate = dropout_rate;
    const auto glorot = [&](Eigen::Index rows, Eigen::Index cols) {
        const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.uniform(-bound, bound);
        return w;
    };
    m.w0 = glorot(f_in, hidden);
    m.b0 = Eigen::RowVectorXd::Zero(hidden);
    m.w1 = glorot(hidden, 1);
    m.b1 = 0;
    return m;
}

ForwardResult forward(const GcnModel& model, const Eigen::MatrixXd& a_hat,
                      const Eigen::MatrixXd& x, bool train_mode, Rng& rng) {
    const Eigen::Index n = x.rows();
    if (a_hat.rows() != n || a_hat.cols() != n)
        throw std::invalid_argument("forward: adjacency/feature shape mismatch");
    if (x.cols() != model.w0.rows())
        throw std::invalid_argument("forward: feature dimension mismatch");

    ForwardCache cache;
    cache.train_mode = train_mode;
    cache.a_hat = a_hat;
    cache.x = x;
    cache.ax = a_hat * x;
    cache.z0 = (cache.ax * model.w0).rowwise() + model.b0;

    Eigen::MatrixXd h1 = cache.z0.cwiseMax(0.0);
    if (train_mode && model.dropout_rate > 0) {
        const double keep = 1.0 - model.dropout_rate;
        cache.dropout_mask.resize(h1.rows(), h1.cols());
        for (Eigen::Index i = 0; i < h1.rows(); ++i)
            for (Eigen::Index j = 0; j < h1.cols(); ++j)
                cache.dropout_mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
        h1 = h1.cwiseProduct(cache.dropout_mask);
    } else {
        cache.dropout_mask = Eigen::MatrixXd::Ones(h1.rows(), h1.cols());
    }
    cache.h1 = h1;
    cache.ah1 = a_hat * h1;

    Eigen::VectorXd pre = cache.ah1 * model.w1;
    pre.array() += model.b1;
    cache.scores = (1.0 / (1.0 + (-pre.array()).exp())).matrix();

    ForwardResult out;
    out.scores = cache.scores;
    out.cache = std::move(cache);
    return out;
}

LossConfig balanced_class_weights(double num_neg, double num_pos) {
    if (num_neg <= 0 || num_pos <= 0)
        throw std::invalid_argument("balanced_class_weights: both classes must be present");
    const double total = num_neg + num_pos;
    return LossConfig{total / (2 * num_neg), total / (2 * num_pos)};
}

LossResult weighted_bce_loss(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels,
                             const std::vector<bool>& mask, const LossConfig& cfg) {
    if (scores.size() != labels.size() ||
        static_cast<std::size_t>(scores.size()) != mask.size())
        throw std::invalid_argument("weighted_bce_loss: size mismatch");

    constexpr double kClamp = 1e-12;
    double sum = 0;
    std::size_t count = 0;
    LossResult out;
    out.dscores = Eigen::VectorXd::Zero(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        ++count;
        const double s = scores(i);
        const double y = labels(i);
        sum -= cfg.w_pos * y * std::log(std::max(s, kClamp)) +
               cfg.w_neg * (1 - y) * std::log(std::max(1 - s, kClamp));
        // d/ds of the summand; clamping regions have zero slope but scores
        // from a sigmoid never reach them exactly.
        out.dscores(i) = -cfg.w_pos * y / std::max(s, kClamp) +
                         cfg.w_neg * (1 - y) / std::max(1 - s, kClamp);
    }
    if (count == 0) throw std::invalid_argument("weighted_bce_loss: empty mask");
    out.loss = sum / static_cast<double>(count);
    out.dscores /= static_cast<double>(count);
    return out;
}

Gradients::Gradients(const GcnModel& model)
    : dw0(Eigen::MatrixXd::Zero(model.w0.rows(), model.w0.cols())),
      db0(Eigen::RowVectorXd::Zero(model.b0.cols())),
      dw1(Eigen::VectorXd::Zero(model.w1.size())),
      db1(0) {}

Gradients& Gradients::operator+=(const Gradients& other) {
    dw0 += other.dw0;
    db0 += other.db0;
    dw1 += other.dw1;
    db1 += other.db1;
    return *this;
}

Gradients& Gradients::operator*=(double s) {
    dw0 *= s;
    db0 *= s;
    dw1 *= s;
    db1 *= s;
    return *this;
}

bool Gradients::finite() const {
    return dw0.allFinite() && db0.allFinite() && dw1.allFinite() && std::isfinite(db1);
}

Gradients backward(const GcnModel& model, const ForwardCache& cache,
                   const Eigen::VectorXd& dscores) {
    if (dscores.size() != cache.scores.size())
        throw std::invalid_argument("backward: upstream gradient size mismatch");

    // Through the sigmoid.
    const Eigen::VectorXd dpre =
        dscores.array() * cache.scores.array() * (1 - cache.scores.array());

    Gradients g;
    g.dw1 = cache.ah1.transpose() * dpre;
    g.db1 = dpre.sum();

    // Through the second graph convolution.
    const Eigen::MatrixXd dah1 = dpre * model.w1.transpose();
    const Eigen::MatrixXd dh1 = cache.a_hat.transpose() * dah1;

    // Through dropout and the ReLU gate.
    const Eigen::MatrixXd dz0 =
        dh1.cwiseProduct(cache.dropout_mask)
            .cwiseProduct((cache.z0.array() > 0).cast<double>().matrix());

    g.dw0 = cache.ax.transpose() * dz0;
    g.db0 = dz0.colwise().sum();
    return g;
}

AdamState::AdamState(const GcnModel& model, double lr)
    : learning_rate(lr), m(model), v(model) {}

void adam_step(GcnModel& model, const Gradients& grads, AdamState& state) {
    if (!grads.finite())
        throw std::runtime_error("adam_step: non-finite gradients");
    state.step += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double corr1 = 1 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1 - std::pow(b2, static_cast<double>(state.step));
    const double lr = state.learning_rate;
    const double eps = state.epsilon;

    const auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1 - b1) * g;
        v = (b2 * v).array() + (1 - b2) * g.array().square();
        param.array() -=
            lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + eps);
    };
    update(model.w0, state.m.dw0, state.v.dw0, grads.dw0);
    update(model.b0, state.m.db0, state.v.db0, grads.db0);
    update(model.w1, state.m.dw1, state.v.dw1, grads.dw1);

    state.m.db1 = b1 * state.m.db1 + (1 - b1) * grads.db1;
    state.v.db1 = b2 * state.v.db1 + (1 - b2) * grads.db1 * grads.db1;
    model.b1 -= lr * (state.m.db1 / corr1) / (std::sqrt(state.v.db1 / corr2) + eps);
}

namespace {

constexpr char kMagic[8] = {'I', 'D', 'G', 'C', 'N', 'C', 'K', '1'};

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    const std::int64_t rows = m.rows(), cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    std::int64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in || rows < 0 || cols < 0 || rows * cols > (1ll << 32))
        throw std::runtime_error("checkpoint: corrupt matrix header");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            m(i, j) = v;
        }
    if (!in) throw std::runtime_error("checkpoint: truncated matrix");
    return m;
}

void write_scalar(std::ostream& out, double v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_scalar(std::istream& in) {
    double v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw std::runtime_error("checkpoint: truncated scalar");
    return v;
}

void write_grads(std::ostream& out, const Gradients& g) {
    write_matrix(out, g.dw0);
    write_matrix(out, g.db0);
    write_matrix(out, g.dw1);
    write_scalar(out, g.db1);
}

Gradients read_grads(std::istream& in) {
    Gradients g;
    g.dw0 = read_matrix(in);
    g.db0 = read_matrix(in);
    g.dw1 = read_matrix(in);
    g.db1 = read_scalar(in);
    return g;
}

}  // namespace

void save_checkpoint(const std::string& path, const GcnModel& model,
                     const AdamState& state, const Standardizer& standardizer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_scalar(out, model.dropout_rate);
    write_matrix(out, model.w0);
    write_matrix(out, model.b0);
    write_matrix(out, model.w1);
    write_scalar(out, model.b1);
    write_scalar(out, state.learning_rate);
    write_scalar(out, state.beta1);
    write_scalar(out, state.beta2);
    write_scalar(out, state.epsilon);
    write_scalar(out, static_cast<double>(state.step));
    write_grads(out, state.m);
    write_grads(out, state.v);
    write_matrix(out, standardizer.mean);
    write_matrix(out, standardizer.stddev);
    if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

void load_checkpoint(const std::string& path, GcnModel& model, AdamState& state,
                     Standardizer& standardizer) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic): " + path);
    model.dropout_rate = read_scalar(in);
    model.w0 = read_matrix(in);
    model.b0 = read_matrix(in);
    model.w1 = read_matrix(in);
    model.b1 = read_scalar(in);
    state.learning_rate = read_scalar(in);
    state.beta1 = read_scalar(in);
    state.beta2 = read_scalar(in);
    state.epsilon = read_scalar(in);
    state.step = static_cast<long>(read_scalar(in));
    state.m = read_grads(in);
    state.v = read_grads(in);
    standardizer.mean = read_matrix(in);
    standardizer.stddev = read_matrix(in);
}

}  // namespace iotddos
