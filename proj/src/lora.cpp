#include "ragkit/lora.hpp"

#include <random>
#include <stdexcept>

namespace ragkit::lora {

LoraLinear::LoraLinear(Matrix base, Eigen::Index rank, std::uint64_t seed, double scale)
    : base_(std::move(base)), scale_(scale) {
    if (rank < 1 || rank > std::min(base_.rows(), base_.cols())) {
        throw std::invalid_argument("rank must be in [1, min(d_out, d_in)]");
    }
    lora_a_ = Matrix(base_.rows(), rank);
    std::mt19937_64 rng(seed);
    // Uniform in [-0.1, 0.1]; B zeroed so the initial forward equals W x.
    for (Eigen::Index i = 0; i < lora_a_.rows(); ++i) {
        for (Eigen::Index j = 0; j < lora_a_.cols(); ++j) {
            double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
            lora_a_(i, j) = 0.2 * u - 0.1;
        }
    }
    lora_b_ = Matrix::Zero(rank, base_.cols());
}

LoraLinear::LoraLinear(Matrix base, Matrix a, Matrix b, double scale)
    : base_(std::move(base)), lora_a_(std::move(a)), lora_b_(std::move(b)), scale_(scale) {
    if (lora_a_.rows() != base_.rows() || lora_b_.cols() != base_.cols() ||
        lora_a_.cols() != lora_b_.rows()) {
        throw std::invalid_argument("adapter factor shapes do not conform");
    }
    if (lora_a_.cols() < 1 || lora_a_.cols() > std::min(base_.rows(), base_.cols())) {
        throw std::invalid_argument("rank must be in [1, min(d_out, d_in)]");
    }
}

Vector LoraLinear::forward(const Vector& x) const {
    if (x.size() != d_in()) {
        throw std::invalid_argument("forward: input size mismatch");
    }
    return base_ * x + scale_ * (lora_a_ * (lora_b_ * x));
}

LoraLinear::Gradients LoraLinear::grad(const Vector& x, const Vector& upstream) const {
    if (x.size() != d_in() || upstream.size() != d_out()) {
        throw std::invalid_argument("grad: shape mismatch");
    }
    Gradients g;
    g.d_a = scale_ * upstream * (lora_b_ * x).transpose();
    g.d_b = scale_ * (lora_a_.transpose() * upstream) * x.transpose();
    return g;
}

void LoraLinear::apply_update(const Gradients& g, double learning_rate) {
    if (g.d_a.rows() != lora_a_.rows() || g.d_a.cols() != lora_a_.cols() ||
        g.d_b.rows() != lora_b_.rows() || g.d_b.cols() != lora_b_.cols()) {
        throw std::invalid_argument("apply_update: gradient shape mismatch");
    }
    lora_a_ -= learning_rate * g.d_a;
    lora_b_ -= learning_rate * g.d_b;
}

Matrix LoraLinear::merge() const {
    return base_ + scale_ * lora_a_ * lora_b_;
}

ParamCount param_count(const std::vector<std::pair<long long, long long>>& shapes, long long rank) {
    if (rank < 1) throw std::invalid_argument("param_count: rank must be >= 1");
    if (shapes.empty()) throw std::invalid_argument("param_count: no shapes");
    ParamCount out;
    for (const auto& [d_out, d_in] : shapes) {
        if (d_out < 1 || d_in < 1) throw std::invalid_argument("param_count: bad shape");
        out.trainable += rank * (d_in + d_out);
    }
    return out;
}

double trainable_percentage(double trainable, double total) {
    if (total <= 0.0) throw std::invalid_argument("trainable_percentage: total must be > 0");
    return 100.0 * trainable / total;
}

}  // namespace ragkit::lora
