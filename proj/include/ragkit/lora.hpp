#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ragkit::lora {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A frozen linear map plus a trainable low-rank adapter:
/// output = W x + scale * A (B x). W is (d_out x d_in), A is (d_out x r),
/// B is (r x d_in). Training touches only A and B.
class LoraLinear {
public:
    /// Wraps an existing base matrix. A starts in a small uniform range,
    /// B at zero, so the adapter contributes nothing until trained.
    LoraLinear(Matrix base, Eigen::Index rank, std::uint64_t seed = 42, double scale = 1.0);

    /// Wraps explicit adapter factors (shapes d_out x r and r x d_in).
    LoraLinear(Matrix base, Matrix a, Matrix b, double scale = 1.0);

    Eigen::Index d_out() const { return base_.rows(); }
    Eigen::Index d_in() const { return base_.cols(); }
    Eigen::Index rank() const { return lora_a_.cols(); }
    double scale() const { return scale_; }

    const Matrix& base() const { return base_; }
    const Matrix& lora_a() const { return lora_a_; }
    const Matrix& lora_b() const { return lora_b_; }

    Vector forward(const Vector& x) const;

    struct Gradients {
        Matrix d_a;
        Matrix d_b;
    };

    /// Gradients of a scalar loss with respect to A and B given the loss
    /// gradient at the output. W is frozen and gets none.
    Gradients grad(const Vector& x, const Vector& upstream) const;

    /// One SGD step on the adapter factors only.
    void apply_update(const Gradients& g, double learning_rate);

    /// Folds the adapter into a plain matrix: W + scale * A B.
    Matrix merge() const;

private:
    Matrix base_;
    Matrix lora_a_;
    Matrix lora_b_;
    double scale_;
};

struct ParamCount {
    long long trainable = 0;
};

/// Trainable-parameter count when adapting the given (d_out, d_in)
/// matrices at rank r: sum of r * (d_in + d_out).
ParamCount param_count(const std::vector<std::pair<long long, long long>>& shapes, long long rank);

/// Percentage of a model trained, e.g. 40.37e6 trainable of 7e9 total
/// gives 0.5767...
double trainable_percentage(double trainable, double total);

}  // namespace ragkit::lora
