#pragma once

#include <cmath>
#include <vector>

#include "observer/captioner/param.hpp"

namespace observer::captioner {

/// Adaptive-moment optimizer with bias correction. Moment buffers are keyed
/// by registration order, so the same parameter list must be passed to
/// every step().
template <typename T>
class Adam {
public:
    explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                  double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon)
    {
    }

    void step(const std::vector<Param<T>*>& params)
    {
        if (first_.empty()) {
            for (const auto* p : params) {
                first_.emplace_back(p->size(), 0.0);
                second_.emplace_back(p->size(), 0.0);
            }
        }
        ++t_;
        const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i];
            auto& m = first_[i];
            auto& v = second_[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double g = p.grad[j];
                m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
                v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
                const double update = lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps_);
                p.value[j] = static_cast<T>(p.value[j] - update);
            }
        }
    }

    long steps() const { return t_; }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
};

}  // namespace observer::captioner
