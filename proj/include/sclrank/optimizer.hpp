#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>

#include "encoder.hpp"
#include "errors.hpp"

namespace sclrank {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const
    {
        if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam_beta1 must be in [0, 1)");
        if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam_beta2 must be in [0, 1)");
        if (!(eps > 0.0)) throw ConfigError("adam_eps must be > 0");
    }
};

/// First and second moment estimates plus the step counter.
struct AdamState {
    ModelParams m;
    ModelParams v;
    std::uint64_t step = 0;

    static AdamState for_params(ModelParams const& p)
    {
        return {ModelParams::zeros_like(p), ModelParams::zeros_like(p), 0};
    }
};

/// One bias-corrected Adam update of `params` in place.
inline void adam_step(ModelParams& params, ModelParams const& grads, AdamState& state,
                      AdamConfig const& cfg)
{
    if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
        throw std::invalid_argument("adam_step: parameter, gradient and state shapes differ");
    }
    for (auto g : grads.arrays()) {
        for (double x : g) {
            if (!std::isfinite(x)) throw NumericError("non-finite gradient passed to optimizer");
        }
    }
    ++state.step;
    auto const t = static_cast<double>(state.step);
    double const correct1 = 1.0 - std::pow(cfg.beta1, t);
    double const correct2 = 1.0 - std::pow(cfg.beta2, t);
    auto p = params.arrays();
    auto g = grads.arrays();
    auto m = state.m.arrays();
    auto v = state.v.arrays();
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t i = 0; i < p[a].size(); ++i) {
            double const gi = g[a][i];
            m[a][i] = cfg.beta1 * m[a][i] + (1.0 - cfg.beta1) * gi;
            v[a][i] = cfg.beta2 * v[a][i] + (1.0 - cfg.beta2) * gi * gi;
            double const mhat = m[a][i] / correct1;
            double const vhat = v[a][i] / correct2;
            p[a][i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

} // namespace sclrank
