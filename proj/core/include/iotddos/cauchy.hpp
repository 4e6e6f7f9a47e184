#pragma once

#include <span>

#include "iotddos/rng.hpp"

namespace iotddos {

// Cauchy(x0, gamma) truncated to [0, m].
struct CauchyParams {
    double x0 = 0;     // location, packets per interval
    double gamma = 1;  // scale, > 0
    double m = 1;      // maximum packet volume, > 0

    void validate() const;

    bool operator==(const CauchyParams&) const = default;
};

// CDF of the untruncated Cauchy(x0, gamma).
double cauchy_cdf(const CauchyParams& p, double x);

// CDF of the truncation to [0, m]; 0 below, 1 above.
double truncated_cauchy_cdf(const CauchyParams& p, double x);

// Inverse-CDF draw: u ~ Uniform(F(0), F(m)), x = x0 + gamma*tan(pi*(u - 1/2)).
double sample_truncated_cauchy(const CauchyParams& p, Rng& rng);

// Attack distribution under intensity k: all three parameters scaled by (1+k).
CauchyParams scale_attack_params(const CauchyParams& benign, double k);

// Maximum-likelihood fit of (x0, gamma) on [0, m] with m = max(samples).
CauchyParams fit_truncated_cauchy(std::span<const double> samples);

}  // namespace iotddos
