#include "iotddos/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace iotddos {

namespace {
constexpr double kPi = std::numbers::pi;
}

void CauchyParams::validate() const {
    if (!(gamma > 0)) throw std::invalid_argument("CauchyParams: gamma must be > 0");
    if (!(m > 0)) throw std::invalid_argument("CauchyParams: m must be > 0");
    if (!(x0 >= 0)) throw std::invalid_argument("CauchyParams: x0 must be >= 0");
}

double cauchy_cdf(const CauchyParams& p, double x) {
    return 0.5 + std::atan((x - p.x0) / p.gamma) / kPi;
}

double truncated_cauchy_cdf(const CauchyParams& p, double x) {
    if (x <= 0) return 0.0;
    if (x >= p.m) return 1.0;
    const double lo = cauchy_cdf(p, 0);
    const double hi = cauchy_cdf(p, p.m);
    return (cauchy_cdf(p, x) - lo) / (hi - lo);
}

double sample_truncated_cauchy(const CauchyParams& p, Rng& rng) {
    p.validate();
    const double lo = cauchy_cdf(p, 0);
    const double hi = cauchy_cdf(p, p.m);
    const double u = lo + (hi - lo) * rng.uniform();
    const double x = p.x0 + p.gamma * std::tan(kPi * (u - 0.5));
    return std::clamp(x, 0.0, p.m);
}

CauchyParams scale_attack_params(const CauchyParams& benign, double k) {
    benign.validate();
    if (k < 0) throw std::invalid_argument("attack intensity k must be >= 0");
    return CauchyParams{benign.x0 * (1 + k), benign.gamma * (1 + k), benign.m * (1 + k)};
}

namespace {

// Negative log-likelihood of the truncated Cauchy at (x0, gamma), m fixed.
double trunc_cauchy_nll(std::span<const double> xs, double x0, double gamma, double m) {
    const double lo = std::atan((0 - x0) / gamma);
    const double hi = std::atan((m - x0) / gamma);
    const double log_mass = std::log(hi - lo);
    double nll = 0;
    for (double x : xs) {
        const double z = (x - x0) / gamma;
        nll += std::log(gamma) + std::log1p(z * z) + log_mass;
    }
    return nll;
}

}  // namespace

CauchyParams fit_truncated_cauchy(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("fit_truncated_cauchy: empty sample set");
    for (double x : samples) {
        if (!(x >= 0)) throw std::invalid_argument("fit_truncated_cauchy: negative sample");
    }
    const double m = *std::max_element(samples.begin(), samples.end());
    const double mn = *std::min_element(samples.begin(), samples.end());
    if (m == mn) {
        throw std::invalid_argument("fit_truncated_cauchy: all samples identical, scale is degenerate");
    }

    // Robust starting point: median and half the interquartile range.
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        return sorted[static_cast<std::size_t>(q * (sorted.size() - 1))];
    };
    double x0 = quantile(0.5);
    double gamma = std::max((quantile(0.75) - quantile(0.25)) / 2, 1e-6 * m);

    // Nelder-Mead in (x0, log gamma).
    struct Pt {
        double a, b, f;
    };
    const auto eval = [&](double a, double b) {
        return trunc_cauchy_nll(samples, a, std::exp(b), m);
    };
    Pt s[3] = {{x0, std::log(gamma), 0},
               {x0 + std::max(0.5, 0.05 * m), std::log(gamma), 0},
               {x0, std::log(gamma) + 0.5, 0}};
    for (auto& p : s) p.f = eval(p.a, p.b);

    for (int it = 0; it < 400; ++it) {
        std::sort(s, s + 3, [](const Pt& u, const Pt& v) { return u.f < v.f; });
        if (std::abs(s[2].f - s[0].f) < 1e-12 * (1 + std::abs(s[0].f))) break;
        const double ca = (s[0].a + s[1].a) / 2;
        const double cb = (s[0].b + s[1].b) / 2;
        Pt refl{ca + (ca - s[2].a), cb + (cb - s[2].b), 0};
        refl.f = eval(refl.a, refl.b);
        if (refl.f < s[0].f) {
            Pt exp_{ca + 2 * (ca - s[2].a), cb + 2 * (cb - s[2].b), 0};
            exp_.f = eval(exp_.a, exp_.b);
            s[2] = exp_.f < refl.f ? exp_ : refl;
        } else if (refl.f < s[1].f) {
            s[2] = refl;
        } else {
            Pt contr{ca + 0.5 * (s[2].a - ca), cb + 0.5 * (s[2].b - cb), 0};
            contr.f = eval(contr.a, contr.b);
            if (contr.f < s[2].f) {
                s[2] = contr;
            } else {
                for (int i = 1; i < 3; ++i) {
                    s[i].a = s[0].a + 0.5 * (s[i].a - s[0].a);
                    s[i].b = s[0].b + 0.5 * (s[i].b - s[0].b);
                    s[i].f = eval(s[i].a, s[i].b);
                }
            }
        }
    }
    std::sort(s, s + 3, [](const Pt& u, const Pt& v) { return u.f < v.f; });
    CauchyParams out{std::max(s[0].a, 0.0), std::exp(s[0].b), m};
    out.validate();
    return out;
}

}  // namespace iotddos
