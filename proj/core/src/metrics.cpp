#include "iotddos/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace iotddos {

ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels) {
    if (predictions.size() != labels.size())
        throw std::invalid_argument("count_confusion: size mismatch");
    ConfusionCounts c;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) {
            (predictions[i] ? c.tp : c.fn) += 1;
        } else {
            (predictions[i] ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double binary_accuracy(const ConfusionCounts& c) {
    return c.total() == 0 ? 0 : static_cast<double>(c.tp + c.tn) / c.total();
}

double recall(const ConfusionCounts& c) {
    return c.tp + c.fn == 0 ? 0 : static_cast<double>(c.tp) / (c.tp + c.fn);
}

double precision(const ConfusionCounts& c) {
    return c.tp + c.fp == 0 ? 0 : static_cast<double>(c.tp) / (c.tp + c.fp);
}

double f1_score(const ConfusionCounts& c) {
    const double p = precision(c);
    const double r = recall(c);
    return p + r == 0 ? 0 : 2 * p * r / (p + r);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("roc_auc: size mismatch");
    const std::size_t n = scores.size();
    std::size_t positives = 0;
    for (int y : labels) positives += (y != 0);
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) return 0.5;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks within tie groups, then the Mann-Whitney statistic.
    double rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]]) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    return (rank_sum_pos - p * (p + 1) / 2) / (p * static_cast<double>(negatives));
}

BinaryMetrics compute_metrics(const std::vector<double>& scores,
                              const std::vector<int>& labels) {
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= 0.5 ? 1 : 0;
    const auto c = count_confusion(preds, labels);
    BinaryMetrics m;
    m.accuracy = binary_accuracy(c);
    m.f1 = f1_score(c);
    m.recall = iotddos::recall(c);
    m.auc = roc_auc(scores, labels);
    return m;
}

MeanCi aggregate_mean_ci(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("aggregate_mean_ci: need at least 2 groups");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double stderr_ = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
    const double t = boost::math::quantile(dist, 0.975);
    return MeanCi{mean, t * stderr_};
}

}  // namespace iotddos
