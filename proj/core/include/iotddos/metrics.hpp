#pragma once

#include <vector>

namespace iotddos {

struct ConfusionCounts {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

ConfusionCounts count_confusion(const std::vector<int>& predictions,
                                const std::vector<int>& labels);

double binary_accuracy(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double precision(const ConfusionCounts& c);
// 0 when precision + recall == 0.
double f1_score(const ConfusionCounts& c);

// Area under the ROC via the rank statistic with tie averaging; equals the
// trapezoidal area under the threshold-swept ROC. 0.5 when either class is
// absent or all scores tie.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct BinaryMetrics {
    double accuracy = 0;
    double f1 = 0;
    double auc = 0;
    double recall = 0;
};

// Threshold 0.5 for the confusion-based metrics.
BinaryMetrics compute_metrics(const std::vector<double>& scores,
                              const std::vector<int>& labels);

struct MeanCi {
    double mean = 0;
    double ci95 = 0;  // Student-t 95% half-width
};

// Mean and t-based 95% half-width over independent group values; needs >= 2.
MeanCi aggregate_mean_ci(const std::vector<double>& values);

}  // namespace iotddos
