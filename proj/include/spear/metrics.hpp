#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spear {

struct Confusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const { return tp + fp + tn + fn; }
};

/// Binary-classification report: threshold point metrics plus ranking metrics
/// with their curves. auroc/aupr are empty when undefined (single-class
/// labels), with the reason recorded.
struct MetricsReport {
    long n = 0;
    double threshold = 0.5;
    Confusion confusion;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auroc;
    std::optional<double> aupr;
    std::string auroc_reason;  // set when auroc is empty
    std::string aupr_reason;   // set when aupr is empty
    std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr), (0,0) .. (1,1)
    std::vector<std::pair<double, double>> pr_points;   // (recall, precision)

    /// Schema: {n, threshold, confusion:{tp,fp,tn,fn}, accuracy, precision,
    /// recall, f1, auroc, aupr} with stable key order; undefined ranking
    /// metrics serialize as null.
    std::string to_json() const;
};

/// Predicted positive iff score >= threshold.
Confusion confusion_counts(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold);

/// Accuracy/precision/recall/F1 with the zero conventions: no predicted
/// positives -> precision 0; no actual positives -> recall 0; P+R=0 -> F1 0.
void point_metrics(const Confusion& c, double& accuracy, double& precision, double& recall,
                   double& f1);

/// Probability a random positive outranks a random negative, ties counted
/// half (Mann-Whitney). Undefined for single-class labels.
std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels,
                            std::string* reason = nullptr);

/// Average precision (step integral of the PR curve); equal scores are
/// treated as one group. Undefined when there are no positives.
std::optional<double> aupr(const std::vector<double>& scores, const std::vector<int>& labels,
                           std::string* reason = nullptr);

std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels);
std::vector<std::pair<double, double>> pr_curve(const std::vector<double>& scores,
                                                const std::vector<int>& labels);

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold = 0.5);

/// Curve export: CSV "x,y" rows and a minimal static SVG polyline.
std::string curve_to_csv(const std::vector<std::pair<double, double>>& points);
std::string curve_to_svg(const std::vector<std::pair<double, double>>& points,
                         const std::string& title);

}  // namespace spear
