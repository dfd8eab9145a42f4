#include "spear/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "spear/errors.hpp"

namespace spear {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DataError("metrics: scores/labels length mismatch (" + std::to_string(scores.size()) +
                        " vs " + std::to_string(labels.size()) + ")");
    for (int l : labels) {
        if (l != 0 && l != 1) throw DataError("metrics: labels must be binary");
    }
}

// Indices sorted by score descending; equal scores keep input order.
std::vector<std::size_t> descending_order(const std::vector<double>& scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });
    return order;
}

}  // namespace

Confusion confusion_counts(const std::vector<double>& scores, const std::vector<int>& labels,
                           double threshold) {
    check_inputs(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (predicted && labels[i] == 1) ++c.tp;
        else if (predicted && labels[i] == 0) ++c.fp;
        else if (!predicted && labels[i] == 0) ++c.tn;
        else ++c.fn;
    }
    return c;
}

void point_metrics(const Confusion& c, double& accuracy, double& precision, double& recall,
                   double& f1) {
    const long total = c.total();
    if (total == 0) throw DataError("point_metrics: empty confusion");
    accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::optional<double> auroc(const std::vector<double>& scores, const std::vector<int>& labels,
                            std::string* reason) {
    check_inputs(scores, labels);
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        if (reason != nullptr)
            *reason = n_pos == 0 ? "no positive labels" : "no negative labels";
        return std::nullopt;
    }

    // Rank-sum formulation with average ranks for tie groups; counts and
    // half-integer ranks are exact in doubles, so this matches the pairwise
    // definition bit for bit.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return scores[i] < scores[j]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::optional<double> aupr(const std::vector<double>& scores, const std::vector<int>& labels,
                           std::string* reason) {
    check_inputs(scores, labels);
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    if (n_pos == 0) {
        if (reason != nullptr) *reason = "no positive labels";
        return std::nullopt;
    }

    const auto order = descending_order(scores);
    double ap = 0.0;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        long group_tp = 0, group_fp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++group_tp;
            else ++group_fp;
            ++j;
        }
        const long prev_tp = tp;
        tp += group_tp;
        fp += group_fp;
        if (group_tp > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double recall_inc =
                static_cast<double>(tp - prev_tp) / static_cast<double>(n_pos);
            ap += precision * recall_inc;
        }
        i = j;
    }
    return ap;
}

std::vector<std::pair<double, double>> roc_curve(const std::vector<double>& scores,
                                                 const std::vector<int>& labels) {
    check_inputs(scores, labels);
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 0.0);
    if (n_pos == 0 || n_neg == 0) {
        points.emplace_back(1.0, 1.0);
        return points;
    }
    const auto order = descending_order(scores);
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++tp;
            else ++fp;
            ++j;
        }
        points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos));
        i = j;
    }
    return points;
}

std::vector<std::pair<double, double>> pr_curve(const std::vector<double>& scores,
                                                const std::vector<int>& labels) {
    check_inputs(scores, labels);
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    std::vector<std::pair<double, double>> points;
    points.emplace_back(0.0, 1.0);
    if (n_pos == 0) return points;
    const auto order = descending_order(scores);
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) ++tp;
            else ++fp;
            ++j;
        }
        points.emplace_back(static_cast<double>(tp) / static_cast<double>(n_pos),
                            static_cast<double>(tp) / static_cast<double>(tp + fp));
        i = j;
    }
    return points;
}

MetricsReport evaluate_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              double threshold) {
    MetricsReport report;
    report.n = static_cast<long>(scores.size());
    report.threshold = threshold;
    report.confusion = confusion_counts(scores, labels, threshold);
    point_metrics(report.confusion, report.accuracy, report.precision, report.recall, report.f1);
    report.auroc = auroc(scores, labels, &report.auroc_reason);
    report.aupr = aupr(scores, labels, &report.aupr_reason);
    report.roc_points = roc_curve(scores, labels);
    report.pr_points = pr_curve(scores, labels);
    return report;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["n"] = n;
    j["threshold"] = threshold;
    j["confusion"] = {{"tp", confusion.tp}, {"fp", confusion.fp}, {"tn", confusion.tn}, {"fn", confusion.fn}};
    j["accuracy"] = accuracy;
    j["precision"] = precision;
    j["recall"] = recall;
    j["f1"] = f1;
    if (auroc.has_value()) j["auroc"] = *auroc;
    else j["auroc"] = nullptr;
    if (aupr.has_value()) j["aupr"] = *aupr;
    else j["aupr"] = nullptr;
    if (!auroc_reason.empty()) j["auroc_reason"] = auroc_reason;
    if (!aupr_reason.empty()) j["aupr_reason"] = aupr_reason;
    return j.dump(2);
}

std::string curve_to_csv(const std::vector<std::pair<double, double>>& points) {
    std::ostringstream out;
    out << "x,y\n";
    out.precision(17);
    for (const auto& [x, y] : points) out << x << "," << y << "\n";
    return out.str();
}

std::string curve_to_svg(const std::vector<std::pair<double, double>>& points,
                         const std::string& title) {
    constexpr int w = 440, h = 440, margin = 40;
    std::ostringstream out;
    out.precision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    out << "  <rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
    out << "  <text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << h - margin << "\" x2=\"" << w - margin
        << "\" y2=\"" << h - margin << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << h - margin << "\" stroke=\"black\"/>\n";
    out << "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    const double span = static_cast<double>(w - 2 * margin);
    for (const auto& [x, y] : points) {
        out << margin + x * span << "," << (h - margin) - y * span << " ";
    }
    out << "\"/>\n</svg>\n";
    return out.str();
}

}  // namespace spear
