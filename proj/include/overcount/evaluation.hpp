#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "overcount/detail/text.hpp"
#include "overcount/detection.hpp"
#include "overcount/error.hpp"
#include "overcount/geometry.hpp"

namespace overcount {

struct MatchedPair {
    std::size_t prediction;
    std::size_t truth;
    double iou;
};

struct MatchResult {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::vector<MatchedPair> pairs;
};

/// Greedy one-to-one matching. Predictions are taken by score (ties: box coordinates, then index);
/// each claims the unclaimed truth with the highest IoU >= threshold (ties: truth box coordinates, then index).
inline MatchResult match(const std::vector<Detection>& predictions, const std::vector<PixelBox>& truths,
                         double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) throw Error("match IoU threshold must be in (0, 1]");
    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto &pa = predictions[a], &pb = predictions[b];
        if (pa.score != pb.score) return pa.score > pb.score;
        if (pa.box != pb.box) return pa.box < pb.box;
        return a < b;
    });

    MatchResult r;
    std::vector<bool> claimed(truths.size(), false);
    for (std::size_t p : order) {
        std::size_t best = truths.size();
        double best_iou = 0.0;
        for (std::size_t t = 0; t < truths.size(); ++t) {
            if (claimed[t]) continue;
            const double v = iou(predictions[p].box, truths[t]);
            if (v < iou_threshold) continue;
            if (best == truths.size() || v > best_iou || (v == best_iou && truths[t] < truths[best])) {
                best = t;
                best_iou = v;
            }
        }
        if (best != truths.size()) {
            claimed[best] = true;
            r.pairs.push_back({p, best, best_iou});
        }
    }
    r.true_positives = r.pairs.size();
    r.false_positives = predictions.size() - r.true_positives;
    r.false_negatives = truths.size() - r.true_positives;
    return r;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// precision and recall are 1 when their denominator is 0; f1 = 2TP / (2TP + FP + FN), 0 when that is 0/0.
inline Prf prf(std::size_t tp, std::size_t fp, std::size_t fn) {
    Prf r;
    r.precision = (tp + fp) == 0 ? 1.0 : double(tp) / double(tp + fp);
    r.recall = (tp + fn) == 0 ? 1.0 : double(tp) / double(tp + fn);
    const std::size_t denom = 2 * tp + fp + fn;
    r.f1 = denom == 0 ? 0.0 : 2.0 * double(tp) / double(denom);
    return r;
}

inline Prf prf(const MatchResult& m) { return prf(m.true_positives, m.false_positives, m.false_negatives); }

/// 1 - |predicted - truth| / truth, clamped at 0. An empty truth scores 1 only for an empty prediction.
inline double count_accuracy(std::size_t predicted, std::size_t truth) {
    if (truth == 0) return predicted == 0 ? 1.0 : 0.0;
    const double err = std::abs(double(predicted) - double(truth)) / double(truth);
    return std::max(0.0, 1.0 - err);
}

struct EvalRow {
    std::string scene_id;
    std::size_t tp = 0, fp = 0, fn = 0;
    Prf metrics;
    std::size_t pred_count = 0, true_count = 0;
    double count_accuracy = 0.0;
};

inline EvalRow evaluate_scene(std::string scene_id, const std::vector<Detection>& predictions,
                              const std::vector<PixelBox>& truths, double iou_threshold) {
    const auto m = match(predictions, truths, iou_threshold);
    EvalRow row{std::move(scene_id), m.true_positives, m.false_positives, m.false_negatives, prf(m),
                predictions.size(), truths.size(), 0.0};
    row.count_accuracy = count_accuracy(row.pred_count, row.true_count);
    return row;
}

/// Micro-average: metrics recomputed from summed counts.
inline EvalRow total_row(const std::vector<EvalRow>& rows) {
    EvalRow t;
    t.scene_id = "__total__";
    for (const auto& r : rows) {
        t.tp += r.tp, t.fp += r.fp, t.fn += r.fn;
        t.pred_count += r.pred_count, t.true_count += r.true_count;
    }
    t.metrics = prf(t.tp, t.fp, t.fn);
    t.count_accuracy = count_accuracy(t.pred_count, t.true_count);
    return t;
}

inline constexpr const char* kEvalHeader =
    "scene_id,tp,fp,fn,precision,recall,f1,pred_count,true_count,count_accuracy";

inline void write_eval_row(std::ostream& out, const EvalRow& r) {
    using detail::format_fixed;
    out << detail::csv_field(r.scene_id) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ','
        << format_fixed(r.metrics.precision, 6) << ',' << format_fixed(r.metrics.recall, 6) << ','
        << format_fixed(r.metrics.f1, 6) << ',' << r.pred_count << ',' << r.true_count << ','
        << format_fixed(r.count_accuracy, 6) << '\n';
}

/// Per-scene rows, then `__total__` (micro) and `__mean__` (macro average of per-scene ratios;
/// its integer columns are left empty).
inline void write_eval_report(std::ostream& out, const std::vector<EvalRow>& rows) {
    using detail::format_fixed;
    out << kEvalHeader << '\n';
    for (const auto& r : rows) write_eval_row(out, r);
    if (rows.empty()) return;
    write_eval_row(out, total_row(rows));
    double p = 0, rc = 0, f = 0, ca = 0;
    for (const auto& r : rows) p += r.metrics.precision, rc += r.metrics.recall, f += r.metrics.f1, ca += r.count_accuracy;
    const double n = double(rows.size());
    out << "__mean__,,,," << format_fixed(p / n, 6) << ',' << format_fixed(rc / n, 6) << ',' << format_fixed(f / n, 6)
        << ",,," << format_fixed(ca / n, 6) << '\n';
}

}  // namespace overcount
