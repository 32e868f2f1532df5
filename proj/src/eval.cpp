#include "sartol/eval.hpp"
#include "sartol/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <tuple>

namespace sartol {

BinaryMask binarize(const FloatRaster& prediction, double threshold) {
    BinaryMask out(prediction.width, prediction.height);
    for (size_t i = 0; i < prediction.size(); ++i) {
        out.bits[i] = prediction.values[i] >= threshold ? 1 : 0;
    }
    return out;
}

ConfusionCounts confusion(const BinaryMask& pred, const BinaryMask& truth, const BinaryMask& valid) {
    if (pred.width != truth.width || pred.height != truth.height ||
        pred.width != valid.width || pred.height != valid.height) {
        throw DataError("confusion: mask dimensions mismatch");
    }
    ConfusionCounts c;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!valid.bits[i]) continue;
        bool p = pred.bits[i] != 0;
        bool t = truth.bits[i] != 0;
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    if (c.total() == 0) throw DataError("confusion: zero valid pixels");
    return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
    MetricsReport r;
    r.counts = c;
    auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.iou = ratio(c.tp, c.tp + c.fp + c.fn);
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    r.accuracy = ratio(c.tp + c.tn, c.total());
    return r;
}

RgbRaster overlay(const BinaryMask& pred, const BinaryMask& truth, const BinaryMask& valid) {
    if (pred.width != truth.width || pred.height != truth.height ||
        pred.width != valid.width || pred.height != valid.height) {
        throw DataError("overlay: mask dimensions mismatch");
    }
    RgbRaster out(pred.width, pred.height);
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            size_t i = static_cast<size_t>(y) * pred.width + x;
            if (!valid.bits[i]) {
                out.set(x, y, 0, 0, 0);
            } else if (pred.bits[i] && truth.bits[i]) {
                out.set(x, y, 0, 200, 0);
            } else if (pred.bits[i]) {
                out.set(x, y, 220, 0, 0);
            } else if (truth.bits[i]) {
                out.set(x, y, 0, 0, 220);
            } else {
                out.set(x, y, 60, 60, 60);
            }
        }
    }
    return out;
}

namespace {

std::string pct(const std::optional<double>& v) {
    if (!v) return "undef";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", *v * 100.0);
    return buf;
}

} // namespace

std::string sweep_report(const std::vector<MetricsReport>& results) {
    std::vector<const MetricsReport*> rows;
    rows.reserve(results.size());
    for (const MetricsReport& r : results) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const MetricsReport* a, const MetricsReport* b) {
        return std::tie(a->area, a->model, a->t_max, a->lambda) <
               std::tie(b->area, b->model, b->t_max, b->lambda);
    });

    std::ostringstream out;
    out << "area,model,t_max,lambda,iou,precision,recall,accuracy\n";
    for (const MetricsReport* r : rows) {
        char lam[32];
        std::snprintf(lam, sizeof(lam), "%g", r->lambda);
        out << r->area << "," << r->model << "," << r->t_max << "," << lam << ","
            << pct(r->iou) << "," << pct(r->precision) << "," << pct(r->recall) << ","
            << pct(r->accuracy) << "\n";
    }
    return out.str();
}

} // namespace sartol
