#include "resyn/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace resyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_coord(double v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

const char* kCurveColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                              "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

void svg_curves(std::ofstream& out, const std::vector<const RocCurve*>& curves,
                const std::vector<std::string>& labels) {
  const int W = 640, H = 520, M = 60;  // plot box with margins
  const int PW = W - 2 * M, PH = 420;
  auto px = [&](double fpr) { return M + fpr * PW; };
  auto py = [&](double tpr) { return M + (1.0 - tpr) * PH; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << PW << "\" height=\""
      << PH << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt_coord(px(0)) << "\" y1=\"" << fmt_coord(py(0))
      << "\" x2=\"" << fmt_coord(px(1)) << "\" y2=\"" << fmt_coord(py(1))
      << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"" << M + PW / 2 << "\" y=\"" << M + PH + 35
      << "\" text-anchor=\"middle\" font-size=\"14\">false positive rate</text>\n";
  out << "<text x=\"18\" y=\"" << M + PH / 2
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << M + PH / 2 << ")\">true positive rate</text>\n";

  for (size_t k = 0; k < curves.size(); ++k) {
    const RocCurve& c = *curves[k];
    const char* color = kCurveColors[k % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < c.fpr.size(); ++i) {
      if (i) out << ' ';
      out << fmt_coord(px(c.fpr[i])) << ',' << fmt_coord(py(c.tpr[i]));
    }
    out << "\"/>\n";
    const int ly = M + 18 + static_cast<int>(k) * 18;
    out << "<line x1=\"" << M + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << M + 34
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << M + 40 << "\" y=\"" << ly
        << "\" font-size=\"12\">" << labels[k] << "</text>\n";
  }
  out << "</svg>\n";
}

std::string report_label(const EvalReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s (AUROC %.4f)", r.method.c_str(), r.auroc);
  return buf;
}

}  // namespace

void RocCurve::validate() const {
  require(thresholds.size() == fpr.size() && fpr.size() == tpr.size() && !fpr.empty(),
          "RocCurve: ragged arrays");
  require(positives > 0 && negatives > 0, "RocCurve: empty class");
  require(fpr.front() == 0.0 && tpr.front() == 0.0, "RocCurve: must start at (0,0)");
  require(fpr.back() == 1.0 && tpr.back() == 1.0, "RocCurve: must end at (1,1)");
  for (size_t i = 1; i < fpr.size(); ++i) {
    require(fpr[i] >= fpr[i - 1] && tpr[i] >= tpr[i - 1],
            "RocCurve: rates must be non-decreasing");
    require(thresholds[i] < thresholds[i - 1], "RocCurve: thresholds must descend");
  }
}

RocCurve roc_curve(const std::vector<ScoreMap>& scores,
                   const std::vector<AnomalyMask>& masks,
                   const std::vector<RoiMask>* rois, int quantize_bins) {
  require(scores.size() == masks.size() && !scores.empty(),
          "roc_curve: scores/masks must be aligned and non-empty");
  if (rois)
    require(rois->size() == scores.size(), "roc_curve: roi list size mismatch");

  std::vector<std::pair<double, uint8_t>> pool;  // (score, is_positive)
  for (size_t i = 0; i < scores.size(); ++i) {
    const ScoreMap& s = scores[i];
    const AnomalyMask& m = masks[i];
    require(s.h == m.h && s.w == m.w, "roc_curve: score/mask dims differ");
    s.validate();
    const RoiMask* roi = rois ? &(*rois)[i] : nullptr;
    if (roi)
      require(roi->h == s.h && roi->w == s.w, "roc_curve: roi dims differ");
    for (size_t p = 0; p < s.scores.size(); ++p) {
      if (roi && !roi->valid[p]) continue;
      if (m.values[p] == kIgnore) continue;
      pool.emplace_back(s.scores[p], m.values[p] == kAnomaly ? 1 : 0);
    }
  }

  int64_t P = 0, N = 0;
  for (const auto& [sc, pos] : pool) (pos ? P : N) += 1;
  if (P == 0) throw DataError("roc_curve: pooled pixels contain no ANOMALY class");
  if (N == 0) throw DataError("roc_curve: pooled pixels contain no NORMAL class");

  RocCurve curve;
  curve.positives = P;
  curve.negatives = N;
  curve.thresholds.push_back(kInf);
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  if (quantize_bins > 0 && static_cast<int64_t>(pool.size()) > quantize_bins) {
    // Binned sweep over equal-width thresholds.
    const double hi = pool.front().first;
    const double lo = pool.back().first;
    int64_t tp = 0, fp = 0;
    size_t idx = 0;
    for (int b = 0; b < quantize_bins; ++b) {
      const double t = hi - (hi - lo) * (b + 1) / quantize_bins;
      while (idx < pool.size() && pool[idx].first >= t) {
        (pool[idx].second ? tp : fp) += 1;
        ++idx;
      }
      if (curve.thresholds.back() == t) continue;
      curve.thresholds.push_back(t);
      curve.fpr.push_back(static_cast<double>(fp) / N);
      curve.tpr.push_back(static_cast<double>(tp) / P);
    }
    while (idx < pool.size()) {
      (pool[idx].second ? tp : fp) += 1;
      ++idx;
    }
    if (curve.fpr.back() != 1.0 || curve.tpr.back() != 1.0) {
      curve.thresholds.push_back(std::nextafter(curve.thresholds.back(), -kInf));
      curve.fpr.push_back(1.0);
      curve.tpr.push_back(1.0);
    }
  } else {
    int64_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < pool.size()) {
      const double t = pool[i].first;
      while (i < pool.size() && pool[i].first == t) {
        (pool[i].second ? tp : fp) += 1;
        ++i;
      }
      curve.thresholds.push_back(t);
      curve.fpr.push_back(static_cast<double>(fp) / N);
      curve.tpr.push_back(static_cast<double>(tp) / P);
    }
  }
  curve.validate();
  return curve;
}

double auroc(const RocCurve& curve) {
  curve.validate();
  double area = 0.0;
  for (size_t i = 1; i < curve.fpr.size(); ++i)
    area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  return area;
}

RoiMask road_only_roi(const AnomalyMask& mask, const RoiMask& freespace) {
  require(mask.h == freespace.h && mask.w == freespace.w,
          "road_only_roi: dims differ");
  RoiMask out(mask.h, mask.w, 0);
  for (size_t i = 0; i < out.valid.size(); ++i)
    out.valid[i] = (mask.values[i] == kAnomaly || freespace.valid[i]) ? 1 : 0;
  return out;
}

void emit_report(const EvalReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem = report.dataset + "_" + report.method + "_" + report.roi_mode;
  const std::filesystem::path base = std::filesystem::path(out_dir) / stem;

  std::ofstream csv(base.string() + ".csv");
  if (!csv) throw DataError("emit_report: cannot write in " + out_dir);
  csv << "threshold,fpr,tpr\n";
  for (size_t i = 0; i < report.curve.thresholds.size(); ++i)
    csv << fmt_double(report.curve.thresholds[i]) << ',' << fmt_double(report.curve.fpr[i])
        << ',' << fmt_double(report.curve.tpr[i]) << "\n";

  nlohmann::ordered_json j;
  j["method"] = report.method;
  j["dataset"] = report.dataset;
  j["roi_mode"] = report.roi_mode;
  j["auroc"] = report.auroc;
  j["positives"] = report.curve.positives;
  j["negatives"] = report.curve.negatives;
  j["config_hash"] = report.config_hash;
  std::ofstream js(base.string() + ".json");
  js << j.dump(2) << "\n";

  std::ofstream svg(base.string() + ".svg");
  svg_curves(svg, {&report.curve}, {report_label(report)});
}

void emit_combined_svg(const std::vector<EvalReport>& reports, const std::string& path) {
  require(!reports.empty(), "emit_combined_svg: no reports");
  std::ofstream svg(path);
  if (!svg) throw DataError("emit_combined_svg: cannot write " + path);
  std::vector<const RocCurve*> curves;
  std::vector<std::string> labels;
  for (const auto& r : reports) {
    curves.push_back(&r.curve);
    labels.push_back(report_label(r));
  }
  svg_curves(svg, curves, labels);
}

}  // namespace resyn
