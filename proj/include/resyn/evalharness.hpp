#pragma once

#include <string>
#include <vector>

#include "resyn/datamodel.hpp"

namespace resyn {

struct RocCurve {
  std::vector<double> thresholds;  // descending, +inf first
  std::vector<double> fpr;
  std::vector<double> tpr;
  int64_t positives = 0;
  int64_t negatives = 0;

  void validate() const;
};

struct EvalReport {
  std::string method;
  std::string dataset;
  std::string roi_mode;
  double auroc = 0.0;
  RocCurve curve;
  std::string config_hash;
};

// Pools pixels across the dataset (roi true, mask != IGNORE; positive =
// ANOMALY) and sweeps every distinct score value plus the +inf endpoint.
// quantize_bins > 0 selects the binned fast path for very large pools.
RocCurve roc_curve(const std::vector<ScoreMap>& scores,
                   const std::vector<AnomalyMask>& masks,
                   const std::vector<RoiMask>* rois = nullptr,
                   int quantize_bins = 0);

// Trapezoidal area; equals the Mann-Whitney statistic with half credit for
// ties on the pooled pixels.
double auroc(const RocCurve& curve);

// valid = (mask == ANOMALY) union freespace.
RoiMask road_only_roi(const AnomalyMask& mask, const RoiMask& freespace);

// Writes {dataset}_{method}_{roi}.csv / .json / .svg into out_dir.
void emit_report(const EvalReport& report, const std::string& out_dir);

// One SVG with all curves overlaid; path chosen by the caller.
void emit_combined_svg(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace resyn
