#pragma once

#include <string>
#include <vector>

namespace relex {

// One evaluated instance. pred_argmax/confidence describe the raw network
// argmax; threshold demotion happens at scoring time so one record set can
// be swept over thresholds.
struct PredictionRecord {
  int pred_argmax = 0;
  double confidence = 0.0;
  int gold = 0;
  int sentence_length = 0;
  int entity_distance = 0;  // start-token gap
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

// Argmax (ties to the lowest id) with confidence demotion: a non-None argmax
// whose probability falls below the threshold becomes None.
int predict_label(const std::vector<double>& probs, double threshold);

// Demoted prediction for one record at the given threshold.
int record_prediction(const PredictionRecord& rec, double threshold);

// Micro-averaged P/R/F1 over non-None decisions.
Metrics prf1(const std::vector<PredictionRecord>& records, double threshold = 0.0);

// Exact F1-maximizing threshold over {0} + observed confidences; ties go to
// the smallest threshold.
double tune_threshold(const std::vector<PredictionRecord>& records);

struct PrPoint {
  int rank = 0;
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Non-None predictions ranked by confidence descending; cumulative precision
// and recall against the total gold non-None count. Empty when there are no
// positive predictions.
std::vector<PrPoint> pr_curve(const std::vector<PredictionRecord>& records);

enum class BucketMode { SentenceLength, EntityDistance };

struct BucketRow {
  int low = 0;
  int high = -1;  // -1 marks the unbounded top bucket
  Metrics metrics;
  long records = 0;
  long gold_positives = 0;
  bool flagged = false;  // no gold positives in this bucket
};

// Buckets bounded by inclusive upper edges, e.g. edges {20, 40} gives
// <=20, <=40, >40.
std::vector<BucketRow> bucket_report(const std::vector<PredictionRecord>& records, BucketMode mode,
                                     const std::vector<int>& edges, double threshold = 0.0);

struct MonotonicityReport {
  bool ok = true;
  double theta_low = 0.0;
  double theta_high = 0.0;
  std::string message;
};

// Recall must be non-increasing in the threshold; a violation names the
// offending threshold pair.
MonotonicityReport threshold_monotonicity_check(const std::vector<PredictionRecord>& records);

// external formats
std::string metrics_json(const Metrics& m, double threshold,
                         const std::vector<std::pair<std::string, std::string>>& config_echo);
std::string pr_curve_csv(const std::vector<PrPoint>& points,
                         const std::vector<std::string>& header_comments);
std::string bucket_csv(const std::vector<BucketRow>& rows,
                       const std::vector<std::string>& header_comments);

}  // namespace relex
