#include "relex/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace relex {

static constexpr int kNone = 0;

int predict_label(const std::vector<double>& probs, double threshold) {
  if (probs.empty()) throw std::invalid_argument("predict_label: empty distribution");
  int best = 0;
  for (int i = 1; i < static_cast<int>(probs.size()); ++i)
    if (probs[i] > probs[best]) best = i;  // ties keep the lowest id
  if (best == kNone) return kNone;
  return probs[best] < threshold ? kNone : best;
}

int record_prediction(const PredictionRecord& rec, double threshold) {
  if (rec.pred_argmax == kNone) return kNone;
  return rec.confidence < threshold ? kNone : rec.pred_argmax;
}

Metrics prf1(const std::vector<PredictionRecord>& records, double threshold) {
  Metrics m;
  for (const PredictionRecord& rec : records) {
    const int pred = record_prediction(rec, threshold);
    if (pred != kNone) {
      if (pred == rec.gold)
        ++m.tp;
      else
        ++m.fp;
    }
    if (rec.gold != kNone && pred != rec.gold) ++m.fn;
  }
  m.precision = (m.tp + m.fp) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double tune_threshold(const std::vector<PredictionRecord>& records) {
  if (records.empty()) throw std::invalid_argument("tune_threshold: empty record set");
  std::vector<double> candidates{0.0};
  for (const PredictionRecord& rec : records) candidates.push_back(rec.confidence);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best_theta = 0.0, best_f1 = -1.0;
  for (double theta : candidates) {
    const double f1 = prf1(records, theta).f1;
    if (f1 > best_f1) {  // strict: ties keep the smallest threshold
      best_f1 = f1;
      best_theta = theta;
    }
  }
  return best_theta;
}

std::vector<PrPoint> pr_curve(const std::vector<PredictionRecord>& records) {
  long gold_total = 0;
  for (const PredictionRecord& rec : records)
    if (rec.gold != kNone) ++gold_total;

  std::vector<const PredictionRecord*> positives;
  for (const PredictionRecord& rec : records)
    if (rec.pred_argmax != kNone) positives.push_back(&rec);
  std::stable_sort(positives.begin(), positives.end(),
                   [](const PredictionRecord* a, const PredictionRecord* b) {
                     return a->confidence > b->confidence;
                   });

  std::vector<PrPoint> points;
  long tp = 0;
  for (std::size_t r = 0; r < positives.size(); ++r) {
    if (positives[r]->pred_argmax == positives[r]->gold) ++tp;
    PrPoint pt;
    pt.rank = static_cast<int>(r + 1);
    pt.confidence = positives[r]->confidence;
    pt.precision = static_cast<double>(tp) / static_cast<double>(r + 1);
    pt.recall = gold_total > 0 ? static_cast<double>(tp) / gold_total : 0.0;
    points.push_back(pt);
  }
  return points;
}

std::vector<BucketRow> bucket_report(const std::vector<PredictionRecord>& records, BucketMode mode,
                                     const std::vector<int>& edges, double threshold) {
  if (edges.empty()) throw std::invalid_argument("bucket_report: empty edge list");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] <= edges[i - 1])
      throw std::invalid_argument("bucket_report: edges must be strictly increasing");

  const std::size_t buckets = edges.size() + 1;
  std::vector<std::vector<PredictionRecord>> grouped(buckets);
  for (const PredictionRecord& rec : records) {
    const int key = mode == BucketMode::SentenceLength ? rec.sentence_length : rec.entity_distance;
    std::size_t b = edges.size();
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (key <= edges[i]) {
        b = i;
        break;
      }
    grouped[b].push_back(rec);
  }

  std::vector<BucketRow> rows(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    BucketRow& row = rows[b];
    row.low = b == 0 ? 0 : edges[b - 1] + 1;
    row.high = b < edges.size() ? edges[b] : -1;
    row.records = static_cast<long>(grouped[b].size());
    for (const PredictionRecord& rec : grouped[b])
      if (rec.gold != kNone) ++row.gold_positives;
    row.metrics = grouped[b].empty() ? Metrics{} : prf1(grouped[b], threshold);
    row.flagged = row.gold_positives == 0;
  }
  return rows;
}

MonotonicityReport threshold_monotonicity_check(const std::vector<PredictionRecord>& records) {
  std::vector<double> thetas{0.0, 1.0};
  for (const PredictionRecord& rec : records) thetas.push_back(rec.confidence);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

  MonotonicityReport report;
  double prev_recall = 2.0;
  double prev_theta = -1.0;
  for (double theta : thetas) {
    const double recall = prf1(records, theta).recall;
    if (recall > prev_recall + 1e-15) {
      report.ok = false;
      report.theta_low = prev_theta;
      report.theta_high = theta;
      report.message = "recall rose from " + std::to_string(prev_recall) + " at threshold " +
                       std::to_string(prev_theta) + " to " + std::to_string(recall) +
                       " at threshold " + std::to_string(theta);
      return report;
    }
    prev_recall = recall;
    prev_theta = theta;
  }
  report.message = "recall non-increasing over " + std::to_string(thetas.size()) + " thresholds";
  return report;
}

// ---------------------------------------------------------------- output

static std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string metrics_json(const Metrics& m, double threshold,
                         const std::vector<std::pair<std::string, std::string>>& config_echo) {
  nlohmann::ordered_json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["threshold"] = threshold;
  if (!config_echo.empty()) {
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : config_echo) cfg[k] = v;
    j["config"] = cfg;
  }
  return j.dump(2) + "\n";
}

std::string pr_curve_csv(const std::vector<PrPoint>& points,
                         const std::vector<std::string>& header_comments) {
  std::string out;
  for (const std::string& c : header_comments) out += "# " + c + "\n";
  out += "rank,confidence,precision,recall\n";
  for (const PrPoint& p : points)
    out += std::to_string(p.rank) + "," + fmt(p.confidence) + "," + fmt(p.precision) + "," +
           fmt(p.recall) + "\n";
  return out;
}

std::string bucket_csv(const std::vector<BucketRow>& rows,
                       const std::vector<std::string>& header_comments) {
  std::string out;
  for (const std::string& c : header_comments) out += "# " + c + "\n";
  out += "bucket_low,bucket_high,tp,fp,fn,precision,recall,f1,records,gold_positives\n";
  for (const BucketRow& r : rows) {
    out += std::to_string(r.low) + ",";
    out += r.high < 0 ? "inf" : std::to_string(r.high);
    out += "," + std::to_string(r.metrics.tp) + "," + std::to_string(r.metrics.fp) + "," +
           std::to_string(r.metrics.fn) + "," + fmt(r.metrics.precision) + "," +
           fmt(r.metrics.recall) + "," + fmt(r.metrics.f1) + "," + std::to_string(r.records) +
           "," + std::to_string(r.gold_positives) + "\n";
  }
  return out;
}

}  // namespace relex
