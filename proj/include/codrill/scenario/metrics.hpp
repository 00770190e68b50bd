#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "codrill/scenario/runlog.hpp"

namespace codrill::scenario {

enum class ForceSource { measured, truth };
enum class Attribution { controller, nearest };

struct MetricsOptions {
  ForceSource force = ForceSource::measured;
  Attribution attribution = Attribution::controller;
  double contact_threshold = 0.3;  ///< C [N]
  double margin = 0.2;             ///< safety limit = lambda + margin [N]
};

/// Statistics of one force band: samples, time, mean and max of |F_T|.
struct ForceBand {
  std::size_t samples = 0;
  double time = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct StructureMetrics {
  int index = 0;
  std::string name;
  double lambda = 0.0;
  ForceBand contact;    ///< |F_T| > C
  ForceBand high;       ///< |F_T| > lambda
  ForceBand undesired;  ///< |F_T| > lambda + margin
  double proportion = 0.0;        ///< undesired time / contact time
  double proportion_total = 0.0;  ///< undesired time / run duration
  std::size_t breaches = 0;
};

struct MetricsReport {
  std::string name;
  std::string comparison_key;
  bool controller_enabled = true;
  MetricsOptions options;
  double duration = 0.0;
  std::vector<StructureMetrics> rows;  ///< structure-table order
  ForceBand unattributed;              ///< contact samples with no structure
  std::size_t breaches = 0;

  const StructureMetrics* row(int index) const;
};

/// Throws FormatError when the attribution needs annotations the log lacks.
MetricsReport compute_metrics(const RunLog& log, const MetricsOptions& options = {});
MetricsReport compute_metrics(const RunLog& log, const twin::StructureTable& specs,
                              const MetricsOptions& options = {});

struct MetricDelta {
  std::string metric;
  double on = 0.0;
  double off = 0.0;
  double delta = 0.0;     ///< on - off
  double relative = 0.0;  ///< (off - on) / off, 0 when off is 0
};

enum class Verdict { improved, worsened, unchanged };

std::string_view to_string(Verdict v);

struct StructureComparison {
  int index = 0;
  std::string name;
  std::vector<MetricDelta> deltas;
  Verdict verdict = Verdict::unchanged;  ///< by proportion above the safety limit

  const MetricDelta* delta(std::string_view metric) const;
};

struct Comparison {
  std::string comparison_key;
  std::vector<StructureComparison> rows;
  bool all_improved() const;
};

/// Pairs runs of the same scenario and seed. Throws ConfigurationError when
/// the comparison keys differ.
Comparison compare_runs(const MetricsReport& on, const MetricsReport& off);
Comparison compare_runs(const RunLog& on, const RunLog& off, const MetricsOptions& options = {});

/// Fixed-width table, one column per structure.
std::string format_report(const MetricsReport& report);
std::string format_comparison(const Comparison& comparison);

/// One row per structure.
std::string report_csv(const MetricsReport& report);
nlohmann::json report_json(const MetricsReport& report);
nlohmann::json comparison_json(const Comparison& comparison);

}  // namespace codrill::scenario
