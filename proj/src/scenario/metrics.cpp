#include "codrill/scenario/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "codrill/common/error.hpp"

namespace codrill::scenario {

using nlohmann::json;

namespace {

struct BandSum {
  std::size_t n = 0;
  double sum = 0.0;
  double max = 0.0;

  void add(double f) {
    ++n;
    sum += f;
    max = std::max(max, f);
  }

  ForceBand finish(double dt) const {
    return {n, static_cast<double>(n) * dt, n ? sum / static_cast<double>(n) : 0.0, max};
  }
};

std::optional<std::size_t> nearest_slot(const std::vector<double>& d) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (std::isfinite(d[i]) && (!best || d[i] < d[*best])) best = i;
  return best;
}

std::string cell(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

json band_json(const ForceBand& b) {
  return {{"samples", b.samples}, {"time", b.time}, {"mean", b.mean}, {"max", b.max}};
}

}  // namespace

const StructureMetrics* MetricsReport::row(int index) const {
  for (const auto& r : rows)
    if (r.index == index) return &r;
  return nullptr;
}

MetricsReport compute_metrics(const RunLog& log, const MetricsOptions& options) {
  return compute_metrics(log, log.header.structures, options);
}

MetricsReport compute_metrics(const RunLog& log, const twin::StructureTable& specs, const MetricsOptions& options) {
  const auto& h = log.header;
  if (options.attribution == Attribution::controller && !h.has_structure)
    throw FormatError("run log has no structure annotations; use nearest-structure attribution");
  if (options.attribution == Attribution::nearest && !h.has_distances)
    throw FormatError("run log has no distance columns for nearest-structure attribution");

  MetricsReport report;
  report.name = h.name;
  report.comparison_key = h.comparison_key;
  report.controller_enabled = h.controller_enabled;
  report.options = options;
  const double dt = h.record_dt;
  report.duration = static_cast<double>(log.records.size()) * dt;

  const std::size_t n = specs.size();
  std::vector<BandSum> contact(n), high(n), undesired(n);
  BandSum unattributed;
  for (const auto& r : log.records) {
    const double f = (options.force == ForceSource::measured ? r.force_estimate : r.force_true).norm();
    if (!(f > options.contact_threshold)) continue;
    std::optional<std::size_t> slot;
    if (options.attribution == Attribution::controller) {
      if (r.structure != 0) slot = twin::structure_slot(specs, r.structure);
    } else if (h.has_distances && r.distances.size() == h.structures.size()) {
      if (auto s = nearest_slot(r.distances)) slot = twin::structure_slot(specs, h.structures[*s].index);
    }
    if (!slot) {
      unattributed.add(f);
      continue;
    }
    const double lambda = specs[*slot].lambda;
    contact[*slot].add(f);
    if (f > lambda) high[*slot].add(f);
    if (f > lambda + options.margin) undesired[*slot].add(f);
  }
  report.unattributed = unattributed.finish(dt);

  for (std::size_t i = 0; i < n; ++i) {
    StructureMetrics m;
    m.index = specs[i].index;
    m.name = specs[i].name;
    m.lambda = specs[i].lambda;
    m.contact = contact[i].finish(dt);
    m.high = high[i].finish(dt);
    m.undesired = undesired[i].finish(dt);
    m.proportion = contact[i].n ? static_cast<double>(undesired[i].n) / static_cast<double>(contact[i].n) : 0.0;
    m.proportion_total = log.records.empty()
                             ? 0.0
                             : static_cast<double>(undesired[i].n) / static_cast<double>(log.records.size());
    report.rows.push_back(m);
  }
  for (const auto& e : log.events) {
    if (e.kind != "breach") continue;
    ++report.breaches;
    for (auto& m : report.rows)
      if (m.index == e.structure) ++m.breaches;
  }
  return report;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::improved: return "improved";
    case Verdict::worsened: return "worsened";
    case Verdict::unchanged: return "unchanged";
  }
  return "unknown";
}

const MetricDelta* StructureComparison::delta(std::string_view metric) const {
  for (const auto& d : deltas)
    if (d.metric == metric) return &d;
  return nullptr;
}

bool Comparison::all_improved() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.verdict == Verdict::improved; });
}

Comparison compare_runs(const MetricsReport& on, const MetricsReport& off) {
  if (on.comparison_key != off.comparison_key)
    throw ConfigurationError("runs are not comparable: comparison keys '" + on.comparison_key + "' and '" +
                             off.comparison_key + "' differ (scenario or seed mismatch)");
  if (on.rows.size() != off.rows.size()) throw ConfigurationError("runs are not comparable: structure tables differ");
  Comparison out;
  out.comparison_key = on.comparison_key;
  for (std::size_t i = 0; i < on.rows.size(); ++i) {
    const auto& a = on.rows[i];
    const auto& b = off.rows[i];
    if (a.index != b.index) throw ConfigurationError("runs are not comparable: structure tables differ");
    StructureComparison c;
    c.index = a.index;
    c.name = a.name;
    auto add = [&](std::string metric, double x, double y) {
      c.deltas.push_back({std::move(metric), x, y, x - y, y != 0.0 ? (y - x) / y : 0.0});
    };
    add("contact_time", a.contact.time, b.contact.time);
    add("contact_mean", a.contact.mean, b.contact.mean);
    add("contact_max", a.contact.max, b.contact.max);
    add("high_samples", static_cast<double>(a.high.samples), static_cast<double>(b.high.samples));
    add("high_mean", a.high.mean, b.high.mean);
    add("high_max", a.high.max, b.high.max);
    add("undesired_samples", static_cast<double>(a.undesired.samples), static_cast<double>(b.undesired.samples));
    add("undesired_mean", a.undesired.mean, b.undesired.mean);
    add("undesired_max", a.undesired.max, b.undesired.max);
    add("proportion", a.proportion, b.proportion);
    add("proportion_total", a.proportion_total, b.proportion_total);
    add("breaches", static_cast<double>(a.breaches), static_cast<double>(b.breaches));
    c.verdict = a.proportion < b.proportion   ? Verdict::improved
                : a.proportion > b.proportion ? Verdict::worsened
                                              : Verdict::unchanged;
    out.rows.push_back(std::move(c));
  }
  return out;
}

Comparison compare_runs(const RunLog& on, const RunLog& off, const MetricsOptions& options) {
  if (on.header.comparison_key != off.header.comparison_key)
    throw ConfigurationError("runs are not comparable: comparison keys '" + on.header.comparison_key + "' and '" +
                             off.header.comparison_key + "' differ (scenario or seed mismatch)");
  return compare_runs(compute_metrics(on, options), compute_metrics(off, options));
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream out;
  auto line = [&](const std::string& label, auto value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%-26s", label.c_str());
    out << buf;
    for (const auto& r : report.rows) {
      std::snprintf(buf, sizeof(buf), "%14s", value(r).c_str());
      out << buf;
    }
    out << "\n";
  };
  out << "run: " << (report.name.empty() ? "(unnamed)" : report.name)
      << "  controller: " << (report.controller_enabled ? "on" : "off") << "  duration: " << cell(report.duration)
      << " s\n";
  line("structure", [](const StructureMetrics& r) { return r.name.substr(0, 13); });
  line("lambda [N]", [](const StructureMetrics& r) { return cell(r.lambda, 1); });
  line("contact time [s]", [](const StructureMetrics& r) { return cell(r.contact.time); });
  line("contact mean |F_T| [N]", [](const StructureMetrics& r) { return cell(r.contact.mean); });
  line("contact max |F_T| [N]", [](const StructureMetrics& r) { return cell(r.contact.max); });
  line("high samples", [](const StructureMetrics& r) { return std::to_string(r.high.samples); });
  line("high mean [N]", [](const StructureMetrics& r) { return cell(r.high.mean); });
  line("high max [N]", [](const StructureMetrics& r) { return cell(r.high.max); });
  line("undesired samples", [](const StructureMetrics& r) { return std::to_string(r.undesired.samples); });
  line("undesired mean [N]", [](const StructureMetrics& r) { return cell(r.undesired.mean); });
  line("undesired max [N]", [](const StructureMetrics& r) { return cell(r.undesired.max); });
  line("above limit / contact", [](const StructureMetrics& r) { return cell(r.proportion); });
  line("above limit / duration", [](const StructureMetrics& r) { return cell(r.proportion_total); });
  line("breaches", [](const StructureMetrics& r) { return std::to_string(r.breaches); });
  if (report.unattributed.samples)
    out << "unattributed contact: " << report.unattributed.samples << " samples\n";
  return out.str();
}

std::string format_comparison(const Comparison& comparison) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-16s%10s%10s%10s%12s  %s\n", "structure", "w/o", "w", "delta", "reduction",
                "verdict");
  out << "proportion of contact time above the safety limit\n" << buf;
  for (const auto& r : comparison.rows) {
    const auto* d = r.delta("proportion");
    std::snprintf(buf, sizeof(buf), "%-16s%10.3f%10.3f%+10.3f%11.1f%%  %s\n", r.name.substr(0, 15).c_str(), d->off,
                  d->on, d->delta, 100.0 * d->relative, std::string(to_string(r.verdict)).c_str());
    out << buf;
  }
  out << (comparison.all_improved() ? "all structures improved\n" : "not all structures improved\n");
  return out.str();
}

std::string report_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "index,name,lambda,contact_samples,contact_time,contact_mean,contact_max,high_samples,high_mean,high_max,"
         "undesired_samples,undesired_mean,undesired_max,proportion,proportion_total,breaches\n";
  for (const auto& r : report.rows) {
    out << r.index << "," << r.name << "," << r.lambda << "," << r.contact.samples << "," << r.contact.time << ","
        << r.contact.mean << "," << r.contact.max << "," << r.high.samples << "," << r.high.mean << "," << r.high.max
        << "," << r.undesired.samples << "," << r.undesired.mean << "," << r.undesired.max << "," << r.proportion
        << "," << r.proportion_total << "," << r.breaches << "\n";
  }
  return out.str();
}

json report_json(const MetricsReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"index", r.index},
                    {"name", r.name},
                    {"lambda", r.lambda},
                    {"contact", band_json(r.contact)},
                    {"high", band_json(r.high)},
                    {"undesired", band_json(r.undesired)},
                    {"proportion", r.proportion},
                    {"proportion_total", r.proportion_total},
                    {"breaches", r.breaches}});
  return {{"name", report.name},
          {"comparison_key", report.comparison_key},
          {"controller_enabled", report.controller_enabled},
          {"force", report.options.force == ForceSource::measured ? "measured" : "true"},
          {"attribution", report.options.attribution == Attribution::controller ? "controller" : "nearest"},
          {"duration", report.duration},
          {"structures", rows},
          {"unattributed", band_json(report.unattributed)},
          {"breaches", report.breaches}};
}

json comparison_json(const Comparison& comparison) {
  json rows = json::array();
  for (const auto& r : comparison.rows) {
    json deltas = json::object();
    for (const auto& d : r.deltas)
      deltas[d.metric] = {{"on", d.on}, {"off", d.off}, {"delta", d.delta}, {"relative_reduction", d.relative}};
    rows.push_back({{"index", r.index}, {"name", r.name}, {"verdict", to_string(r.verdict)}, {"deltas", deltas}});
  }
  return {{"comparison_key", comparison.comparison_key}, {"all_improved", comparison.all_improved()},
          {"structures", rows}};
}

}  // namespace codrill::scenario
