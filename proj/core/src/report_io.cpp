#include <cmath>

#include "fxt/harness.hpp"
#include "json.hpp"

namespace fxt {

namespace {

using nlohmann::ordered_json;

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

template <typename T>
ordered_json optional_number(const std::optional<T>& v) {
  return v ? number_or_null(static_cast<double>(*v)) : ordered_json();
}

ordered_json bound_json(const SettlingBound& b) {
  ordered_json inputs = ordered_json::object();
  for (const auto& [key, value] : b.inputs) inputs[key] = number_or_null(value);
  return {{"tag", std::string(to_string(b.tag))},
          {"value", number_or_null(b.value)},
          {"as_printed", b.as_printed},
          {"certificate", b.certificate},
          {"inputs", std::move(inputs)}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  ordered_json runs = ordered_json::array();
  for (const auto& r : report.runs) {
    ordered_json bounds = ordered_json::array();
    for (const auto& b : r.bounds) {
      ordered_json entry = bound_json(b.bound);
      entry["compared_time"] = number_or_null(b.compared_time);
      entry["dominance"] = dominates(b, report.slack);
      bounds.push_back(std::move(entry));
    }
    ordered_json lyap;
    if (r.lyapunov) {
      lyap = {{"n_samples", r.lyapunov->n_samples},
              {"max_violation", number_or_null(r.lyapunov->max_violation)},
              {"max_abs_deviation", number_or_null(r.lyapunov->max_abs_deviation)},
              {"tolerance", number_or_null(r.lyapunov->tolerance)},
              {"pass", r.lyapunov->pass}};
    }
    ordered_json x0 = ordered_json::array();
    for (double v : r.x0.values()) x0.push_back(number_or_null(v));
    runs.push_back({{"index", r.index},
                    {"x0", std::move(x0)},
                    {"x0_norm", number_or_null(r.x0_norm)},
                    {"settle_time", optional_number(r.settle_time)},
                    {"stop_reason", r.stop_reason ? ordered_json(std::string(to_string(*r.stop_reason)))
                                                  : ordered_json()},
                    {"final_time", number_or_null(r.final_time)},
                    {"final_grad_norm", number_or_null(r.final_grad_norm)},
                    {"dual_settle_time", optional_number(r.dual_settle_time)},
                    {"bounds", std::move(bounds)},
                    {"lyapunov_check", std::move(lyap)},
                    {"error", r.error},
                    {"csv", r.csv_path},
                    {"pass", run_passes(r, report.slack)}});
  }
  const auto fixed = report.fixed_time_bound();
  const auto uniform = report.uniformity();
  ordered_json doc = {
      {"name", report.name},
      {"problem", report.problem},
      {"flow", report.flow},
      {"lyapunov", std::string(to_string(report.lyapunov))},
      {"slack", report.slack},
      {"runs", std::move(runs)},
      {"aggregate",
       {{"max_settle_time", number_or_null(report.max_settle_time())},
        {"fixed_time_bound", fixed ? bound_json(*fixed) : ordered_json()},
        {"uniformity", uniform ? ordered_json(*uniform) : ordered_json()},
        {"pass", report.all_pass()}}}};
  return doc.dump(2);
}

}  // namespace fxt
