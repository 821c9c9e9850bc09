#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hyperfast {

/// Per-component counters, present only in sliding traces.
struct ComponentCounts {
    std::uint64_t grad_g = 0;
    std::uint64_t hess_g = 0;
    std::uint64_t grad_h = 0;
    std::uint64_t hess_h = 0;
};

/// One row per outer iteration. Counters are cumulative; max_grad_norm and
/// max_hess_norm are running maxima over every oracle query so far.
struct TraceRecord {
    int k = 0;
    double f = 0.0;
    double grad_norm = 0.0;
    double step_radius = 0.0;
    double lambda = 0.0;
    double A = 0.0;
    int inner_iters = 0;
    std::uint64_t n_grad = 0;
    std::uint64_t n_hess = 0;
    double max_grad_norm = 0.0;
    double max_hess_norm = 0.0;
    double wall_ms = 0.0;
    std::optional<ComponentCounts> components;
};

using Trace = std::vector<TraceRecord>;

/// Column names in TraceRecord field order, with the sliding counters appended
/// when `components` is true.
std::vector<std::string> trace_columns(bool components);

/// Writes "# key = value" header lines, the column row, then one row per
/// record with 17 significant digits.
class TraceWriter {
  public:
    TraceWriter(std::ostream& out, bool components);

    void header(const std::string& key, const std::string& value);
    void columns();
    void row(const TraceRecord& rec);
    void error_footer(const std::string& message);

  private:
    std::ostream& out_;
    bool components_;
};

std::string format_double(double v);

}  // namespace hyperfast
