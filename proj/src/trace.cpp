#include "hyperfast/trace.hpp"

#include <cstdio>

namespace hyperfast {

std::vector<std::string> trace_columns(bool components) {
    std::vector<std::string> cols = {"k",      "f",      "grad_norm", "step_radius",   "lambda",        "A",
                                     "inner_iters", "n_grad", "n_hess", "max_grad_norm", "max_hess_norm", "wall_ms"};
    if (components) {
        for (const char* c : {"n_grad_g", "n_hess_g", "n_grad_h", "n_hess_h"}) cols.emplace_back(c);
    }
    return cols;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TraceWriter::TraceWriter(std::ostream& out, bool components) : out_(out), components_(components) {}

void TraceWriter::header(const std::string& key, const std::string& value) {
    out_ << "# " << key << " = " << value << '\n';
}

void TraceWriter::columns() {
    const auto cols = trace_columns(components_);
    for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
    out_ << '\n';
    out_.flush();
}

void TraceWriter::row(const TraceRecord& r) {
    out_ << r.k << ',' << format_double(r.f) << ',' << format_double(r.grad_norm) << ','
         << format_double(r.step_radius) << ',' << format_double(r.lambda) << ',' << format_double(r.A) << ','
         << r.inner_iters << ',' << r.n_grad << ',' << r.n_hess << ',' << format_double(r.max_grad_norm) << ','
         << format_double(r.max_hess_norm) << ',' << format_double(r.wall_ms);
    if (components_) {
        const ComponentCounts c = r.components.value_or(ComponentCounts{});
        out_ << ',' << c.grad_g << ',' << c.hess_g << ',' << c.grad_h << ',' << c.hess_h;
    }
    out_ << '\n';
    out_.flush();
}

void TraceWriter::error_footer(const std::string& message) {
    out_ << "# error = " << message << '\n';
    out_.flush();
}

}  // namespace hyperfast
