#include "fsc/csv.hpp"

#include <cmath>
#include <cstdio>

namespace fsc {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void write_failure_header(std::ostream& os, bool with_mc) {
    os << "kind,N,R_bits,rho_star,v_star,tau,i,j,value";
    if (with_mc) os << ",trials,stderr";
    os << "\n";
}

void write_failure_rows(std::ostream& os, const FailureBoundMatrix& bound, const CodeParams& code) {
    for (int i = 0; i < bound.values.rows(); ++i)
        for (int j = 0; j < bound.values.cols(); ++j)
            os << to_string(bound.kind) << ',' << code.N << ',' << format_number(code.R_bits) << ','
               << format_number(bound.rho_star(i, j)) << ',' << format_number(bound.v_star(i, j)) << ','
               << format_number(bound.tau) << ',' << i + 1 << ',' << j + 1 << ','
               << format_number(bound.values(i, j)) << "\n";
}

void write_exact_rows(std::ostream& os, const std::string& kind, const Matrix& values, const CodeParams& code,
                      double nu) {
    for (int i = 0; i < values.rows(); ++i)
        for (int j = 0; j < values.cols(); ++j)
            os << kind << ',' << code.N << ',' << format_number(code.R_bits) << ",,," << format_number(nu) << ','
               << i + 1 << ',' << j + 1 << ',' << format_number(values(i, j)) << "\n";
}

void write_mc_rows(std::ostream& os, const std::string& kind, const Matrix& values, const Matrix& stderr_values,
                   const CodeParams& code, double nu, std::int64_t trials) {
    for (int i = 0; i < values.rows(); ++i)
        for (int j = 0; j < values.cols(); ++j)
            os << kind << ',' << code.N << ',' << format_number(code.R_bits) << ",,," << format_number(nu) << ','
               << i + 1 << ',' << j + 1 << ',' << format_number(values(i, j)) << ',' << trials << ','
               << format_number(stderr_values(i, j)) << "\n";
}

void write_queue_header(std::ostream& os) {
    os << "N,R_bits,margin_kind,margin_value,threshold,tail_probability,drift,residual,status\n";
}

void write_queue_row(std::ostream& os, const CellResult& cell) {
    const bool solved = cell.status == CellStatus::ok || cell.status == CellStatus::unstable;
    os << cell.N << ',' << format_number(cell.R_bits) << ',' << (cell.kind == PipelineKind::exact ? "nu" : "tau")
       << ',' << format_number(cell.margin) << ',' << cell.threshold << ','
       << (solved ? format_number(cell.queue.tail) : "") << ',' << (solved ? format_number(cell.queue.drift) : "")
       << ',' << (solved ? format_number(cell.queue.residual) : "") << ',' << to_string(cell.status) << "\n";
}

void write_mc_queue_header(std::ostream& os) {
    os << "N,R_bits,margin_kind,margin_value,threshold,tail_probability,drift,residual,trials,stderr\n";
}

void write_mc_queue_rows(std::ostream& os, int N, double R_bits, const std::string& margin_kind, double margin,
                         const std::vector<double>& tail, const std::vector<double>& stderr_values,
                         std::int64_t trials) {
    for (std::size_t q = 0; q < tail.size(); ++q)
        os << N << ',' << format_number(R_bits) << ',' << margin_kind << ',' << format_number(margin) << ',' << q
           << ',' << format_number(tail[q]) << ",,," << trials << ',' << format_number(stderr_values[q]) << "\n";
}

void write_figure_header(std::ostream& os) { os << "x,series,curve,value,status\n"; }

void write_figure_row(std::ostream& os, const FigureRow& row) {
    os << format_number(row.x) << ',' << row.series << ',' << row.curve << ',' << format_number(row.value) << ','
       << row.status << "\n";
}

}  // namespace fsc
