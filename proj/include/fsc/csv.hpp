#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "fsc/bounds.hpp"
#include "fsc/montecarlo.hpp"
#include "fsc/pipeline.hpp"

namespace fsc {

// 12 significant digits; NaN as "nan".
std::string format_number(double x);

// Failure rows: kind, N, R_bits, rho_star, v_star, tau, i, j, value (states 1-based).
void write_failure_header(std::ostream& os, bool with_mc = false);
void write_failure_rows(std::ostream& os, const FailureBoundMatrix& bound, const CodeParams& code);
// Exact rows leave rho_star and v_star empty and carry the margin nu in the tau column.
void write_exact_rows(std::ostream& os, const std::string& kind, const Matrix& values, const CodeParams& code,
                      double nu);
void write_mc_rows(std::ostream& os, const std::string& kind, const Matrix& values, const Matrix& stderr_values,
                   const CodeParams& code, double nu, std::int64_t trials);

// Queue rows: N, R_bits, margin_kind, margin_value, threshold, tail_probability, drift, residual, status.
void write_queue_header(std::ostream& os);
void write_queue_row(std::ostream& os, const CellResult& cell);

// Simulated queue rows: the queue columns with trials and stderr; drift and residual left empty.
void write_mc_queue_header(std::ostream& os);
void write_mc_queue_rows(std::ostream& os, int N, double R_bits, const std::string& margin_kind, double margin,
                         const std::vector<double>& tail, const std::vector<double>& stderr_values,
                         std::int64_t trials);

// Figure rows: x, series, curve, value, status.
void write_figure_header(std::ostream& os);
void write_figure_row(std::ostream& os, const FigureRow& row);

}  // namespace fsc
