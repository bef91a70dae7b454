#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsc/bounds.hpp"
#include "fsc/channel.hpp"
#include "fsc/exact.hpp"
#include "fsc/occupation.hpp"
#include "fsc/queueing.hpp"

namespace fsc {

enum class PipelineKind { bound, exact };

// How a per-use two-state chain maps to the unit-interval generator of one block.
enum class RateConvention {
    linear,    // mu = N alpha, xi = N beta
    generator  // exp(Q / N) reproduces the per-use transition matrix
};

// Occupation law used by the bound pipeline.
enum class BoundForm { integral, discrete, gallager };

enum class DecoderKind { ml, md };

std::string to_string(PipelineKind kind);
std::string to_string(RateConvention convention);
std::string to_string(BoundForm form);
PipelineKind parse_pipeline_kind(const std::string& text);
RateConvention parse_rate_convention(const std::string& text);
BoundForm parse_bound_form(const std::string& text);
TiltPolicy parse_tilt_policy(const std::string& text);
DecoderKind parse_decoder_kind(const std::string& text);

struct ChannelParams {
    double alpha = 0.0533;
    double beta = 0.08;
    double eps1 = 0.01;
    double eps2 = 0.1;
    RateConvention convention = RateConvention::linear;
};

FscSpec discrete_spec(const ChannelParams& channel);
GeneratorRates block_rates(const ChannelParams& channel, int N);
ContinuousOccupancyLaw rare_law(const ChannelParams& channel, int N);
ShiftedBound bound_form(const ChannelParams& channel, const CodeParams& code, BoundForm form);

struct PipelineOptions {
    PipelineKind kind = PipelineKind::exact;
    DecoderKind decoder = DecoderKind::ml;
    BoundForm form = BoundForm::integral;
    TiltPolicy tilt = TiltPolicy::forney;
    double target = 1e-5;
    double tau_step = 0.001;
    double tau_max = 1.0;
    int nu_max = 0;  // 0 selects the largest meaningful radius
    double rho_step = 0.01;
};

struct CellFailure {
    Matrix failure;
    Matrix undetected;
    double margin = 0.0;
};

// Failure and undetected matrices of the selected pipeline at a fixed margin (nu or tau).
CellFailure failure_at_margin(const ChannelParams& channel, const CodeParams& code, double margin,
                              const PipelineOptions& options);

struct MarginSelection {
    PipelineKind kind = PipelineKind::exact;
    double value = 0.0;
    bool feasible = false;
    double max_undetected = 1.0;
    int evaluations = 0;
};

// Smallest margin on the pipeline grid with max_{i,j} undetected <= target.
MarginSelection select_margin(const ChannelParams& channel, const CodeParams& code, const PipelineOptions& options);

enum class CellStatus { ok, unstable, infeasible, skipped, error };
std::string to_string(CellStatus status);

struct CellResult {
    int N = 0;
    double R_bits = 0.0;
    PipelineKind kind = PipelineKind::exact;
    double margin = 0.0;
    int threshold = 0;
    CellStatus status = CellStatus::ok;
    std::string message;
    QueueResult queue;
    Matrix failure;
};

struct RunConfig {
    ChannelParams channel;
    std::vector<int> N_list{170};
    std::vector<double> R_list{0.5};
    PipelineOptions pipeline;
    std::optional<double> fixed_margin;
    TrafficSpec traffic{1.0 / 575.0, 0.0};
    int threshold = 5;
    bool allow_fractional = false;
    std::string csv_path;
    std::string json_path;
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 uses the hardware concurrency
};

void validate(const RunConfig& config);

// Margin selection (or the fixed margin), failure matrices, success matrix and queue tail for one cell.
CellResult evaluate_cell(const RunConfig& config, int N, double R_bits);

struct SweepResult {
    std::vector<CellResult> cells;
    std::optional<std::size_t> argmin;
    int failed = 0;
};

SweepResult run_sweep(const RunConfig& config);

std::string sweep_summary_json(const RunConfig& config, const SweepResult& result);

struct Anchor {
    int N = 170;
    double R_bits = 0.5;
    double margin = 8.0;
    int threshold = 5;
    double published_tail = 0.0528228675840124;
};

struct Calibration {
    double p_geo = 0.0;
    double tail = 0.0;
    double relative_residual = 1.0;
    bool converged = false;
    bool degenerate = false;
};

// Bisection on log p_geo; the queue tail decreases in p_geo.
Calibration calibrate_traffic(const RunConfig& config, const Anchor& anchor);

struct FigureRow {
    double x = 0.0;
    int series = 0;
    std::string curve;
    double value = 0.0;
    std::string status;
};

// Figures 2 and 3: failure probabilities; figures 4 and 5: queue tails from the bound and exact pipelines.
std::vector<FigureRow> emit_figure_data(int figure_id, const RunConfig& config);

// Default grid and pipeline of a figure.
RunConfig figure_config(int figure_id, const RunConfig& base);

std::vector<double> rate_grid(double lo, double hi, double step);

}  // namespace fsc
