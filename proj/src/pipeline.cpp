#include "fsc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "fsc/error.hpp"

namespace fsc {

std::string to_string(PipelineKind kind) { return kind == PipelineKind::bound ? "bound" : "exact"; }

std::string to_string(RateConvention convention) {
    return convention == RateConvention::linear ? "linear" : "generator";
}

std::string to_string(BoundForm form) {
    switch (form) {
        case BoundForm::integral: return "integral";
        case BoundForm::discrete: return "discrete";
        case BoundForm::gallager: return "gallager";
    }
    return "integral";
}

std::string to_string(CellStatus status) {
    switch (status) {
        case CellStatus::ok: return "ok";
        case CellStatus::unstable: return "unstable";
        case CellStatus::infeasible: return "infeasible";
        case CellStatus::skipped: return "skipped";
        case CellStatus::error: return "error";
    }
    return "error";
}

PipelineKind parse_pipeline_kind(const std::string& text) {
    if (text == "bound") return PipelineKind::bound;
    if (text == "exact") return PipelineKind::exact;
    throw Error("unknown pipeline '" + text + "' (expected bound or exact)");
}

RateConvention parse_rate_convention(const std::string& text) {
    if (text == "linear") return RateConvention::linear;
    if (text == "generator") return RateConvention::generator;
    throw Error("unknown rate convention '" + text + "' (expected linear or generator)");
}

BoundForm parse_bound_form(const std::string& text) {
    if (text == "integral") return BoundForm::integral;
    if (text == "discrete") return BoundForm::discrete;
    if (text == "gallager") return BoundForm::gallager;
    throw Error("unknown bound form '" + text + "' (expected integral, discrete or gallager)");
}

TiltPolicy parse_tilt_policy(const std::string& text) {
    if (text == "forney") return TiltPolicy::forney;
    if (text == "joint") return TiltPolicy::joint;
    throw Error("unknown tilt policy '" + text + "' (expected forney or joint)");
}

DecoderKind parse_decoder_kind(const std::string& text) {
    if (text == "ml") return DecoderKind::ml;
    if (text == "md") return DecoderKind::md;
    throw Error("unknown decoder '" + text + "' (expected ml or md)");
}

FscSpec discrete_spec(const ChannelParams& channel) {
    return build_gilbert_elliott(channel.alpha, channel.beta, channel.eps1, channel.eps2);
}

GeneratorRates block_rates(const ChannelParams& channel, int N) {
    if (channel.convention == RateConvention::generator)
        return generator_from_discrete(channel.alpha, channel.beta, N);
    return {N * channel.alpha, N * channel.beta};
}

ContinuousOccupancyLaw rare_law(const ChannelParams& channel, int N) {
    GeneratorRates r = block_rates(channel, N);
    return continuous_occupancy_law(r.mu, r.xi);
}

ShiftedBound bound_form(const ChannelParams& channel, const CodeParams& code, BoundForm form) {
    FscSpec spec = discrete_spec(channel);
    switch (form) {
        case BoundForm::integral: return integral_form(rare_law(channel, code.N), spec, code);
        case BoundForm::discrete:
            return discrete_form(discrete_occupancy_law(channel.alpha, channel.beta, code.N), spec, code);
        case BoundForm::gallager: return gallager_form(spec, code);
    }
    throw Error("unknown bound form");
}

namespace {

DecoderRule decoder_rule(const FscSpec& spec, const PipelineOptions& options, double nu) {
    return options.decoder == DecoderKind::ml ? ml_rule(spec, nu) : md_rule(nu);
}

// Largest weighted distance; margins beyond it leave no undetected errors.
int largest_radius(const FscSpec& spec, const CodeParams& code, const PipelineOptions& options) {
    double gamma = decoder_rule(spec, options, 0.0).gamma;
    return static_cast<int>(std::ceil(std::max(gamma, 1.0) * code.N)) + 1;
}

}  // namespace

CellFailure failure_at_margin(const ChannelParams& channel, const CodeParams& code, double margin,
                              const PipelineOptions& options) {
    require(margin >= 0.0, "margin must be nonnegative");
    CellFailure out;
    out.margin = margin;
    if (options.kind == PipelineKind::exact) {
        FscSpec spec = discrete_spec(channel);
        ExactFailureMatrix m = exact_failure(spec, code, decoder_rule(spec, options, margin));
        out.failure = m.failure;
        out.undetected = m.undetected;
        return out;
    }
    MarginBounds m = undetected_and_error_bounds(bound_form(channel, code, options.form), 2, margin, options.tilt,
                                                 options.target, options.rho_step);
    out.failure = m.failure.values;
    out.undetected = m.undetected.values;
    return out;
}

MarginSelection select_margin(const ChannelParams& channel, const CodeParams& code, const PipelineOptions& options) {
    require(options.target > 0.0 && options.target <= 1.0, "target must lie in (0, 1]");
    MarginSelection sel;
    sel.kind = options.kind;
    const bool exact = options.kind == PipelineKind::exact;
    const double unit = exact ? 1.0 : options.tau_step;
    require(unit > 0.0, "margin grid step must be positive");
    long long kmax = exact ? (options.nu_max > 0 ? options.nu_max
                                                 : largest_radius(discrete_spec(channel), code, options))
                           : std::llround(options.tau_max / options.tau_step);
    auto undetected_at = [&](long long k) {
        ++sel.evaluations;
        return failure_at_margin(channel, code, k * unit, options).undetected.maxCoeff();
    };
    double u = undetected_at(0);
    if (u <= options.target) {
        sel.feasible = true;
        sel.value = 0.0;
        sel.max_undetected = u;
        return sel;
    }
    // Exponential search for a feasible grid index, then bisection.
    long long lo = 0, hi = 1;
    double u_hi = 1.0;
    while (true) {
        hi = std::min(hi, kmax);
        u_hi = undetected_at(hi);
        if (u_hi <= options.target) break;
        if (hi == kmax) {
            sel.feasible = false;
            sel.value = hi * unit;
            sel.max_undetected = u_hi;
            return sel;
        }
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        long long mid = lo + (hi - lo) / 2;
        double um = undetected_at(mid);
        if (um <= options.target) {
            hi = mid;
            u_hi = um;
        } else {
            lo = mid;
        }
    }
    sel.feasible = true;
    sel.value = hi * unit;
    sel.max_undetected = u_hi;
    return sel;
}

void validate(const RunConfig& config) {
    require(!config.N_list.empty() && !config.R_list.empty(), "code grid is empty");
    for (int N : config.N_list) require(N >= 1, "block lengths must be positive");
    for (double R : config.R_list) require(R > 0.0 && R < 1.0, "code rates must lie in (0, 1)");
    require(config.traffic.lambda >= 0.0, "arrival rate must be nonnegative");
    require(config.traffic.p_geo > 0.0 && config.traffic.p_geo < 1.0,
            "p_geo must lie in (0, 1); set traffic.p_geo or run calibrate");
    require(config.threshold >= 0, "threshold must be nonnegative");
    require(config.pipeline.target > 0.0 && config.pipeline.target <= 1.0, "target must lie in (0, 1]");
}

CellResult evaluate_cell(const RunConfig& config, int N, double R_bits) {
    CellResult cell;
    cell.N = N;
    cell.R_bits = R_bits;
    cell.kind = config.pipeline.kind;
    cell.threshold = config.threshold;
    if (!config.allow_fractional && !integral_payload(N, R_bits)) {
        cell.status = CellStatus::skipped;
        cell.message = "N * R_bits is not an integer";
        return cell;
    }
    try {
        CodeParams code = make_code(N, R_bits, config.allow_fractional);
        double margin = 0.0;
        if (config.fixed_margin) {
            margin = *config.fixed_margin;
        } else {
            MarginSelection sel = select_margin(config.channel, code, config.pipeline);
            margin = sel.value;
            if (!sel.feasible) {
                cell.margin = margin;
                cell.status = CellStatus::infeasible;
                cell.message = "no margin reaches the undetected-error target";
                return cell;
            }
        }
        cell.margin = margin;
        CellFailure f = failure_at_margin(config.channel, code, margin, config.pipeline);
        cell.failure = f.failure;
        FscSpec spec = discrete_spec(config.channel);
        Matrix PN = block_transition(spec, N);
        SuccessMatrix s = success_from_failure(PN, f.failure, to_string(config.pipeline.kind));
        cell.queue = solve_queue_tail(s, PN, config.traffic, R_bits, N, config.threshold);
        cell.status = cell.queue.stable ? CellStatus::ok : CellStatus::unstable;
    } catch (const std::exception& e) {
        cell.status = CellStatus::error;
        cell.message = e.what();
    }
    return cell;
}

SweepResult run_sweep(const RunConfig& config) {
    validate(config);
    std::vector<std::pair<int, double>> grid;
    for (int N : config.N_list)
        for (double R : config.R_list) grid.emplace_back(N, R);
    SweepResult out;
    out.cells.resize(grid.size());
    int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::min<int>(jobs, static_cast<int>(grid.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < grid.size(); k = next++)
            out.cells[k] = evaluate_cell(config, grid[k].first, grid[k].second);
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < out.cells.size(); ++k) {
        const CellResult& c = out.cells[k];
        if (c.status == CellStatus::error || c.status == CellStatus::infeasible) ++out.failed;
        if (c.status == CellStatus::skipped)
            std::cerr << "warning: skipping N=" << c.N << " R=" << c.R_bits << ": " << c.message << "\n";
        if (c.status == CellStatus::ok && c.queue.tail < best) {
            best = c.queue.tail;
            out.argmin = k;
        }
    }
    return out;
}

std::string sweep_summary_json(const RunConfig& config, const SweepResult& result) {
    nlohmann::json j;
    j["pipeline"] = to_string(config.pipeline.kind);
    j["threshold"] = config.threshold;
    j["lambda"] = config.traffic.lambda;
    j["p_geo"] = config.traffic.p_geo;
    j["cells"] = result.cells.size();
    j["failed_cells"] = result.failed;
    if (result.argmin) {
        const CellResult& c = result.cells[*result.argmin];
        j["argmin"] = {{"N", c.N}, {"R_bits", c.R_bits}, {"margin", c.margin}, {"tail_probability", c.queue.tail}};
    } else {
        j["argmin"] = nullptr;
    }
    nlohmann::json flagged = nlohmann::json::array();
    for (const auto& c : result.cells)
        if (c.status != CellStatus::ok)
            flagged.push_back({{"N", c.N}, {"R_bits", c.R_bits}, {"status", to_string(c.status)}, {"message", c.message}});
    j["flagged"] = flagged;
    return j.dump(2);
}

Calibration calibrate_traffic(const RunConfig& config, const Anchor& anchor) {
    require(anchor.published_tail >= 0.0 && anchor.published_tail <= 1.0, "published tail must be a probability");
    Calibration out;
    CodeParams code = make_code(anchor.N, anchor.R_bits, true);
    FscSpec spec = discrete_spec(config.channel);
    Matrix PN = block_transition(spec, anchor.N);
    CellFailure f = failure_at_margin(config.channel, code, anchor.margin, config.pipeline);
    SuccessMatrix s = success_from_failure(PN, f.failure, to_string(config.pipeline.kind));
    auto tail_at = [&](double p) {
        TrafficSpec t{config.traffic.lambda, p};
        return solve_queue_tail(s, PN, t, anchor.R_bits, anchor.N, anchor.threshold).tail;
    };
    if (config.traffic.lambda == 0.0) {
        out.degenerate = true;
        out.p_geo = 0.5;
        out.tail = tail_at(out.p_geo);
        out.relative_residual = anchor.published_tail == 0.0 ? 0.0 : 1.0;
        out.converged = out.tail == anchor.published_tail;
        return out;
    }
    double lo = std::log(1e-9), hi = std::log1p(-1e-12);
    double t_lo = tail_at(std::exp(lo)), t_hi = tail_at(std::exp(hi));
    const double target = anchor.published_tail;
    if (target > t_lo || target < t_hi) {
        double p = target > t_lo ? std::exp(lo) : std::exp(hi);
        out.p_geo = p;
        out.tail = tail_at(p);
        out.relative_residual = target > 0.0 ? std::abs(out.tail - target) / target : out.tail;
        return out;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (tail_at(std::exp(mid)) > target)
            lo = mid;
        else
            hi = mid;
    }
    double p_lo = std::exp(lo), p_hi = std::exp(hi);
    double a = tail_at(p_lo), b = tail_at(p_hi);
    out.p_geo = std::abs(a - target) <= std::abs(b - target) ? p_lo : p_hi;
    out.tail = std::abs(a - target) <= std::abs(b - target) ? a : b;
    out.relative_residual = target > 0.0 ? std::abs(out.tail - target) / target : out.tail;
    out.converged = out.relative_residual <= 0.005;
    return out;
}

std::vector<double> rate_grid(double lo, double hi, double step) {
    require(step > 0.0 && hi >= lo, "invalid rate grid");
    std::vector<double> out;
    const long long n = std::llround((hi - lo) / step);
    for (long long k = 0; k <= n; ++k) out.push_back(std::round((lo + k * step) * 1e12) / 1e12);
    return out;
}

RunConfig figure_config(int figure_id, const RunConfig& base) {
    RunConfig c = base;
    c.R_list = rate_grid(0.25, 0.75, 0.05);
    switch (figure_id) {
        case 2: c.N_list = {50, 75, 100}; break;
        case 3: c.N_list = {50, 75}; break;
        case 4:
            c.N_list = {75, 125, 170, 225, 275, 325, 375};
            c.pipeline.kind = PipelineKind::bound;
            break;
        case 5:
            c.N_list = {75, 125, 170, 225};
            c.pipeline.kind = PipelineKind::exact;
            break;
        default: throw Error("unknown figure id " + std::to_string(figure_id) + " (expected 2, 3, 4 or 5)");
    }
    return c;
}

namespace {

double averaged(const Matrix& values, const Matrix& P) { return state_average(values, stationary_distribution(P)); }

// Figure 2 channel: about four transitions per block, 1 -> 2 at rate 4 and 2 -> 1 at rate 6.
constexpr double kFig2Mu = 4.0;
constexpr double kFig2Xi = 6.0;

std::vector<FigureRow> failure_figure(int figure_id, const RunConfig& c) {
    std::vector<FigureRow> rows;
    for (int N : c.N_list) {
        for (double R : c.R_list) {
            CodeParams code = make_code(N, R, true);
            auto push = [&](const std::string& curve, double v) { rows.push_back({R, N, curve, v, "ok"}); };
            if (figure_id == 2) {
                double alpha = kFig2Mu / N, beta = kFig2Xi / N;
                FscSpec spec = build_gilbert_elliott(alpha, beta, c.channel.eps1, c.channel.eps2);
                FailureBoundMatrix g = optimize_entries(BoundKind::gallager_matrix, gallager_form(spec, code), 2,
                                                        c.pipeline.rho_step);
                push("gallager", averaged(g.values, spec.P()));
                FailureBoundMatrix r =
                    optimize_entries(BoundKind::rare_transition,
                                     integral_form(continuous_occupancy_law(kFig2Mu, kFig2Xi), spec, code), 2,
                                     c.pipeline.rho_step);
                push("rare", averaged(r.values, spec.P()));
            } else {
                FscSpec spec = discrete_spec(c.channel);
                push("ml", averaged(failure_matrix_exact(spec, code, ml_rule(spec)), spec.P()));
                push("md", averaged(failure_matrix_exact(spec, code, md_rule()), spec.P()));
                FailureBoundMatrix r = optimize_entries(
                    BoundKind::rare_transition, integral_form(rare_law(c.channel, N), spec, code), 2,
                    c.pipeline.rho_step);
                push("rare", averaged(r.values, spec.P()));
            }
        }
    }
    return rows;
}

}  // namespace

std::vector<FigureRow> emit_figure_data(int figure_id, const RunConfig& config) {
    if (figure_id == 2 || figure_id == 3) return failure_figure(figure_id, config);
    require(figure_id == 4 || figure_id == 5, "unknown figure id " + std::to_string(figure_id));
    SweepResult sweep = run_sweep(config);
    std::vector<FigureRow> rows;
    const std::string curve = figure_id == 4 ? "bound_tail" : "exact_tail";
    for (const auto& cell : sweep.cells) {
        if (cell.status == CellStatus::skipped) continue;
        double v = cell.status == CellStatus::ok || cell.status == CellStatus::unstable
                       ? cell.queue.tail
                       : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({cell.R_bits, cell.N, curve, v, to_string(cell.status)});
    }
    return rows;
}

}  // namespace fsc
