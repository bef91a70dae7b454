#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fsc/bounds.hpp"
#include "fsc/channel.hpp"
#include "fsc/config.hpp"
#include "fsc/csv.hpp"
#include "fsc/error.hpp"
#include "fsc/exact.hpp"
#include "fsc/montecarlo.hpp"
#include "fsc/occupation.hpp"
#include "fsc/pipeline.hpp"
#include "fsc/queueing.hpp"

namespace {

using namespace fsc;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

// Options shared by every subcommand: configuration file, overrides and channel parameters.
struct Common {
    std::string config_path;
    std::vector<std::string> settings;
    std::optional<double> alpha, beta, eps1, eps2, p_geo, lambda, target;
    std::optional<std::string> convention, pipeline, decoder, form, tilt;
    std::optional<int> jobs, threshold;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "configuration file ([section] key = value)");
        app->add_option("--set", settings, "override, e.g. traffic.p_geo=0.007 (repeatable)");
        app->add_option("--alpha", alpha, "P(state 1 -> state 2) per channel use");
        app->add_option("--beta", beta, "P(state 2 -> state 1) per channel use");
        app->add_option("--eps1", eps1, "crossover probability in state 1");
        app->add_option("--eps2", eps2, "crossover probability in state 2");
        app->add_option("--convention", convention, "block generator convention: linear | generator");
        app->add_option("--pipeline", pipeline, "margin pipeline: exact | bound");
        app->add_option("--decoder", decoder, "exact decoder: ml | md");
        app->add_option("--bound-form", form, "bound occupation law: integral | discrete | gallager");
        app->add_option("--tilt", tilt, "margin tilt: forney | joint");
        app->add_option("--target", target, "undetected-error target");
        app->add_option("--p-geo", p_geo, "geometric packet-length parameter per bit");
        app->add_option("--lambda", lambda, "packet arrival rate per channel use");
        app->add_option("--threshold", threshold, "queue threshold q in Pr(Q > q)");
        app->add_option("--jobs", jobs, "worker threads");
        app->add_option("--seed", seed, "random seed");
    }

    RunConfig resolve() const {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const auto& s : settings) apply_setting(c, s);
        if (alpha) c.channel.alpha = *alpha;
        if (beta) c.channel.beta = *beta;
        if (eps1) c.channel.eps1 = *eps1;
        if (eps2) c.channel.eps2 = *eps2;
        if (convention) c.channel.convention = parse_rate_convention(*convention);
        if (pipeline) c.pipeline.kind = parse_pipeline_kind(*pipeline);
        if (decoder) c.pipeline.decoder = parse_decoder_kind(*decoder);
        if (form) c.pipeline.form = parse_bound_form(*form);
        if (tilt) c.pipeline.tilt = parse_tilt_policy(*tilt);
        if (target) c.pipeline.target = *target;
        if (p_geo) c.traffic.p_geo = *p_geo;
        if (lambda) c.traffic.lambda = *lambda;
        if (threshold) c.threshold = *threshold;
        if (jobs) c.jobs = *jobs;
        if (seed) c.seed = *seed;
        return c;
    }
};

struct Cell {
    int N = 170;
    double R = 0.5;
    bool allow_fractional = false;

    void attach(CLI::App* app) {
        app->add_option("-N,--block-length", N, "block length N")->check(CLI::PositiveNumber);
        app->add_option("-R,--rate", R, "code rate in bits per channel use")->check(CLI::Range(0.0, 1.0));
        app->add_flag("--allow-fractional", allow_fractional, "accept a non-integer payload N * R");
    }
    CodeParams code() const { return make_code(N, R, allow_fractional); }
};

// Output stream that is either stdout or a file.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            require(static_cast<bool>(*file_), "cannot open output file " + path);
        }
    }
    std::ostream& get() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

int channel_info(const RunConfig& c, int N) {
    FscSpec spec = discrete_spec(c.channel);
    json j = json::parse(spec_to_json(spec));
    Vector pi = stationary_distribution(spec.P());
    j["stationary"] = {pi(0), pi(1)};
    j["csi_capacity_bits"] = csi_capacity(spec);
    j["ml_gamma"] = ml_gamma(c.channel.eps1, c.channel.eps2);
    j["block_length"] = N;
    j["block_transition"] = matrix_json(block_transition(spec, N));
    GeneratorRates lin{N * c.channel.alpha, N * c.channel.beta};
    GeneratorRates gen = generator_from_discrete(c.channel.alpha, c.channel.beta, N);
    j["rates_linear"] = {{"mu", lin.mu}, {"xi", lin.xi}};
    j["rates_generator"] = {{"mu", gen.mu}, {"xi", gen.xi}};
    std::cout << j.dump(2) << "\n";
    return kOk;
}

int bound_cmd(const std::string& kind, const RunConfig& c, const Cell& cell, std::optional<double> rho,
              std::optional<double> tau, std::optional<double> mu, std::optional<double> xi) {
    CodeParams code = cell.code();
    FscSpec spec = discrete_spec(c.channel);
    ShiftedBound form;
    BoundKind bk;
    if (kind == "gallager") {
        form = gallager_form(spec, code);
        bk = BoundKind::gallager_matrix;
    } else if (kind == "type-sum") {
        form = discrete_form(discrete_occupancy_law(c.channel.alpha, c.channel.beta, code.N), spec, code);
        bk = BoundKind::type_sum;
    } else {
        GeneratorRates r = block_rates(c.channel, code.N);
        if (mu) r.mu = *mu;
        if (xi) r.xi = *xi;
        form = integral_form(continuous_occupancy_law(r.mu, r.xi), spec, code);
        bk = BoundKind::rare_transition;
    }
    write_failure_header(std::cout);
    if (tau) {
        MarginBounds m = undetected_and_error_bounds(form, 2, *tau, c.pipeline.tilt, c.pipeline.target,
                                                     c.pipeline.rho_step);
        write_failure_rows(std::cout, m.undetected, code);
        write_failure_rows(std::cout, m.failure, code);
        return kOk;
    }
    FailureBoundMatrix out;
    if (rho) {
        out.kind = bk;
        out.values = Matrix::Zero(2, 2);
        out.rho_star = Matrix::Constant(2, 2, *rho);
        out.v_star = Matrix::Zero(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.values(i, j) = form(*rho, 0.0, i, j);
    } else {
        out = optimize_entries(bk, form, 2, c.pipeline.rho_step);
    }
    write_failure_rows(std::cout, out, code);
    std::cerr << "state-averaged: " << format_number(state_average(out.values, stationary_distribution(spec.P())))
              << "\n";
    return kOk;
}

int exact_cmd(const std::string& kind, const RunConfig& c, const Cell& cell, double nu) {
    CodeParams code = cell.code();
    FscSpec spec = discrete_spec(c.channel);
    DecoderRule rule = kind == "md" || (kind == "undetected" && c.pipeline.decoder == DecoderKind::md)
                           ? md_rule(nu)
                           : ml_rule(spec, nu);
    ExactFailureMatrix m = exact_failure(spec, code, rule);
    write_failure_header(std::cout);
    if (kind == "undetected")
        write_exact_rows(std::cout, "exact_undetected", m.undetected, code, nu);
    else
        write_exact_rows(std::cout, kind == "ml" ? "exact_ml" : "exact_md", m.failure, code, nu);
    const Matrix& v = kind == "undetected" ? m.undetected : m.failure;
    std::cerr << "state-averaged: " << format_number(state_average(v, stationary_distribution(spec.P()))) << "\n";
    return kOk;
}

int margin_cmd(const RunConfig& c, const Cell& cell) {
    MarginSelection s = select_margin(c.channel, cell.code(), c.pipeline);
    json j{{"pipeline", to_string(s.kind)},
           {"N", cell.N},
           {"R_bits", cell.R},
           {"margin_kind", s.kind == PipelineKind::exact ? "nu" : "tau"},
           {"margin_value", s.value},
           {"feasible", s.feasible},
           {"max_undetected", s.max_undetected},
           {"target", c.pipeline.target},
           {"evaluations", s.evaluations}};
    std::cout << j.dump(2) << "\n";
    return s.feasible ? kOk : kPartial;
}

int queue_cmd(RunConfig c, const Cell& cell, std::optional<double> margin) {
    if (margin) c.fixed_margin = margin;
    c.allow_fractional = cell.allow_fractional;
    c.N_list = {cell.N};
    c.R_list = {cell.R};
    validate(c);
    CellResult r = evaluate_cell(c, cell.N, cell.R);
    write_queue_header(std::cout);
    write_queue_row(std::cout, r);
    if (r.status == CellStatus::error || r.status == CellStatus::infeasible || r.status == CellStatus::skipped) {
        std::cerr << "cell " << to_string(r.status) << ": " << r.message << "\n";
        return kPartial;
    }
    return kOk;
}

SuccessMatrix cell_success(const RunConfig& c, const CodeParams& code, double margin, PipelineKind kind) {
    PipelineOptions opt = c.pipeline;
    opt.kind = kind;
    CellFailure f = failure_at_margin(c.channel, code, margin, opt);
    Matrix PN = block_transition(discrete_spec(c.channel), code.N);
    return success_from_failure(PN, f.failure, to_string(kind));
}

double selected_margin(const RunConfig& c, const CodeParams& code, PipelineKind kind) {
    PipelineOptions opt = c.pipeline;
    opt.kind = kind;
    MarginSelection s = select_margin(c.channel, code, opt);
    require(s.feasible, "no " + to_string(kind) + " margin reaches the target");
    return s.value;
}

int mc_code_cmd(const RunConfig& c, const Cell& cell, double nu, std::int64_t trials) {
    CodeParams code = cell.code();
    FscSpec spec = discrete_spec(c.channel);
    DecoderRule rule = c.pipeline.decoder == DecoderKind::md ? md_rule(nu) : ml_rule(spec, nu);
    CodeSimulation sim = simulate_random_code_failure(spec, code, rule, SimConfig{c.seed, trials, 0});
    write_failure_header(std::cout, true);
    std::string kind = c.pipeline.decoder == DecoderKind::md ? "mc_md" : "mc_ml";
    write_mc_rows(std::cout, kind, sim.failure, sim.failure_stderr, code, nu, trials);
    write_mc_rows(std::cout, "mc_undetected", sim.undetected, sim.undetected_stderr, code, nu, trials);
    return kOk;
}

int mc_queue_cmd(const RunConfig& c, const Cell& cell, std::optional<double> margin, const QueueSimOptions& opt) {
    validate(c);
    CodeParams code = cell.code();
    double m = margin ? *margin : selected_margin(c, code, c.pipeline.kind);
    SuccessMatrix s = cell_success(c, code, m, c.pipeline.kind);
    Matrix PN = block_transition(discrete_spec(c.channel), code.N);
    double rho_r = completion_probability(c.traffic.p_geo, code.R_bits, code.N);
    QueueSimulation sim = simulate_queue(s, PN, c.traffic, rho_r, code.N, opt, SimConfig{c.seed, opt.steps, 0});
    write_mc_queue_header(std::cout);
    write_mc_queue_rows(std::cout, code.N, code.R_bits, c.pipeline.kind == PipelineKind::exact ? "nu" : "tau", m,
                        sim.tail, sim.tail_stderr, opt.steps);
    return kOk;
}

int mc_dominance_cmd(const RunConfig& c, const Cell& cell, const QueueSimOptions& opt) {
    validate(c);
    CodeParams code = cell.code();
    SuccessMatrix exact = cell_success(c, code, selected_margin(c, code, PipelineKind::exact), PipelineKind::exact);
    SuccessMatrix bound = cell_success(c, code, selected_margin(c, code, PipelineKind::bound), PipelineKind::bound);
    Matrix PN = block_transition(discrete_spec(c.channel), code.N);
    double rho_r = completion_probability(c.traffic.p_geo, code.R_bits, code.N);
    DominanceReport rep =
        coupled_dominance_experiment(exact, bound, PN, c.traffic, rho_r, code.N, opt, SimConfig{c.seed, opt.steps, 0});
    std::cout << "threshold,tail_exact,tail_bound,steps,violations\n";
    for (std::size_t q = 0; q < rep.tail_exact.size(); ++q)
        std::cout << q << ',' << format_number(rep.tail_exact[q]) << ',' << format_number(rep.tail_bound[q]) << ','
                  << rep.steps << ',' << rep.violations << "\n";
    return kOk;
}

int write_sweep(const RunConfig& c, const SweepResult& result) {
    Output out(c.csv_path);
    write_queue_header(out.get());
    for (const auto& cell : result.cells) write_queue_row(out.get(), cell);
    std::string summary = sweep_summary_json(c, result);
    if (!c.json_path.empty()) {
        std::ofstream js(c.json_path);
        require(static_cast<bool>(js), "cannot open " + c.json_path);
        js << summary << "\n";
    } else {
        std::cerr << summary << "\n";
    }
    return result.failed > 0 ? kPartial : kOk;
}

int figure_cmd(const RunConfig& base, int id, bool keep_grid) {
    RunConfig c = keep_grid ? base : figure_config(id, base);
    if (id == 4 || id == 5) c.pipeline.kind = id == 4 ? PipelineKind::bound : PipelineKind::exact;
    if (id == 4 || id == 5) validate(c);
    std::vector<FigureRow> rows = emit_figure_data(id, c);
    Output out(c.csv_path);
    write_figure_header(out.get());
    bool partial = false;
    for (const auto& r : rows) {
        write_figure_row(out.get(), r);
        partial = partial || r.status == "error" || r.status == "infeasible";
    }
    return partial ? kPartial : kOk;
}

int calibrate_cmd(const RunConfig& c, const Anchor& anchor) {
    Calibration cal = calibrate_traffic(c, anchor);
    json j{{"N", anchor.N},
           {"R_bits", anchor.R_bits},
           {"pipeline", to_string(c.pipeline.kind)},
           {"margin", anchor.margin},
           {"threshold", anchor.threshold},
           {"published_tail", anchor.published_tail},
           {"lambda", c.traffic.lambda},
           {"p_geo", cal.p_geo},
           {"fitted_tail", cal.tail},
           {"relative_residual", cal.relative_residual},
           {"converged", cal.converged},
           {"degenerate", cal.degenerate}};
    std::cout << j.dump(2) << "\n";
    return cal.converged || cal.degenerate ? kOk : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-state channel coding bounds, exact decoding failure and queueing tails"};
    app.require_subcommand(1);

    Common common;
    Cell cell;
    int run_status = kOk;
    std::function<int()> action;

    auto* channel = app.add_subcommand("channel", "channel utilities");
    auto* channel_info_cmd = channel->add_subcommand("info", "stationary law, capacity and block transitions");
    channel->require_subcommand(1);
    int info_N = 1;
    common.attach(channel_info_cmd);
    channel_info_cmd->add_option("-N,--block-length", info_N, "block length for P^N and generator rates");
    channel_info_cmd->callback([&] { action = [&] { return channel_info(common.resolve(), info_N); }; });

    auto* bound = app.add_subcommand("bound", "exponential failure bounds");
    bound->require_subcommand(1);
    std::optional<double> rho, tau, mu, xi;
    for (const std::string kind : {"gallager", "type-sum", "rare"}) {
        auto* sub = bound->add_subcommand(kind, kind + " bound (per-entry rho optimisation unless --rho)");
        common.attach(sub);
        cell.attach(sub);
        sub->add_option("--rho", rho, "fixed Gallager parameter");
        sub->add_option("--tau", tau, "margin: emit undetected and failure bounds");
        if (kind == "rare") {
            sub->add_option("--mu", mu, "block generator rate 1 -> 2 (overrides the convention)");
            sub->add_option("--xi", xi, "block generator rate 2 -> 1 (overrides the convention)");
        }
        sub->callback([&, kind] {
            action = [&, kind] { return bound_cmd(kind, common.resolve(), cell, rho, tau, mu, xi); };
        });
    }

    auto* exact = app.add_subcommand("exact", "exact failure probabilities of random codes");
    exact->require_subcommand(1);
    double nu = 0.0;
    for (const std::string kind : {"ml", "md", "undetected"}) {
        auto* sub = exact->add_subcommand(kind, kind == "undetected" ? "undetected-error probability" : kind + " decoding failure");
        common.attach(sub);
        cell.attach(sub);
        sub->add_option("--nu", nu, "decoding margin")->check(CLI::NonNegativeNumber);
        sub->callback([&, kind] { action = [&, kind] { return exact_cmd(kind, common.resolve(), cell, nu); }; });
    }

    auto* margin = app.add_subcommand("margin", "safety margins");
    margin->require_subcommand(1);
    auto* select = margin->add_subcommand("select", "smallest margin meeting the undetected-error target");
    common.attach(select);
    cell.attach(select);
    select->callback([&] { action = [&] { return margin_cmd(common.resolve(), cell); }; });

    auto* queue = app.add_subcommand("queue", "queue analysis");
    queue->require_subcommand(1);
    auto* tail = queue->add_subcommand("tail", "stationary tail Pr(Q > q) for one code");
    std::optional<double> fixed_margin;
    common.attach(tail);
    cell.attach(tail);
    tail->add_option("--margin", fixed_margin, "fixed margin (nu or tau) instead of selection");
    tail->callback([&] { action = [&] { return queue_cmd(common.resolve(), cell, fixed_margin); }; });

    auto* mc = app.add_subcommand("mc", "Monte Carlo oracles");
    mc->require_subcommand(1);
    std::int64_t trials = 1000000;
    QueueSimOptions qopt;
    auto* mc_code = mc->add_subcommand("code", "random-code decoding simulation");
    common.attach(mc_code);
    cell.attach(mc_code);
    mc_code->add_option("--nu", nu, "decoding margin");
    mc_code->add_option("--trials", trials, "trials per initial state");
    mc_code->callback([&] { action = [&] { return mc_code_cmd(common.resolve(), cell, nu, trials); }; });
    auto* mc_queue = mc->add_subcommand("queue", "Lindley-recursion queue simulation");
    auto* mc_dom = mc->add_subcommand("dominance", "coupled exact/bound queue simulation");
    for (auto* sub : {mc_queue, mc_dom}) {
        common.attach(sub);
        cell.attach(sub);
        sub->add_option("--steps", qopt.steps, "codeword slots after warm-up");
        sub->add_option("--warmup", qopt.warmup, "discarded slots");
        sub->add_option("--q-max", qopt.q_max, "largest reported threshold");
        sub->add_option("--batches", qopt.batches, "batches for standard errors");
    }
    mc_queue->add_option("--margin", fixed_margin, "fixed margin (nu or tau) instead of selection");
    mc_queue->callback([&] { action = [&] { return mc_queue_cmd(common.resolve(), cell, fixed_margin, qopt); }; });
    mc_dom->callback([&] { action = [&] { return mc_dominance_cmd(common.resolve(), cell, qopt); }; });

    auto* sweep = app.add_subcommand("sweep", "margin selection and queue tail over an (N, R) grid");
    std::string csv_path, json_path;
    common.attach(sweep);
    sweep->add_option("--csv", csv_path, "CSV output path (default stdout)");
    sweep->add_option("--json", json_path, "JSON summary path (default stderr)");
    sweep->callback([&] {
        action = [&] {
            RunConfig c = common.resolve();
            if (!csv_path.empty()) c.csv_path = csv_path;
            if (!json_path.empty()) c.json_path = json_path;
            return write_sweep(c, run_sweep(c));
        };
    });

    auto* figure = app.add_subcommand("figure", "data series of figures 2-5");
    int figure_id = 2;
    bool keep_grid = false;
    common.attach(figure);
    figure->add_option("id", figure_id, "figure id: 2, 3, 4 or 5")->required()->check(CLI::IsMember({2, 3, 4, 5}));
    figure->add_option("--csv", csv_path, "CSV output path (default stdout)");
    figure->add_flag("--keep-grid", keep_grid, "use the configured grid instead of the figure grid");
    figure->callback([&] {
        action = [&] {
            RunConfig c = common.resolve();
            if (!csv_path.empty()) c.csv_path = csv_path;
            return figure_cmd(c, figure_id, keep_grid);
        };
    });

    auto* calibrate = app.add_subcommand("calibrate", "fit p_geo to one published tail value");
    Anchor anchor;
    common.attach(calibrate);
    calibrate->add_option("-N,--block-length", anchor.N, "anchor block length");
    calibrate->add_option("-R,--rate", anchor.R_bits, "anchor code rate");
    calibrate->add_option("--margin", anchor.margin, "anchor margin (nu or tau)");
    calibrate->add_option("--anchor-threshold", anchor.threshold, "anchor threshold q");
    calibrate->add_option("--published", anchor.published_tail, "published tail probability");
    calibrate->callback([&] { action = [&] { return calibrate_cmd(common.resolve(), anchor); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kFatal;
    }
    try {
        run_status = action ? action() : kFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFatal;
    }
    return run_status;
}
