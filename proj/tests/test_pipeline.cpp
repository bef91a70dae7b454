#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fsc/config.hpp"
#include "fsc/csv.hpp"
#include "fsc/error.hpp"
#include "fsc/pipeline.hpp"
#include "json.hpp"

using namespace fsc;

TEST_CASE("config parsing") {
    std::istringstream in(R"(# comment
[channel]
alpha = 0.05
beta = 0.07
rate_convention = generator
[code]
N = 50, 100
R = 0.25:0.35:0.05
[margin]
pipeline = bound
tau_step = 0.002
value = 0.03
[traffic]
p_geo = 0.004
[queue]
threshold = 4
[run]
seed = 9
jobs = 2
)");
    RunConfig c = parse_config(in);
    CHECK(c.channel.alpha == 0.05);
    CHECK(c.channel.beta == 0.07);
    CHECK(c.channel.convention == RateConvention::generator);
    CHECK(c.N_list == std::vector<int>{50, 100});
    REQUIRE(c.R_list.size() == 3);
    CHECK(c.R_list[2] == doctest::Approx(0.35));
    CHECK(c.pipeline.kind == PipelineKind::bound);
    CHECK(c.pipeline.tau_step == 0.002);
    REQUIRE(c.fixed_margin.has_value());
    CHECK(*c.fixed_margin == 0.03);
    CHECK(c.traffic.p_geo == 0.004);
    CHECK(c.threshold == 4);
    CHECK(c.seed == 9);
    CHECK(c.jobs == 2);
    apply_setting(c, "margin.value=auto");
    CHECK(!c.fixed_margin.has_value());
    apply_setting(c, "channel.eps2=0.2");
    CHECK(c.channel.eps2 == 0.2);
    CHECK_THROWS_AS(apply_setting(c, "channel.gamma=1"), Error);
    CHECK_THROWS_AS(apply_setting(c, "nonsense"), Error);
    std::istringstream bad("[channel]\nalpha = x\n");
    CHECK_THROWS(parse_config(bad));
    CHECK(parse_int_list("75:375:50").size() == 7);
    CHECK(parse_real_list("0.25:0.75:0.05").size() == 11);
    CHECK(describe(c).find("eps2") != std::string::npos);
}

TEST_CASE("config validation") {
    RunConfig c;
    c.traffic.p_geo = 0.0;
    CHECK_THROWS_AS(validate(c), Error);
    c.traffic.p_geo = 0.01;
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("rate conventions") {
    ChannelParams p;
    GeneratorRates lin = block_rates(p, 50);
    CHECK(lin.mu == doctest::Approx(50 * 0.0533));
    p.convention = RateConvention::generator;
    GeneratorRates gen = block_rates(p, 50);
    CHECK(gen.mu == doctest::Approx(generator_from_discrete(0.0533, 0.08, 50).mu).epsilon(1e-15));
    CHECK(gen.mu == doctest::Approx(2.8615).epsilon(1e-3));
    CHECK(parse_rate_convention("linear") == RateConvention::linear);
    CHECK_THROWS(parse_rate_convention("cubic"));
    CHECK(parse_pipeline_kind("exact") == PipelineKind::exact);
    CHECK(parse_bound_form("discrete") == BoundForm::discrete);
    CHECK(parse_tilt_policy("joint") == TiltPolicy::joint);
    CHECK(parse_decoder_kind("md") == DecoderKind::md);
}

TEST_CASE("margin selection with a loose target") {
    ChannelParams ch;
    CodeParams code = make_code(50, 0.5);
    PipelineOptions opt;
    opt.target = 1.0;
    MarginSelection e = select_margin(ch, code, opt);
    CHECK(e.feasible);
    CHECK(e.value == 0.0);
    opt.kind = PipelineKind::bound;
    MarginSelection b = select_margin(ch, code, opt);
    CHECK(b.feasible);
    CHECK(b.value == 0.0);
}

TEST_CASE("margin selection returns the smallest feasible grid point") {
    ChannelParams ch;
    CodeParams code = make_code(50, 0.5);
    PipelineOptions opt;
    opt.target = 1e-4;
    MarginSelection e = select_margin(ch, code, opt);
    REQUIRE(e.feasible);
    CellFailure at = failure_at_margin(ch, code, e.value, opt);
    CellFailure below = failure_at_margin(ch, code, e.value - 1, opt);
    CHECK(at.undetected.maxCoeff() <= 1e-4);
    CHECK(below.undetected.maxCoeff() > 1e-4);
    opt.kind = PipelineKind::bound;
    MarginSelection b = select_margin(ch, code, opt);
    REQUIRE(b.feasible);
    CHECK(failure_at_margin(ch, code, b.value, opt).undetected.maxCoeff() <= 1e-4);
    CHECK(failure_at_margin(ch, code, b.value - opt.tau_step, opt).undetected.maxCoeff() > 1e-4);
}

TEST_CASE("cell evaluation and sweep bookkeeping") {
    RunConfig c;
    c.traffic.p_geo = 0.0069;
    c.N_list = {50};
    c.R_list = {0.5, 0.55};
    c.fixed_margin = 2.0;
    c.jobs = 2;
    SweepResult r = run_sweep(c);
    REQUIRE(r.cells.size() == 2);
    CHECK(r.cells[1].status == CellStatus::skipped);
    CHECK(r.cells[0].status != CellStatus::skipped);
    CHECK(r.failed == 0);
    CellResult direct = evaluate_cell(c, 50, 0.5);
    CHECK(direct.queue.tail == r.cells[0].queue.tail);
    auto j = nlohmann::json::parse(sweep_summary_json(c, r));
    CHECK(j.contains("argmin"));
    c.jobs = 1;
    SweepResult serial = run_sweep(c);
    CHECK(serial.cells[0].queue.tail == r.cells[0].queue.tail);
}

TEST_CASE("calibration recovers a synthetic anchor") {
    RunConfig c;
    c.traffic.p_geo = 0.01;
    c.fixed_margin = 3.0;
    CellResult cell = evaluate_cell(c, 50, 0.5);
    REQUIRE(cell.status == CellStatus::ok);
    Anchor a{50, 0.5, 3.0, 5, cell.queue.tail};
    Calibration cal = calibrate_traffic(c, a);
    CHECK(cal.converged);
    CHECK(cal.p_geo == doctest::Approx(0.01).epsilon(1e-6));
    c.traffic.lambda = 0.0;
    Calibration deg = calibrate_traffic(c, {50, 0.5, 3.0, 5, 0.0});
    CHECK(deg.degenerate);
    CHECK(deg.tail == 0.0);
}

TEST_CASE("figure grids") {
    RunConfig base;
    RunConfig f5 = figure_config(5, base);
    CHECK(f5.R_list.size() == 11);
    CHECK(f5.pipeline.kind == PipelineKind::exact);
    CHECK(figure_config(4, base).pipeline.kind == PipelineKind::bound);
    CHECK(figure_config(2, base).N_list == std::vector<int>{50, 75, 100});
    CHECK_THROWS(figure_config(7, base));
    auto g = rate_grid(0.25, 0.75, 0.05);
    CHECK(g[5] == 0.5);
}

TEST_CASE("csv formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(std::nan("")) == "nan");
    std::ostringstream os;
    write_failure_header(os);
    CHECK(os.str() == "kind,N,R_bits,rho_star,v_star,tau,i,j,value\n");
    std::ostringstream q;
    write_queue_header(q);
    CHECK(q.str().rfind("N,R_bits,margin_kind,margin_value,threshold,tail_probability,drift,residual", 0) == 0);
    std::ostringstream rows;
    FailureBoundMatrix m;
    m.kind = BoundKind::rare_transition;
    m.values = Matrix::Constant(2, 2, 0.25);
    m.rho_star = Matrix::Constant(2, 2, 0.5);
    m.v_star = Matrix::Zero(2, 2);
    write_failure_rows(rows, m, make_code(50, 0.5));
    std::string text = rows.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find(",1,2,0.25") != std::string::npos);
}
