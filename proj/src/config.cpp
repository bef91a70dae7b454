#include "fsc/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fsc/error.hpp"

namespace fsc {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (trim(text.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw Error("invalid number for " + key + ": '" + text + "'");
}

long long to_integer(const std::string& key, const std::string& text) {
    double v = to_real(key, text);
    require(std::floor(v) == v, "expected an integer for " + key + ": '" + text + "'");
    return static_cast<long long>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw Error("invalid boolean for " + key + ": '" + text + "'");
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
    std::string t = trim(text);
    if (t.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(to_real("range", trim(item)));
        require(parts.size() == 3, "range must be lo:hi:step");
        return rate_grid(parts[0], parts[1], parts[2]);
    }
    std::vector<double> out;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_real("list", item));
    }
    require(!out.empty(), "empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_real_list(text)) {
        require(std::floor(v) == v, "list entries must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

void apply_setting(RunConfig& c, const std::string& section, const std::string& key, const std::string& value) {
    const std::string name = section + "." + key;
    if (section == "channel") {
        if (key == "alpha") return void(c.channel.alpha = to_real(name, value));
        if (key == "beta") return void(c.channel.beta = to_real(name, value));
        if (key == "eps1") return void(c.channel.eps1 = to_real(name, value));
        if (key == "eps2") return void(c.channel.eps2 = to_real(name, value));
        if (key == "rate_convention") return void(c.channel.convention = parse_rate_convention(value));
    } else if (section == "code") {
        if (key == "N") return void(c.N_list = parse_int_list(value));
        if (key == "R") return void(c.R_list = parse_real_list(value));
        if (key == "allow_fractional") return void(c.allow_fractional = to_bool(name, value));
    } else if (section == "margin") {
        if (key == "pipeline") return void(c.pipeline.kind = parse_pipeline_kind(value));
        if (key == "decoder") return void(c.pipeline.decoder = parse_decoder_kind(value));
        if (key == "bound_form") return void(c.pipeline.form = parse_bound_form(value));
        if (key == "tilt") return void(c.pipeline.tilt = parse_tilt_policy(value));
        if (key == "target") return void(c.pipeline.target = to_real(name, value));
        if (key == "tau_step") return void(c.pipeline.tau_step = to_real(name, value));
        if (key == "tau_max") return void(c.pipeline.tau_max = to_real(name, value));
        if (key == "nu_max") return void(c.pipeline.nu_max = static_cast<int>(to_integer(name, value)));
        if (key == "rho_step") return void(c.pipeline.rho_step = to_real(name, value));
        if (key == "value") {
            if (value == "auto") return void(c.fixed_margin.reset());
            return void(c.fixed_margin = to_real(name, value));
        }
    } else if (section == "traffic") {
        if (key == "lambda") return void(c.traffic.lambda = to_real(name, value));
        if (key == "p_geo") return void(c.traffic.p_geo = to_real(name, value));
    } else if (section == "queue") {
        if (key == "threshold") return void(c.threshold = static_cast<int>(to_integer(name, value)));
    } else if (section == "output") {
        if (key == "csv") return void(c.csv_path = value);
        if (key == "json") return void(c.json_path = value);
    } else if (section == "run") {
        if (key == "seed") return void(c.seed = static_cast<std::uint64_t>(to_integer(name, value)));
        if (key == "jobs") return void(c.jobs = static_cast<int>(to_integer(name, value)));
    }
    throw Error("unknown configuration key '" + name + "'");
}

void apply_setting(RunConfig& config, const std::string& assignment) {
    auto eq = assignment.find('=');
    require(eq != std::string::npos, "setting must look like section.key=value: '" + assignment + "'");
    std::string lhs = trim(assignment.substr(0, eq));
    auto dot = lhs.find('.');
    require(dot != std::string::npos, "setting must look like section.key=value: '" + assignment + "'");
    apply_setting(config, lhs.substr(0, dot), lhs.substr(dot + 1), trim(assignment.substr(eq + 1)));
}

RunConfig parse_config(std::istream& in) {
    RunConfig c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            require(line.back() == ']', "line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        require(eq != std::string::npos, "line " + std::to_string(lineno) + ": expected key = value");
        require(!section.empty(), "line " + std::to_string(lineno) + ": key outside of a section");
        try {
            apply_setting(c, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw Error("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file " + path);
    return parse_config(in);
}

std::string describe(const RunConfig& c) {
    std::ostringstream os;
    os << std::setprecision(15);
    os << "[channel]\nalpha = " << c.channel.alpha << "\nbeta = " << c.channel.beta << "\neps1 = " << c.channel.eps1
       << "\neps2 = " << c.channel.eps2 << "\nrate_convention = " << to_string(c.channel.convention) << "\n";
    os << "[code]\nN = ";
    for (std::size_t k = 0; k < c.N_list.size(); ++k) os << (k ? ", " : "") << c.N_list[k];
    os << "\nR = ";
    for (std::size_t k = 0; k < c.R_list.size(); ++k) os << (k ? ", " : "") << c.R_list[k];
    os << "\nallow_fractional = " << (c.allow_fractional ? "true" : "false") << "\n";
    os << "[margin]\npipeline = " << to_string(c.pipeline.kind)
       << "\ndecoder = " << (c.pipeline.decoder == DecoderKind::ml ? "ml" : "md")
       << "\nbound_form = " << to_string(c.pipeline.form)
       << "\ntilt = " << (c.pipeline.tilt == TiltPolicy::forney ? "forney" : "joint")
       << "\ntarget = " << c.pipeline.target << "\ntau_step = " << c.pipeline.tau_step
       << "\ntau_max = " << c.pipeline.tau_max << "\nnu_max = " << c.pipeline.nu_max
       << "\nrho_step = " << c.pipeline.rho_step << "\nvalue = ";
    if (c.fixed_margin)
        os << *c.fixed_margin;
    else
        os << "auto";
    os << "\n[traffic]\nlambda = " << c.traffic.lambda << "\np_geo = " << c.traffic.p_geo << "\n";
    os << "[queue]\nthreshold = " << c.threshold << "\n";
    os << "[output]\ncsv = " << c.csv_path << "\njson = " << c.json_path << "\n";
    os << "[run]\nseed = " << c.seed << "\njobs = " << c.jobs << "\n";
    return os.str();
}

}  // namespace fsc
