// solflow command-line front end.

#include "solflow/error.hpp"
#include "solflow/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw solflow::ConfigError("cannot read " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

int cmd_run(const std::string& file, bool keep_going, const std::string& out) {
    auto scenario = solflow::load_scenario(file);
    if (!out.empty()) scenario.output_dir = out;
    const auto report = solflow::run(scenario, {keep_going, true});
    const auto& syn = report.synthesis;
    std::cout << "synthesis " << syn.value("status", "") ;
    if (syn.contains("alpha1")) std::cout << " alpha1=" << syn["alpha1"].get<double>() << " N=" << syn["N"].get<std::size_t>();
    std::cout << '\n';
    for (const auto& c : report.checks) {
        std::cout << to_string(c.check) << ' ' << to_string(c.status);
        if (!c.message.empty()) std::cout << " (" << c.message << ')';
        std::cout << '\n';
    }
    std::cout << "report written to " << (scenario.output_dir / "report.json").string() << '\n';
    return report.exit_code;
}

ojson train_json(const solflow::SolitonTrain& t) {
    ojson j;
    j["alpha1"] = t.alpha1;
    j["N"] = t.size();
    j["alphas"] = t.alphas;
    j["phases"] = t.phases;
    j["speed_margin"] = t.report.speed_margin;
    j["feasible"] = t.report.feasible();
    if (t.report.tail_norm_start) j["tail_norm_start"] = *t.report.tail_norm_start;
    if (t.report.tail_norm_end) j["tail_norm_end"] = *t.report.tail_norm_end;
    if (t.report.min_interaction_factor) j["min_interaction_factor"] = *t.report.min_interaction_factor;
    return j;
}

ojson trace_json(const std::vector<solflow::SearchStep>& trace) {
    ojson steps = ojson::array();
    for (const auto& s : trace)
        steps.push_back({{"alpha1", s.alpha1}, {"N", s.N}, {"evaluated", s.evaluated}, {"failed", s.failed}});
    return steps;
}

int cmd_synth(const std::string& file) {
    const auto config = solflow::parse_synthesis(read_file(file));
    try {
        const auto result = solflow::synthesize(config.spec, config.search);
        ojson j = train_json(result.train);
        j["trace"] = trace_json(result.trace);
        std::cout << j.dump(2) << '\n';
        return result.trace.back().failed.empty() ? 0 : kCheckFailure;
    } catch (const solflow::SearchExhausted& e) {
        ojson j;
        j["error"] = e.what();
        j["trace"] = trace_json(e.trace());
        std::cout << j.dump(2) << '\n';
        return kCheckFailure;
    }
}

int cmd_phase_shift(double a1, double a2, double s1, double s2, const std::string& out) {
    const solflow::NSolitonSolution sol({{a1, s1}, {a2, s2}});
    const auto fits = solflow::fit_phase_shifts(sol);
    ojson j = ojson::array();
    for (const auto& f : fits)
        j.push_back({{"alpha", f.alpha}, {"fitted", f.shift}, {"predicted", f.predicted},
                     {"speed_before", f.speed_before}, {"speed_after", f.speed_after}});
    std::cout << j.dump(2) << '\n';
    if (!out.empty()) solflow::emit_phase_shift_data(sol, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soliton trains and Lagrangian flows of the KdV equation"};
    app.require_subcommand(1);

    std::string scenario_file, out_dir;
    bool keep_going = false;
    auto* run = app.add_subcommand("run", "Run a scenario and write its report");
    run->add_option("scenario", scenario_file, "Scenario JSON file")->required();
    run->add_flag("--keep-going", keep_going, "Continue past failing checks");
    run->add_option("--out", out_dir, "Output directory (overrides the scenario)");

    std::string spec_file;
    auto* synth = app.add_subcommand("synth", "Synthesize a soliton train");
    synth->add_option("spec", spec_file, "Specification JSON file")->required();

    double a1 = 0.0, a2 = 0.0, s1 = 0.0, s2 = 0.0;
    std::string shift_out;
    auto* shift = app.add_subcommand("phase-shift", "Fit the collision phase shifts of two solitons");
    shift->add_option("--alpha1", a1, "First amplitude parameter")->required()->check(CLI::PositiveNumber);
    shift->add_option("--alpha2", a2, "Second amplitude parameter")->required()->check(CLI::PositiveNumber);
    shift->add_option("--s1", s1, "First phase");
    shift->add_option("--s2", s2, "Second phase");
    shift->add_option("--out", shift_out, "Directory for plot data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*run) return cmd_run(scenario_file, keep_going, out_dir);
        if (*synth) return cmd_synth(spec_file);
        if (*shift) return cmd_phase_shift(a1, a2, s1, s2, shift_out);
    } catch (const solflow::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const solflow::DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const solflow::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumericError;
    }
    return 0;
}
