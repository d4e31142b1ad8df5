#include "solflow/experiment.hpp"

#include "solflow/analysis.hpp"
#include "solflow/error.hpp"
#include "solflow/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace solflow {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const std::set<std::string> spec_keys = {"L", "T", "delta", "eps1", "eps2", "eps_ladder", "alpha1"};
const std::set<std::string> search_keys = {"search_growth", "alpha_max", "max_solitons", "tail_samples",
                                           "interaction_samples"};
const std::set<std::string> scenario_keys = {
    "checks",         "output_dir",     "seed",          "tolerances",      "field_scale",
    "exit_grid",      "exit_random",    "exit_times",    "envelope_samples", "residual_points",
    "residual_times", "replay_resolution"};

json parse_document(const std::string& text) {
    try {
        json doc = json::parse(text, nullptr, true, true);
        if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
        return doc;
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        std::ostringstream msg;
        msg << "malformed configuration at line " << line << ", column " << column;
        throw ConfigError(msg.str());
    }
}

void reject_unknown(const json& doc) {
    for (const auto& [key, value] : doc.items())
        if (!spec_keys.count(key) && !search_keys.count(key) && !scenario_keys.count(key))
            throw ConfigError("unknown field '" + key + "'");
}

double number(const json& doc, const std::string& key, double fallback) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number()) throw ConfigError("field '" + key + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("field '" + key + "' must be finite");
    return d;
}

double positive(const json& doc, const std::string& key, double fallback) {
    const double d = number(doc, key, fallback);
    if (!(d > 0.0)) throw ConfigError("field '" + key + "' must be positive");
    return d;
}

std::size_t count(const json& doc, const std::string& key, std::size_t fallback, std::size_t least = 1) {
    if (!doc.contains(key)) return fallback;
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(least))
        throw ConfigError("field '" + key + "' must be an integer of at least " + std::to_string(least));
    return v.get<std::size_t>();
}

SynthesisConfig read_synthesis(const json& doc) {
    SynthesisConfig c;
    auto& s = c.spec;
    s.L = number(doc, "L", s.L);
    s.T = number(doc, "T", s.T);
    s.delta = number(doc, "delta", s.delta);
    s.eps1 = number(doc, "eps1", s.eps1);
    s.eps2 = number(doc, "eps2", s.eps2);
    s.eps_ladder = number(doc, "eps_ladder", s.eps_ladder);
    if (doc.contains("alpha1") && !doc.at("alpha1").is_null()) s.alpha1 = number(doc, "alpha1", 0.0);
    validate(s);
    c.search.growth = number(doc, "search_growth", c.search.growth);
    if (!(c.search.growth > 1.0)) throw ConfigError("field 'search_growth' must exceed 1");
    c.search.alpha_max = positive(doc, "alpha_max", c.search.alpha_max);
    c.search.solution.max_solitons = count(doc, "max_solitons", c.search.solution.max_solitons);
    c.search.tail_samples = count(doc, "tail_samples", c.search.tail_samples, 2);
    c.search.interaction_samples = count(doc, "interaction_samples", c.search.interaction_samples, 2);
    return c;
}

FieldScale parse_scale(const std::string& name) {
    for (FieldScale s : {FieldScale::Half, FieldScale::Unit, FieldScale::Physical})
        if (name == to_string(s)) return s;
    throw ConfigError("field 'field_scale' must be one of half, unit, physical");
}

std::string format(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

ojson step_json(const SearchStep& s) {
    ojson j;
    j["alpha1"] = s.alpha1;
    j["N"] = s.N;
    j["evaluated"] = s.evaluated;
    j["failed"] = s.failed;
    j["speed_margin"] = s.report.speed_margin;
    if (s.report.tail_norm_start) j["tail_norm_start"] = *s.report.tail_norm_start;
    if (s.report.tail_norm_end) j["tail_norm_end"] = *s.report.tail_norm_end;
    if (s.report.min_interaction_factor) j["min_interaction_factor"] = *s.report.min_interaction_factor;
    if (s.report.min_log_interaction_factor) j["min_log_interaction_factor"] = *s.report.min_log_interaction_factor;
    return j;
}

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

// Particles at x0 in (0, L) drawn from the scenario seed.
std::vector<double> random_starts(std::uint64_t seed, std::size_t n, double L) {
    std::mt19937_64 gen(seed);
    std::vector<double> xs(n);
    for (auto& x : xs) x = L * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    std::sort(xs.begin(), xs.end());
    return xs;
}

// Newton iteration on eta_x = 0 from a starting guess.
double peak_near(const NSolitonSolution& sol, double x, double t) {
    for (int it = 0; it < 100; ++it) {
        const EtaJet j = eta_derivatives(sol, x, t);
        if (!(j.eta_xx < 0.0)) throw NumericError("peak search left the soliton core");
        const double dx = j.eta_x / j.eta_xx;
        x -= dx;
        if (std::abs(dx) <= 1e-13 * std::max(1.0, std::abs(x))) return x;
    }
    throw NumericError("peak search did not converge");
}

// Least-squares line x = c + v t.
std::pair<double, double> fit_line(const PeakTrack& tr) {
    const auto n = static_cast<double>(tr.t.size());
    double mt = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        mt += tr.t[i];
        mx += tr.x[i];
    }
    mt /= n;
    mx /= n;
    double stt = 0.0, stx = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        stt += (tr.t[i] - mt) * (tr.t[i] - mt);
        stx += (tr.t[i] - mt) * (tr.x[i] - mx);
    }
    const double v = stx / stt;
    return {mx - v * mt, v};
}

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace

const char* to_string(Check check) {
    switch (check) {
    case Check::Conditions: return "conditions";
    case Check::Tails: return "tails";
    case Check::Envelopes: return "envelopes";
    case Check::Exit: return "exit";
    case Check::Residual: return "residual";
    case Check::OracleReplay: return "oracle-replay";
    }
    return "unknown";
}

Check parse_check(const std::string& name) {
    for (Check c : all_checks)
        if (name == to_string(c)) return c;
    throw ConfigError("unknown check '" + name + "'");
}

const char* to_string(CheckStatus status) {
    switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
    case CheckStatus::Error: return "error";
    }
    return "unknown";
}

SynthesisConfig parse_synthesis(const std::string& text) {
    const json doc = parse_document(text);
    reject_unknown(doc);
    return read_synthesis(doc);
}

Scenario parse_scenario(const std::string& text) {
    const json doc = parse_document(text);
    reject_unknown(doc);
    Scenario s;
    auto synth = read_synthesis(doc);
    s.spec = synth.spec;
    s.search = synth.search;

    if (!doc.contains("checks")) throw ConfigError("field 'checks' is required");
    const auto& checks = doc.at("checks");
    std::set<Check> chosen;
    if (checks.is_string() && checks.get<std::string>() == "all") {
        chosen.insert(std::begin(all_checks), std::end(all_checks));
    } else if (checks.is_array()) {
        for (const auto& c : checks) {
            if (!c.is_string()) throw ConfigError("field 'checks' must list check names");
            chosen.insert(parse_check(c.get<std::string>()));
        }
    } else {
        throw ConfigError("field 'checks' must be \"all\" or a list of check names");
    }
    if (chosen.empty()) throw ConfigError("field 'checks' must not be empty");
    s.checks.assign(chosen.begin(), chosen.end());

    if (doc.contains("output_dir")) {
        if (!doc.at("output_dir").is_string()) throw ConfigError("field 'output_dir' must be a string");
        s.output_dir = doc.at("output_dir").get<std::string>();
    }
    if (doc.contains("seed")) {
        const auto& v = doc.at("seed");
        if (!v.is_number_unsigned()) throw ConfigError("field 'seed' must be a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }
    if (doc.contains("tolerances")) {
        const auto& t = doc.at("tolerances");
        if (!t.is_object()) throw ConfigError("field 'tolerances' must be an object");
        for (const auto& [key, value] : t.items()) {
            const std::string field = "tolerances." + key;
            if (!value.is_number() || !(value.get<double>() > 0.0) || !std::isfinite(value.get<double>()))
                throw ConfigError("field '" + field + "' must be a positive number");
            const double v = value.get<double>();
            if (key == "residual") s.tolerances.residual = v;
            else if (key == "oracle-replay") s.tolerances.replay = v;
            else if (key == "envelopes") s.tolerances.envelope = v;
            else if (key == "exit") s.tolerances.flow = v;
            else throw ConfigError("unknown field '" + field + "'");
        }
    }
    if (doc.contains("field_scale")) {
        if (!doc.at("field_scale").is_string()) throw ConfigError("field 'field_scale' must be a string");
        s.field_scale = parse_scale(doc.at("field_scale").get<std::string>());
    }
    s.exit_grid = count(doc, "exit_grid", s.exit_grid, 2);
    s.exit_random = count(doc, "exit_random", s.exit_random, 0);
    s.exit_times = count(doc, "exit_times", s.exit_times);
    s.envelope_samples = count(doc, "envelope_samples", s.envelope_samples);
    s.residual_points = count(doc, "residual_points", s.residual_points, 4);
    s.residual_times = count(doc, "residual_times", s.residual_times);
    s.replay_resolution = count(doc, "replay_resolution", s.replay_resolution, 6);
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read scenario file " + file.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

ojson to_json(const Scenario& s) {
    ojson j;
    j["L"] = s.spec.L;
    j["T"] = s.spec.T;
    j["delta"] = s.spec.delta;
    j["eps1"] = s.spec.eps1;
    j["eps2"] = s.spec.eps2;
    j["eps_ladder"] = s.spec.eps_ladder;
    j["alpha1"] = s.spec.alpha1 ? ojson(*s.spec.alpha1) : ojson(nullptr);
    j["search_growth"] = s.search.growth;
    j["alpha_max"] = s.search.alpha_max;
    j["max_solitons"] = s.search.solution.max_solitons;
    j["tail_samples"] = s.search.tail_samples;
    j["interaction_samples"] = s.search.interaction_samples;
    ojson checks = ojson::array();
    for (Check c : s.checks) checks.push_back(to_string(c));
    j["checks"] = checks;
    j["output_dir"] = s.output_dir.generic_string();
    j["seed"] = s.seed;
    j["tolerances"] = {{"residual", s.tolerances.residual},
                       {"oracle-replay", s.tolerances.replay},
                       {"envelopes", s.tolerances.envelope},
                       {"exit", s.tolerances.flow}};
    j["field_scale"] = to_string(s.field_scale);
    j["exit_grid"] = s.exit_grid;
    j["exit_random"] = s.exit_random;
    j["exit_times"] = s.exit_times;
    j["envelope_samples"] = s.envelope_samples;
    j["residual_points"] = s.residual_points;
    j["residual_times"] = s.residual_times;
    j["replay_resolution"] = s.replay_resolution;
    return j;
}

ojson Report::to_json(const Scenario& scenario) const {
    ojson j;
    j["scenario"] = solflow::to_json(scenario);
    j["synthesis"] = synthesis;
    ojson checks = ojson::object();
    for (const auto& c : this->checks) {
        ojson e;
        e["status"] = to_string(c.status);
        if (!c.message.empty()) e["message"] = c.message;
        for (const auto& [k, v] : c.details.items()) e[k] = v;
        checks[to_string(c.check)] = e;
    }
    j["checks"] = checks;
    j["passed"] = passed();
    j["exit_code"] = exit_code;
    return j;
}

ojson Report::timings() const {
    ojson j = ojson::object();
    j["synthesis"] = synthesis_seconds;
    for (const auto& c : checks) j[to_string(c.check)] = c.seconds;
    return j;
}


namespace {

const NSolitonSolution* solution_of(const RunArtifacts& a, CheckResult& r) {
    if (!a.train) {
        r.status = CheckStatus::Skipped;
        r.message = "no soliton train was built";
        return nullptr;
    }
    if (!a.train->solution) {
        r.status = CheckStatus::Skipped;
        r.message = "soliton count " + std::to_string(a.train->size()) + " exceeds the cap";
        return nullptr;
    }
    return a.train->solution.get();
}

void check_conditions(const Scenario&, RunArtifacts& a, CheckResult& r) {
    if (!a.train) {
        r.status = CheckStatus::Skipped;
        r.message = "no soliton train was built";
        return;
    }
    const auto& rep = a.train->report;
    r.details["speed_margin"] = rep.speed_margin;
    r.details["max_cond1_margin"] = *std::max_element(rep.cond1_margins.begin(), rep.cond1_margins.end());
    r.details["min_cond2_margin"] = *std::min_element(rep.cond2_margins.begin(), rep.cond2_margins.end());
    r.details["speed_ok"] = rep.speed_ok();
    r.details["cond1_ok"] = rep.cond1_ok();
    r.details["cond2_ok"] = rep.cond2_ok();
    r.status = rep.feasible() ? CheckStatus::Pass : CheckStatus::Fail;
}

void check_tails(const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    if (!solution_of(a, r)) return;
    auto& rep = a.train->report;
    if (!rep.tail_norm_start || !rep.tail_norm_end) {
        const TailNorms tails = tail_norms(*a.train, sc.search.tail_samples);
        rep.tail_norm_start = tails.start;
        rep.tail_norm_end = tails.end;
    }
    r.details["tail_norm_start"] = *rep.tail_norm_start;
    r.details["tail_norm_end"] = *rep.tail_norm_end;
    r.details["delta"] = sc.spec.delta;
    r.status = std::max(*rep.tail_norm_start, *rep.tail_norm_end) < sc.spec.delta ? CheckStatus::Pass
                                                                                  : CheckStatus::Fail;
}

void check_envelopes(const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    if (!solution_of(a, r)) return;
    const std::size_t n = a.train->size();
    const auto ts = linspace(0.0, sc.spec.T, sc.envelope_samples);
    std::vector<EnvelopeResult> out(n * ts.size());
    std::vector<char> empty(out.size(), 0);
    parallel_for(out.size(), [&](std::size_t i) {
        const std::size_t k = i / ts.size();
        const double t = ts[i % ts.size()];
        // an infeasible train can leave no room around soliton k
        const Interval nb = envelope_neighbourhood(*a.train->solution, k, t, sc.spec.eps1);
        if (!(nb.hi > nb.lo)) {
            empty[i] = 1;
            out[i].min_margin = HUGE_VAL;
            return;
        }
        out[i] = envelope_check(*a.train, k, t, 512, sc.tolerances.envelope);
    });
    std::size_t worst = 0, holding = 0, vacant = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        vacant += empty[i];
        if (out[i].holds) ++holding;
        if (out[i].min_margin < out[worst].min_margin) worst = i;
    }
    r.details["samples"] = out.size();
    r.details["holding"] = holding;
    r.details["empty_neighbourhoods"] = vacant;
    if (vacant > 0) r.message = "some envelope neighbourhoods are empty";
    r.details["min_margin"] = out[worst].min_margin;
    r.details["worst_k"] = worst / ts.size();
    r.details["worst_t"] = ts[worst % ts.size()];
    r.details["worst_x"] = out[worst].at_x;
    r.details["worst_log_a_k"] = out[worst].log_a_k;
    r.status = holding == out.size() ? CheckStatus::Pass : CheckStatus::Fail;
}

void check_exit(const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    if (!solution_of(a, r)) return;
    const double L = sc.spec.L, T = sc.spec.T;
    const auto times = sc.exit_times == 1 ? std::vector<double>{T} : linspace(T - sc.spec.eps2, T, sc.exit_times);
    const auto extra = random_starts(sc.seed, sc.exit_random, L);
    FlowOptions opts;
    opts.tol = sc.tolerances.flow;
    FlowOptions extra_opts = opts;
    extra_opts.stops = times;

    ojson scales = ojson::object();
    for (FieldScale scale : {FieldScale::Half, FieldScale::Unit, FieldScale::Physical}) {
        const auto field = VelocityField::from_solution(a.train->solution, scale);
        ExitReport rep = exit_check(field, L, times, sc.exit_grid, opts);
        std::vector<FlowTrajectory> more(extra.size());
        parallel_for(extra.size(), [&](std::size_t i) { more[i] = integrate_flow(field, extra[i], 0.0, T, extra_opts); });
        for (auto& tr : more) {
            for (std::size_t j = 0; j < times.size(); ++j) {
                rep.min_phi[j] = std::min(rep.min_phi[j], tr.at(times[j]));
                rep.margin = std::min(rep.margin, tr.at(times[j]) - L);
            }
            rep.trajectories.push_back(std::move(tr));
        }
        rep.exits = rep.margin > 0.0;
        ojson e;
        e["margin"] = rep.margin;
        e["min_phi_at_T"] = rep.min_phi.back();
        e["exits"] = rep.exits;
        e["order_preserved"] = rep.order_preserved;
        e["monotone"] = rep.monotone;
        scales[to_string(scale)] = e;
        a.exits[scale] = std::move(rep);
    }
    const ExitReport& chosen = a.exits.at(sc.field_scale);
    a.train->report.exit_margin = chosen.margin;
    r.details["field_scale"] = to_string(sc.field_scale);
    r.details["particles"] = sc.exit_grid + 1 + extra.size();
    r.details["margin"] = chosen.margin;
    r.details["scales"] = scales;
    r.status = chosen.exits ? CheckStatus::Pass : CheckStatus::Fail;
}

void check_residual(const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    const NSolitonSolution* sol = solution_of(a, r);
    if (!sol) return;
    SolverConfig grid;
    grid.domain = {0.0, sc.spec.L};
    grid.resolution = sc.residual_points;
    grid.t0 = 0.0;
    grid.t1 = sc.spec.T;
    const double res = residual_norm(*sol, grid, sc.residual_times);
    r.details["max_residual"] = res;
    r.details["tolerance"] = sc.tolerances.residual;
    r.status = res <= sc.tolerances.residual ? CheckStatus::Pass : CheckStatus::Fail;
}

void check_replay(const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    const NSolitonSolution* sol = solution_of(a, r);
    if (!sol) return;
    SolverConfig c;
    c.bc = BoundaryMode::DirichletTraces;
    c.resolution = sc.replay_resolution;
    c.t0 = sc.spec.eps1;
    c.t1 = sc.spec.T - sc.spec.eps2;
    a.replay = ibvp_replay(*sol, sc.spec.L, c);
    r.details["max_deviation"] = a.replay->max_deviation;
    r.details["tolerance"] = sc.tolerances.replay;
    r.details["resolution"] = sc.replay_resolution;
    r.details["steps"] = a.replay->steps;
    r.status = a.replay->max_deviation <= sc.tolerances.replay ? CheckStatus::Pass : CheckStatus::Fail;
}

void run_check(Check c, const Scenario& sc, RunArtifacts& a, CheckResult& r) {
    switch (c) {
    case Check::Conditions: return check_conditions(sc, a, r);
    case Check::Tails: return check_tails(sc, a, r);
    case Check::Envelopes: return check_envelopes(sc, a, r);
    case Check::Exit: return check_exit(sc, a, r);
    case Check::Residual: return check_residual(sc, a, r);
    case Check::OracleReplay: return check_replay(sc, a, r);
    }
}

ojson synthesis_json(const RunArtifacts& a) {
    ojson j;
    if (a.train) {
        j["alpha1"] = a.train->alpha1;
        j["N"] = a.train->size();
        j["alphas"] = a.train->alphas;
        j["phases"] = a.train->phases;
        const auto& rep = a.train->report;
        if (rep.min_interaction_factor) j["min_interaction_factor"] = *rep.min_interaction_factor;
        if (rep.min_log_interaction_factor) j["min_log_interaction_factor"] = *rep.min_log_interaction_factor;
        if (rep.exit_margin) j["exit_margin"] = *rep.exit_margin;
    }
    ojson trace = ojson::array();
    for (const auto& s : a.trace) trace.push_back(step_json(s));
    j["trace"] = trace;
    return j;
}

} // namespace

Report run(const Scenario& sc, const RunOptions& options) {
    Report rep;
    bool synthesis_failed = false, numeric_failure = false;
    ojson status;
    const Stopwatch synth_clock;
    try {
        auto res = synthesize(sc.spec, sc.search);
        rep.artifacts.train = std::move(res.train);
        rep.artifacts.trace = std::move(res.trace);
        status["status"] = sc.spec.alpha1 ? "pinned" : "found";
    } catch (const SearchExhausted& e) {
        rep.artifacts.trace = e.trace();
        status["status"] = "exhausted";
        status["message"] = e.what();
        synthesis_failed = true;
        if (const auto best = e.best()) {
            SolitonTrain t = build_train(sc.spec, best->alpha1, sc.search.solution);
            t.report = best->report;
            rep.artifacts.train = std::move(t);
            status["candidate"] = "best evaluated";
        }
    } catch (const NumericError& e) {
        status["status"] = "error";
        status["message"] = e.what();
        numeric_failure = true;
    }
    rep.synthesis_seconds = synth_clock.seconds();

    bool halted = numeric_failure || (synthesis_failed && !options.keep_going);
    bool all_pass = !synthesis_failed && !numeric_failure;
    for (Check c : sc.checks) {
        CheckResult r;
        r.check = c;
        if (halted) {
            r.message = "skipped after an earlier failure";
            all_pass = false;
            rep.checks.push_back(std::move(r));
            continue;
        }
        const Stopwatch clock;
        try {
            run_check(c, sc, rep.artifacts, r);
        } catch (const NumericError& e) {
            r.status = CheckStatus::Error;
            r.message = e.what();
        } catch (const DomainError& e) {
            r.status = CheckStatus::Error;
            r.message = e.what();
        }
        r.seconds = clock.seconds();
        if (r.status == CheckStatus::Error) numeric_failure = true;
        if (r.status != CheckStatus::Pass) {
            all_pass = false;
            if (!options.keep_going) halted = true;
        }
        rep.checks.push_back(std::move(r));
    }
    rep.exit_code = numeric_failure ? 3 : all_pass ? 0 : 1;

    ojson syn = status;
    const ojson found = synthesis_json(rep.artifacts);
    for (const auto& [k, v] : found.items()) syn[k] = v;
    rep.synthesis = syn;

    if (options.write_files) {
        std::filesystem::create_directories(sc.output_dir);
        open_out(sc.output_dir / "report.json") << rep.to_json(sc).dump(2) << '\n';
        open_out(sc.output_dir / "timings.json") << rep.timings().dump(2) << '\n';
        if (rep.artifacts.train && rep.artifacts.train->solution) emit_plot_data(rep.artifacts, sc.output_dir);
    }
    return rep;
}

double predicted_phase_shift(const NSolitonSolution& sol, std::size_t k) {
    if (k >= sol.size()) throw DomainError("soliton index out of range");
    const auto sols = sol.solitons();
    double sum = 0.0;
    for (std::size_t j = 0; j < sol.size(); ++j) {
        if (j == k) continue;
        sum += (sols[j].alpha > sols[k].alpha ? 1.0 : -1.0) * sol.log_pair(k, j);
    }
    return sum / sols[k].alpha;
}

std::vector<PhaseShiftFit> fit_phase_shifts(const NSolitonSolution& sol, std::size_t samples) {
    if (sol.size() == 0) throw DomainError("phase shifts need at least one soliton");
    if (samples < 2) throw DomainError("phase shift fit needs at least two samples per window");
    const auto sols = sol.solitons();
    const std::size_t n = sol.size();

    // collisions happen in [first, last]; the windows keep every pair apart by
    // at least `gap` spatial units
    double first = 0.0, last = 0.0, slowest = HUGE_VAL;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dv = sols[i].alpha * sols[i].alpha - sols[j].alpha * sols[j].alpha;
            const double tc = (sols[j].s - sols[i].s) / dv;
            first = any ? std::min(first, tc) : tc;
            last = any ? std::max(last, tc) : tc;
            slowest = std::min(slowest, std::abs(dv));
            any = true;
        }
    const double gap = 25.0 / sol.min_alpha();
    const double tau = any ? gap / slowest : 1.0;
    const double reference = 0.5 * (first + last);
    const auto before = linspace(first - 2.0 * tau, first - tau, samples);
    const auto after = linspace(last + tau, last + 2.0 * tau, samples);

    std::vector<PhaseShiftFit> fits(n);
    parallel_for(n, [&](std::size_t k) {
        const double a = sols[k].alpha;
        double pre = 0.0, post = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            (sols[j].alpha > a ? post : pre) += sol.log_pair(k, j) / a;
        }
        PhaseShiftFit f;
        f.soliton = k;
        f.alpha = a;
        f.predicted = predicted_phase_shift(sol, k);
        for (double t : before) {
            f.before.t.push_back(t);
            f.before.x.push_back(peak_near(sol, sols[k].s + a * a * t + pre, t));
        }
        for (double t : after) {
            f.after.t.push_back(t);
            f.after.x.push_back(peak_near(sol, sols[k].s + a * a * t + post, t));
        }
        const auto [c0, v0] = fit_line(f.before);
        const auto [c1, v1] = fit_line(f.after);
        f.speed_before = v0;
        f.speed_after = v1;
        f.shift = (c1 + v1 * reference) - (c0 + v0 * reference);
        fits[k] = std::move(f);
    });
    return fits;
}

void emit_plot_data(const RunArtifacts& a, const std::filesystem::path& dir) {
    if (!a.train || !a.train->solution) throw DomainError("missing artifacts: the run produced no solution");
    std::filesystem::create_directories(dir);
    const auto& spec = a.train->spec;
    {
        auto out = open_out(dir / "snapshots.csv");
        write_grid_csv(out, sample_field(*a.train->solution, linspace(0.0, spec.L, 101), linspace(0.0, spec.T, 51)));
    }
    for (const auto& [scale, rep] : a.exits) {
        auto out = open_out(dir / (std::string("trajectories_") + to_string(scale) + ".csv"));
        write_trajectories_csv(out, rep.trajectories);
    }
    if (a.replay) {
        auto out = open_out(dir / "replay.csv");
        write_grid_csv(out, a.replay->field);
    }
}

void emit_phase_shift_data(const NSolitonSolution& sol, const std::filesystem::path& dir) {
    const auto fits = fit_phase_shifts(sol);
    std::filesystem::create_directories(dir);
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (const auto& f : fits)
        for (const auto* tr : {&f.before, &f.after})
            for (double x : tr->x) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
    const double pad = 10.0 / sol.min_alpha();
    const double t0 = fits.front().before.t.front(), t1 = fits.front().after.t.back();
    {
        auto out = open_out(dir / "snapshots.csv");
        write_grid_csv(out, sample_field(sol, linspace(lo - pad, hi + pad, 401), linspace(t0, t1, 81)));
    }
    auto peaks = open_out(dir / "peaks.csv");
    peaks << "soliton,phase,t,x\n";
    for (const auto& f : fits) {
        for (std::size_t i = 0; i < f.before.t.size(); ++i)
            peaks << f.soliton << ",before," << format(f.before.t[i]) << ',' << format(f.before.x[i]) << '\n';
        for (std::size_t i = 0; i < f.after.t.size(); ++i)
            peaks << f.soliton << ",after," << format(f.after.t[i]) << ',' << format(f.after.x[i]) << '\n';
    }
    auto shifts = open_out(dir / "shifts.csv");
    shifts << "soliton,alpha,fitted,predicted\n";
    for (const auto& f : fits)
        shifts << f.soliton << ',' << format(f.alpha) << ',' << format(f.shift) << ',' << format(f.predicted) << '\n';
}

} // namespace solflow
