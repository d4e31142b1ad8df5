#include "solflow/synthesis.hpp"

#include "solflow/analysis.hpp"
#include "solflow/error.hpp"
#include "solflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace solflow {
namespace {

double width_log(double alpha) {
    return std::log(std::sqrt(2.0 * alpha) * (1.0 + std::sqrt(1.0 - 1.0 / (2.0 * alpha))));
}

std::vector<double> window_times(double lo, double hi, std::size_t samples) {
    std::vector<double> ts(samples);
    for (std::size_t i = 0; i < samples; ++i)
        ts[i] = samples == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(samples - 1);
    return ts;
}

int failures(const SearchStep& s) {
    const auto& r = s.report;
    int n = r.feasible() ? 0 : 1;
    if (!s.tails_ok) ++n;
    if (!r.min_interaction_factor || *r.min_interaction_factor < 0.5) ++n;
    return n;
}

} // namespace

std::size_t soliton_count(double alpha1, double L) {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("L must be positive");
    if (!(alpha1 > 0.5) || !std::isfinite(alpha1)) throw DomainError("soliton count needs alpha1 > 1/2");
    const double lg = width_log(alpha1);
    if (!(lg > 0.0)) throw DomainError("width logarithm is not positive");
    return static_cast<std::size_t>(std::ceil(4.0 * L * alpha1 * alpha1 / lg));
}

std::vector<double> amplitude_ladder(double alpha1, std::size_t N, double eps) {
    if (N == 0) throw DomainError("ladder needs at least one soliton");
    if (N == 1) return {alpha1};
    if (!(alpha1 > eps)) throw DomainError("alpha1 must exceed the ladder spread");
    std::vector<double> a(N);
    for (std::size_t i = 0; i < N; ++i)
        a[i] = alpha1 - eps * static_cast<double>(i) / static_cast<double>(N - 1);
    return a;
}

std::vector<double> phases(const SynthesisSpec& spec, double alpha1, std::size_t N) {
    if (N == 0) throw DomainError("phases need at least one soliton");
    if (!(alpha1 > spec.eps_ladder)) throw DomainError("alpha1 must exceed the ladder spread");
    const double n1 = static_cast<double>(N + 1);
    const double slow = alpha1 - spec.eps_ladder;
    const double far = spec.L - slow * slow * (spec.T - spec.eps2);
    std::vector<double> s(N);
    for (std::size_t i = 1; i <= N; ++i) {
        const double di = static_cast<double>(i);
        s[i - 1] = -alpha1 * alpha1 * spec.eps1 * (n1 - di) / n1 + (di / n1) * far;
    }
    return s;
}

ConditionReport check_conditions(const SynthesisSpec& spec, const std::vector<double>& alphas,
                                 const std::vector<double>& phases) {
    if (alphas.empty() || alphas.size() != phases.size())
        throw DomainError("ladder and phases must be nonempty and of equal length");
    ConditionReport r;
    const double slow = alphas.front() - spec.eps_ladder;
    r.speed_margin = slow * slow - spec.L / (spec.T - spec.eps2);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        const double a2 = alphas[i] * alphas[i];
        r.cond1_margins.push_back(a2 * spec.eps1 + phases[i]);
        r.cond2_margins.push_back(phases[i] - spec.L + a2 * (spec.T - spec.eps2));
    }
    return r;
}

SolitonTrain build_train(const SynthesisSpec& spec, double alpha1, const SolutionOptions& options) {
    validate(spec);
    SolitonTrain train;
    train.spec = spec;
    train.spec.alpha1 = alpha1;
    train.alpha1 = alpha1;
    const std::size_t n = soliton_count(alpha1, spec.L);
    train.alphas = amplitude_ladder(alpha1, n, spec.eps_ladder);
    train.phases = phases(spec, alpha1, n);
    train.report = check_conditions(spec, train.alphas, train.phases);
    if (n <= options.max_solitons) {
        std::vector<Soliton> solitons(n);
        for (std::size_t i = 0; i < n; ++i) solitons[i] = {train.alphas[i], train.phases[i]};
        train.solution = std::make_shared<const NSolitonSolution>(std::move(solitons), options);
    }
    return train;
}

TailNorms tail_norms(const SolitonTrain& train, std::size_t samples) {
    const auto& sol = train.field();
    const auto& sp = train.spec;
    auto ts = window_times(0.0, sp.eps1, samples);
    const auto te = window_times(sp.T - sp.eps2, sp.T, samples);
    ts.insert(ts.end(), te.begin(), te.end());
    std::vector<double> norms(ts.size());
    parallel_for(ts.size(), [&](std::size_t i) { norms[i] = sobolev_norm(sol, ts[i], sp.L, 2); });
    TailNorms out;
    out.start = *std::max_element(norms.begin(), norms.begin() + static_cast<std::ptrdiff_t>(samples));
    out.end = *std::max_element(norms.begin() + static_cast<std::ptrdiff_t>(samples), norms.end());
    return out;
}

InteractionSweep interaction_sweep(const SolitonTrain& train, std::size_t samples) {
    const auto& sol = train.field();
    const auto ts = window_times(0.0, train.spec.T, samples);
    const std::size_t n = sol.size();
    std::vector<double> values(n * ts.size());
    parallel_for(values.size(),
                 [&](std::size_t i) { values[i] = log_interaction_factor(sol, i % n, ts[i / n]); });
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {std::exp(*it), *it, idx % n, ts[idx / n]};
}

SearchStep evaluate_candidate(const SynthesisSpec& spec, double alpha1, const SearchOptions& options) {
    SearchStep step;
    step.alpha1 = alpha1;
    const SolitonTrain train = build_train(spec, alpha1, options.solution);
    step.N = train.size();
    step.report = train.report;
    if (!train.report.feasible()) step.failed = "conditions";
    if (!train.solution) {
        if (step.failed.empty()) step.failed = "soliton cap";
        return step;
    }
    step.evaluated = true;
    const TailNorms tails = tail_norms(train, options.tail_samples);
    step.report.tail_norm_start = tails.start;
    step.report.tail_norm_end = tails.end;
    const InteractionSweep sweep = interaction_sweep(train, options.interaction_samples);
    step.report.min_interaction_factor = sweep.min_value;
    step.report.min_log_interaction_factor = sweep.min_log;
    step.tails_ok = std::max(tails.start, tails.end) < spec.delta;
    if (step.failed.empty() && !step.tails_ok) step.failed = "tails";
    if (step.failed.empty() && !(*step.report.min_interaction_factor >= 0.5)) step.failed = "interaction";
    return step;
}

std::vector<double> search_grid(const SynthesisSpec& spec, const SearchOptions& options) {
    validate(spec);
    if (!(options.growth > 1.0)) throw ConfigError("search growth factor must exceed 1");
    std::vector<double> grid;
    const double start =
        std::max(1.0, std::sqrt(spec.L / (spec.T - spec.eps1 - spec.eps2)) + spec.eps_ladder);
    for (double a = start; a <= options.alpha_max; a *= options.growth) grid.push_back(a);
    return grid;
}

SearchExhausted::SearchExhausted(const std::string& what, std::vector<SearchStep> trace)
    : std::runtime_error(what), trace_(std::move(trace)) {}

std::optional<SearchStep> SearchExhausted::best() const {
    std::optional<SearchStep> best;
    for (const auto& s : trace_) {
        if (!s.evaluated) continue;
        if (!best || failures(s) < failures(*best) ||
            (failures(s) == failures(*best) &&
             s.report.min_log_interaction_factor.value_or(-HUGE_VAL) >
                 best->report.min_log_interaction_factor.value_or(-HUGE_VAL)))
            best = s;
    }
    return best;
}

SynthesisResult synthesize(const SynthesisSpec& spec, const SearchOptions& options) {
    validate(spec);
    SynthesisResult result;
    if (spec.alpha1) {
        result.train = build_train(spec, *spec.alpha1, options.solution);
        auto step = evaluate_candidate(spec, *spec.alpha1, options);
        result.train.report = step.report;
        result.trace.push_back(std::move(step));
        return result;
    }
    for (double a : search_grid(spec, options)) {
        // candidates past the soliton cap are recorded without evaluation
        auto step = evaluate_candidate(spec, a, options);
        const bool ok = step.failed.empty();
        result.trace.push_back(step);
        if (ok) {
            result.train = build_train(spec, a, options.solution);
            result.train.report = step.report;
            return result;
        }
    }
    throw SearchExhausted("no alpha1 up to " + std::to_string(options.alpha_max) + " passes every clause",
                          std::move(result.trace));
}

} // namespace solflow
