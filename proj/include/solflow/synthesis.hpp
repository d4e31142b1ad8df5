#pragma once

// Soliton-train parameters for the Lagrangian controllability construction:
// the soliton count, the amplitude ladder, the phases, and a search over the
// largest amplitude parameter that certifies the resulting train.

#include "solflow/hirota.hpp"
#include "solflow/train.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace solflow {

/// ceil(4 L alpha1^2 / ln(sqrt(2 alpha1)(1 + sqrt(1 - 1/(2 alpha1))))).
[[nodiscard]] std::size_t soliton_count(double alpha1, double L);

/// alpha_i = alpha1 - eps (i-1)/(N-1), i = 1..N; {alpha1} when N = 1.
[[nodiscard]] std::vector<double> amplitude_ladder(double alpha1, std::size_t N, double eps);

/// s_i = -alpha1^2 eps1 (N+1-i)/(N+1) + (i/(N+1)) (L - (alpha1 - eps)^2 (T - eps2)).
[[nodiscard]] std::vector<double> phases(const SynthesisSpec& spec, double alpha1, std::size_t N);

/// Speed, cond1 and cond2 margins for the given ladder and phases.
[[nodiscard]] ConditionReport check_conditions(const SynthesisSpec& spec, const std::vector<double>& alphas,
                                               const std::vector<double>& phases);

/// Train for a fixed alpha1. The solution is left null when N exceeds
/// options.max_solitons.
[[nodiscard]] SolitonTrain build_train(const SynthesisSpec& spec, double alpha1,
                                       const SolutionOptions& options = {});

struct TailNorms {
    double start = 0.0;  ///< max over [0, eps1]
    double end = 0.0;    ///< max over [T - eps2, T]
};

/// Largest H^2(0,L) norm over `samples` equispaced times in each quiet window.
[[nodiscard]] TailNorms tail_norms(const SolitonTrain& train, std::size_t samples = 16);

struct InteractionSweep {
    double min_value = 1.0;  ///< min over (k,t) of A_k(t)
    double min_log = 0.0;    ///< its logarithm, finite where A_k underflows
    std::size_t k = 0;
    double t = 0.0;
};

/// A_k(t) for every k on `samples` equispaced times in [0,T].
[[nodiscard]] InteractionSweep interaction_sweep(const SolitonTrain& train, std::size_t samples = 64);

struct SearchOptions {
    double growth = 1.25;
    double alpha_max = 512.0;
    std::size_t tail_samples = 16;
    std::size_t interaction_samples = 64;
    SolutionOptions solution;
};

/// One candidate of the alpha1 search.
struct SearchStep {
    double alpha1 = 0.0;
    std::size_t N = 0;
    ConditionReport report;  ///< tail norms and min A_k filled when evaluated
    bool evaluated = false;  ///< false when N exceeds the soliton cap
    bool tails_ok = false;   ///< both tail norms below delta
    std::string failed;      ///< first failing clause, empty on success
};

struct SynthesisResult {
    SolitonTrain train;
    std::vector<SearchStep> trace;
};

/// Raised when no candidate up to alpha_max passes every clause. Carries the
/// full trace; best() is the evaluated step with the fewest failing clauses.
class SearchExhausted : public std::runtime_error {
public:
    SearchExhausted(const std::string& what, std::vector<SearchStep> trace);
    [[nodiscard]] const std::vector<SearchStep>& trace() const { return trace_; }
    [[nodiscard]] std::optional<SearchStep> best() const;

private:
    std::vector<SearchStep> trace_;
};

/// Evaluates every clause for one candidate: conditions, tails < delta, and
/// min A_k >= 1/2.
[[nodiscard]] SearchStep evaluate_candidate(const SynthesisSpec& spec, double alpha1,
                                            const SearchOptions& options = {});

/// With spec.alpha1 set, builds and certifies that train (never throws on a
/// failing clause). Otherwise searches alpha1 on the geometric grid starting at
/// max(1, sqrt(L/(T - eps1 - eps2)) + eps) and returns the first candidate that
/// passes every clause.
[[nodiscard]] SynthesisResult synthesize(const SynthesisSpec& spec, const SearchOptions& options = {});

/// Geometric alpha1 grid used by the search.
[[nodiscard]] std::vector<double> search_grid(const SynthesisSpec& spec, const SearchOptions& options = {});

} // namespace solflow
