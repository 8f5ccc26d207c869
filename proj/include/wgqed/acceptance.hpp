#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "wgqed/config.hpp"
#include "wgqed/model.hpp"
#include "wgqed/series.hpp"

namespace wgqed {

struct CriterionResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
};

/// "[PASS] 3  title: detail"
std::string format_result(const CriterionResult& r);

/// Memoizes MPS and oracle runs so criteria sharing a configuration pay for
/// it once. The run name is not part of the key.
class RunCache {
 public:
  explicit RunCache(std::ostream* progress = nullptr) : progress_(progress) {}

  const ObservableSeries& mps(const RunSpec& spec);
  const ObservableSeries& oracle(const RunSpec& spec);
  Index computed_runs() const { return computed_; }

 private:
  struct Entry {
    RunSpec spec;
    std::unique_ptr<ObservableSeries> series;
  };
  const ObservableSeries* reusable(const RunSpec& spec) const;

  std::ostream* progress_;
  std::vector<Entry> mps_;
  std::map<std::string, std::unique_ptr<ObservableSeries>> oracle_;
  Index computed_ = 0;
};

/// Two-qubit |ee> run at the default step, snapped to divide tau.
RunSpec acceptance_spec(double tau, double phi, double horizon = 5.0);

/// Gate unitarity ||U^dag U - I||_max < 1e-10 for every listed gate.
CriterionResult check_unitarity(const std::vector<std::pair<std::string, StepGate>>& gates);
/// Gates of every preset run.
CriterionResult check_unitarity();

/// Residual < 1e-6 at every sample of every listed run.
CriterionResult check_conservation(
    const std::vector<std::pair<std::string, const ObservableSeries*>>& runs);

CriterionResult check_markov_analytic(RunCache& cache);   // 1
CriterionResult check_conservation(RunCache& cache);      // 2
CriterionResult check_oracle_equivalence(RunCache& cache);  // 3
CriterionResult check_delay_dependence(RunCache& cache);  // 4
CriterionResult check_trapping(RunCache& cache);          // 5
CriterionResult check_phase_structure(RunCache& cache);   // 6
CriterionResult check_correlation_onsets(RunCache& cache);  // 7
CriterionResult check_entropies(RunCache& cache);         // 8
CriterionResult check_four_qubit(RunCache& cache);        // 9
CriterionResult check_p1_sweep(RunCache& cache);          // 10
CriterionResult check_determinism();                      // 11

/// Every criterion in order. Each result is printed to `out` as soon as it
/// is known.
std::vector<CriterionResult> run_acceptance(RunCache& cache, std::ostream* out = nullptr);

}  // namespace wgqed
