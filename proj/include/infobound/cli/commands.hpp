#pragma once

#include "infobound/cli/config.hpp"
#include "infobound/cli/json_io.hpp"

#include <string>
#include <vector>

namespace infobound::cli {

enum ExitCode : int { kOk = 0, kPropertyFailure = 1, kConfigError = 2, kNumericalError = 3 };

/// G^(e), J^λ, G^(I) and the divergence metric at config.theta.
json fim_report(const ExperimentConfig& config);

BoundsTable bounds_table(const ExperimentConfig& config);

/// CRLB, Barankin and MC MSE of the configured estimator along sweep.eps_out
/// for the pulse model with sweep.obs_per_trial observations.
std::vector<SweepRow> sweep_rows(const ExperimentConfig& config, unsigned threads);

struct VerifyReport {
    json doc;
    bool pass = true;
    std::vector<std::string> failed;
};

/// Reduced-scale property suite. Without a model_id it covers bernoulli,
/// categorical (d = 3) and pulse (d = 16) under uniform, beta and gaussian priors.
VerifyReport verify_report(const ExperimentConfig& config, unsigned threads);

/// infobound <fim|bounds|sweep|verify> [--config path] [--out dir] [--seed n]
///           [--format csv|json] [--threads n]
/// Returns 0 on success, 1 on a failed property, 2 on config errors and 3 on
/// numerical errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace infobound::cli
