#pragma once

#include "infobound/bounds.hpp"
#include "infobound/cli/json_io.hpp"
#include "infobound/model.hpp"
#include "infobound/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace infobound::cli {

/// Bad or inconsistent configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelSpec {
    std::string id;
    json params = json::object();
};

struct PriorSpec {
    std::string id = "uniform";  ///< uniform | constant | beta | gaussian
    double a = 2.0;
    double b = 2.0;
    double c = 1.0;
    std::optional<std::vector<double>> mean;
    std::optional<std::vector<double>> sd;
    Normalization normalization = Normalization::OnGrid;
};

struct McConfig {
    std::size_t trials = 1000;
    std::size_t obs_per_trial = 1;
    std::optional<std::uint64_t> seed;
    std::string estimator = "mle";
};

struct SweepConfig {
    std::vector<double> eps_out;
    double theta = 0.0;  ///< 0 picks the middle bin
    std::size_t obs_per_trial = 2;
};

struct NumericsConfig {
    double h_fd = kFdRelStep;
    double h_c = kCurvatureRelStep;
};

struct ExperimentConfig {
    ModelSpec model;
    PriorSpec prior;
    std::optional<std::vector<double>> theta;
    std::vector<std::vector<double>> theta_grid;
    std::vector<BoundKind> bounds;
    bool bounds_given = false;
    std::optional<std::string> bias;  ///< estimator spec whose exact bias feeds crlb_biased
    BiasJacobianMode bias_jacobian = BiasJacobianMode::Diagonal;
    BarankinSearch barankin;
    McConfig mc;
    SweepConfig sweep;
    NumericsConfig numerics;
    std::optional<std::string> output_dir;
    std::string format = "csv";
};

/// Strict parse: unknown keys and wrongly typed values raise ConfigError.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Raises ConfigError("unknown model ...") for ids outside the registry.
FiniteModel build_model(const ModelSpec& spec);
Prior build_prior(const PriorSpec& spec, const ParameterSpace& space);

/// Every θ the config asks for: `theta` first, then `theta_grid`.
std::vector<Vector> evaluation_points(const ExperimentConfig& config);

}  // namespace infobound::cli
