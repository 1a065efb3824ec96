#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tetris/pipeline.hpp"
#include "tetris/signal_model.hpp"
#include "tetris/tetris.hpp"

namespace tetris::acceptance {

// Recorded from the first oracle runs and regression-tested.
inline constexpr double kExpansionC = 38.54;         // residual / delta^3 at delta = 0.1
inline constexpr double kExpansionCSlack = 1.05;
inline constexpr double kImprovementFactor = 0.2025;  // TETRIS contrast / plain SST contrast, preset A
inline constexpr double kImprovementTolerance = 0.20;
inline constexpr int kRiavDirection = 1;            // sign of median(phi'+phi0') - median(phi'-phi0'), preset B

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;  // seconds, 0 for none
    std::string detail;
};

std::string format_line(const CriterionResult& r);

/// max |synthesize - sum of expansion components| for preset B with FM depth delta.
double expansion_residual(double delta, std::uint64_t seed = 1);

struct Contrast {
    double on = 0.0;
    double off = 0.0;
    double ratio = 0.0;
    std::string statistic;  // "median" or "mean"
};

/// On-curve / off-curve contrast of `mag` over D_1 U D_2 for the curves
/// phi_1', phi_1' +- phi_0' of `spec`, on the interior 80% of frames.
Contrast curve_contrast(const Eigen::MatrixXd& mag, const FreqAxis& axis, const TimeAxis& time,
                        const GanhmSpec& spec, const std::string& statistic);

struct SandwichCheck {
    std::string label;
    double worst_violation = 0.0;  // max over cells of distance outside [min_k, max_k]
    bool pass = false;
};

SandwichCheck check_sandwich(const TetrisOutput& out, const std::string& label);

class Suite {
public:
    explicit Suite(std::uint64_t seed = 1);

    CriterionResult run(int id);
    std::vector<CriterionResult> run_all();

    static constexpr int count = 10;
    static std::string name(int id);

private:
    struct Run {
        Preset preset;
        RealSignal signal;
        RespiratoryOutputs outputs;
    };
    const Run& pipeline_run(const std::string& preset);
    void record(const TetrisOutput& out, const std::string& label);

    CriterionResult expansion_oracle();
    CriterionResult toy_tfr();
    CriterionResult sst_round_trip();
    CriterionResult noise_decorrelation();
    CriterionResult tetris_denoising();
    CriterionResult riav_asymmetry();
    CriterionResult respiration_recovery();
    CriterionResult samd_exactness();
    CriterionResult ridge_optimality();
    CriterionResult power_mean_sandwich();

    std::uint64_t seed_;
    std::map<std::string, std::unique_ptr<Run>> runs_;
    std::vector<SandwichCheck> sandwiches_;
};

}  // namespace tetris::acceptance
