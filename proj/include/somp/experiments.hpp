#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "somp/oracle.hpp"
#include "somp/solver.hpp"

namespace somp {

enum class Algo { omp, sliding_omp };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& name);

/// One solver entry in a sweep: pursuit variant plus kernel order.
struct AlgoSpec {
    Algo algo = Algo::sliding_omp;
    int alpha = 4;
    std::string label() const;
};

/// Validated experiment description. Parsed from JSON (unknown keys are
/// rejected) and/or CLI flags.
struct ExperimentConfig {
    std::string mode;  // synth | recover | sweep-dyn | sweep-sep | kernel-table |
                       // certify | adversarial | probe-concentration

    // instance
    int n = 394;
    int s = 5;
    double n_delta = 1.15;           // separation in units of 1/n
    std::string amplitude_rule = "fig4";  // fig4 | fig6-v0.5 | fig6-v1 | fig6-v1.5 | unit
    double u = 1.0;                  // dyn knob for the fig4 rule
    int alpha = 4;
    double p = 1.0;                  // Bernoulli observation rate
    int exact_count = 0;             // >0: exact-count mask with this many samples
    std::uint64_t seed = 0;
    int seeds = 10;                  // number of seeds in sweeps

    // solver
    double gamma = -1.0;             // <0: derive from amplitude floor
    int n_grid = 0;                  // 0: scaled default round(1800 n / 394)
    double eta0 = 0.2;
    int t_slide = 200;
    int max_spikes = 0;              // 0: default 2s
    double cond_limit = 1e12;

    // sweep shapes
    std::vector<double> u_list = {1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> n_delta_list = {0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
    std::vector<double> v_list = {0.5, 1.0, 1.5};
    std::vector<AlgoSpec> algos;     // empty: per-mode default set

    // adversarial generator
    double adv_c = 2.0;
    double adv_L = 8.0;
    double widen = 10.0;

    // probe
    int trials = 50;

    // io
    std::string input_path;
    std::string out_path;
    bool exact_count_mask = false;
    bool strict = false;
    int workers = 0;                 // 0: hardware concurrency

    int effective_n_grid() const;
    int effective_max_spikes() const;
    void validate() const;
    std::string canonical_text() const;  // hashed into CSV metadata
};

ExperimentConfig parse_config_json(const std::string& json_text);

/// Deterministic instance for the dyn / separation sweeps: tau_i = (1+i) d/n
/// with d the separation target in units of 1/n, phases uniform on [0, 2pi).
SpikeTrain make_sweep_instance(int n, int s, double n_delta, const std::string& amplitude_rule,
                               double u_or_v, std::uint64_t seed);

struct SweepRow {
    double coord = 0.0;   // u, or nDelta
    double v = 0.0;       // fig6 amplitude knob (sweep-sep only)
    std::uint64_t seed = 0;
    std::string algo;
    int alpha = 0;
    int found = 0;
    double max_err = 0.0;
    bool recovered = false;  // max_err < 1e-4 with exactly s frequencies
    int rounds = 0;
    double wall_ms = 0.0;
};

/// The recovery criterion: every spike matched below this error.
inline constexpr double kRecoveryTol = 1e-4;

std::vector<SweepRow> run_sweep_dyn(const ExperimentConfig& cfg);
std::vector<SweepRow> run_sweep_separation(const ExperimentConfig& cfg);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_v,
                     const std::string& meta);

void emit_kernel_table(std::ostream& out, const std::vector<int>& alphas, int n, int resolution,
                       const std::string& meta);

void write_envelope_csv(std::ostream& out, const EnvelopeReport& rep, const std::string& meta);

void write_probe_csv(std::ostream& out, const ConcentrationReport& rep, const std::string& meta);

struct RecoverOutcome {
    RecoveryResult result;
    double wall_ms = 0.0;
};

/// Run one configured recovery over samples + mask.
RecoverOutcome run_recovery(const SampleVector& y, const ObservationMask& mask,
                            const ExperimentConfig& cfg, Algo algo, int alpha,
                            double amplitude_floor);

/// Bounded worker pool; jobs are independent and the output order is whatever
/// slot each job owns, so results are canonical regardless of scheduling.
void run_parallel(int workers, int jobs, const std::function<void(int)>& fn);

}  // namespace somp
