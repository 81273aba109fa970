#pragma once

#include <optional>
#include <vector>

#include "somp/kernels.hpp"
#include "somp/signal.hpp"
#include "somp/types.hpp"

namespace somp {

/// Weighted dictionary: atom(tau)_l = w_l exp(2 pi j l tau) with
/// w_l = sqrt(sigma_l) * mask_l. All solver inner products run over the
/// observed indices, so the kernel closed form is never assumed under a mask.
class WeightedDict {
  public:
    WeightedDict(const Preconditioner& pc, const ObservationMask* mask = nullptr);

    int n() const { return n_; }
    const std::vector<double>& weights() const { return w_; }
    /// sum over observed l of sigma_l; equals 1 for a full mask. This is the
    /// squared atom norm and the natural correlation scale.
    double observed_sigma_sum() const { return sigma_obs_; }

    void fill_atom(double tau, std::vector<cd>& out) const;
    /// d/dtau atom: w_l * (2 pi j l) * exp(2 pi j l tau).
    void fill_datom(double tau, std::vector<cd>& out) const;

    /// Weighted samples w .* y.
    std::vector<cd> weigh(const SampleVector& y) const;

  private:
    int n_;
    std::vector<double> w_;
    double sigma_obs_;
};

struct SolverConfig {
    double gamma = -1.0;     // stopping threshold; must be set explicitly
    int n_grid = 0;          // >= 2n+1
    double eta0 = 0.2;       // effective sliding stepsize is eta0 / n^2
    int t_slide = 200;       // sliding iterations per OMP round
    int max_spikes = 32;     // iteration cap
    Preconditioner pc;
    double cond_limit = 1e12;

    void validate() const;
};

/// Least-squares system over the current frequency set.
struct GramSystem {
    std::vector<double> omegas;
    std::vector<cd> a;       // t x t, row-major, Hermitian
    std::vector<cd> fy;      // <f(omega_i), y>
    std::vector<cd> coeffs;  // solution of A c = fy
    double cond = 1.0;

    int size() const { return static_cast<int>(omegas.size()); }
};

enum class StopReason { threshold, cap, stall };

struct RoundTrace {
    double grid_omega = 0.0;          // argmax frequency this round
    double correlation = 0.0;         // its correlation magnitude
    std::vector<double> pre_slide;    // frequencies before sliding
    std::vector<double> post_slide;   // frequencies after sliding
    double residual_norm = 0.0;
    int slide_steps = 0;
    bool slide_stalled = false;
};

struct IterationTrace {
    std::vector<RoundTrace> rounds;
};

struct RecoveryResult {
    std::vector<double> omegas;
    std::vector<cd> coeffs;
    IterationTrace trace;
    StopReason stopped = StopReason::threshold;
};

struct SlidingOutcome {
    std::vector<double> omegas;
    int steps = 0;
    bool stalled = false;
};

/// |<f(k/n_grid), r>| for k = 0..n_grid-1 via one length-n_grid DFT of the
/// sqrt(sigma)-weighted residual. The residual must already be preconditioned.
std::vector<double> grid_correlations(const SampleVector& residual, const Preconditioner& pc,
                                      int n_grid);

/// First index attaining the maximum (ties break to the lowest index).
std::pair<int, double> argmax_correlation(const std::vector<double>& correlations);

/// Assemble and solve the masked normal equations at the given frequencies.
/// y is raw (unweighted); weighting happens inside. min_gap <= 0 selects the
/// default duplicate guard 1/(10 n (2n+1)).
GramSystem solve_gram(const std::vector<double>& omegas, const SampleVector& y,
                      const Preconditioner& pc, double cond_limit,
                      const ObservationMask* mask = nullptr, double min_gap = 0.0);

/// r = w.*y - F(omega) c, recomputed from y (not incrementally).
SampleVector residual(const SampleVector& y, const GramSystem& gs, const WeightedDict& dict);

/// Gradient of 2 L_t(omega): component m is 2 Re[conj(c_m) z(omega_m)^* (P-I) y].
std::vector<double> sliding_gradient(const std::vector<double>& omegas, const SampleVector& y,
                                     const Preconditioner& pc,
                                     const ObservationMask* mask = nullptr);

/// Weighted gradient descent on 2 L_t with per-coordinate weights 1/|w_i|^2
/// fixed from the initial least-squares fit, stepsize eta0/n^2, at most T
/// steps, early exit when the step inf-norm drops below 1e-14.
SlidingOutcome sliding(const std::vector<double>& omega0, const SampleVector& y,
                       const Preconditioner& pc, double eta0, int T,
                       const ObservationMask* mask = nullptr, double cond_limit = 1e12);

/// Continuous OMP over the frequency grid (Dirichlet correlations when
/// alpha = 1, preconditioned otherwise).
RecoveryResult omp(const SampleVector& y, const SolverConfig& cfg,
                   const ObservationMask* mask = nullptr);

/// OMP with the full frequency vector refined by sliding after every append.
RecoveryResult sliding_omp(const SampleVector& y, const SolverConfig& cfg,
                           const ObservationMask* mask = nullptr);

/// Stopping threshold from an amplitude floor: gamma = 0.5 * Ktilde(0) * floor,
/// where Ktilde(0) is the observed sigma mass (the correlation of a unit spike
/// with its own atom under the mask).
double gamma_from_floor(double amplitude_floor, const Preconditioner& pc,
                        const ObservationMask* mask = nullptr);

}  // namespace somp
