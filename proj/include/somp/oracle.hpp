#pragma once

#include <cstdint>
#include <vector>

#include "somp/solver.hpp"

namespace somp {

/// 1-D slice of the sliding loss: prefix frequencies held fixed, the last
/// coordinate swept over [0, 1).
struct LandscapeScan {
    std::vector<double> grid;
    std::vector<double> values;
};

struct ConcentrationTrial {
    int trial = 0;
    int q = 0;            // derivative order 0, 1, 2
    double sup_dev = 0.0; // sup_tau (1/n^q) |Ktilde^(q) - p K^(q)|
    double ratio = 0.0;   // sup_dev / sqrt(p/n * log n)
};

struct ConcentrationReport {
    int n = 0;
    double p = 0.0;
    std::vector<ConcentrationTrial> trials;
    double median_sup_dev(int q) const;
    double max_ratio(int q) const;
};

/// Adversarial 3-spike construction: x1 = 2 x2, third amplitude small, gaps
/// Delta1 = l1/n and Delta2 = L * Delta1, frequencies placed off-grid.
struct AdversarialInstance {
    SpikeTrain spikes;
    int ell1 = 0;
    double L = 0.0;
    double failure_bound = 0.0;  // L/n, the claimed third-frequency error scale
};

/// (1/2) || w.*y - F(omega) c ||^2 with c the least-squares fit; the scalar
/// behind every finite-difference check. Empty omegas gives (1/2)||w.*y||^2.
double dense_loss(const std::vector<double>& omegas, const SampleVector& y,
                  const Preconditioner& pc, const ObservationMask* mask = nullptr);

/// Central differences of 2*dense_loss per coordinate. step in [1e-9, 1e-4].
std::vector<double> finite_diff_gradient(const std::vector<double>& omegas,
                                         const SampleVector& y, const Preconditioner& pc,
                                         double step, const ObservationMask* mask = nullptr);

/// Brute-force |<f(k/n_grid), r>| by direct double summation; the reference
/// for the FFT path in grid_correlations.
std::vector<double> naive_grid_correlations(const SampleVector& residual,
                                            const Preconditioner& pc, int n_grid);

/// Sweep the last coordinate of the sliding loss over a uniform grid.
LandscapeScan scan_loss_1d(const std::vector<double>& prefix, const SampleVector& y,
                           const Preconditioner& pc, int grid_size,
                           const ObservationMask* mask = nullptr);

/// Refine a scan minimum to sub-grid accuracy (local golden-section descent).
double refine_loss_minimum(const std::vector<double>& prefix, const SampleVector& y,
                           const Preconditioner& pc, double coarse_min, double radius,
                           const ObservationMask* mask = nullptr);

/// Deterministic 3-spike instance that defeats plain un-preconditioned OMP:
/// requires dyn ratio > c and returns separation n*Delta = l1 = floor(c)+1.
AdversarialInstance adversarial_instance(double c, double L, int n);

/// Monte-Carlo sup-deviation of the subsampled kernel from p*K for
/// q = 0, 1, 2 over a 10n grid.
ConcentrationReport concentration_probe(int n, double p, int trials, std::uint64_t seed);

}  // namespace somp
