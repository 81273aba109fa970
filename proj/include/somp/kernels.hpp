#pragma once

#include <string>
#include <vector>

#include "somp/signal.hpp"
#include "somp/types.hpp"

namespace somp {

/// Kernel weights sigma over l = -n..n. sigma is the alpha-fold discrete
/// self-convolution of the flat window on {-floor(n/alpha)..floor(n/alpha)},
/// normalized to sum 1, so the induced kernel is
///   K(t) = [sin(M pi t) / (M sin(pi t))]^alpha,  M = 2*floor(n/alpha) + 1.
/// alpha = 1 is the flat Dirichlet window (no preconditioning), alpha = 2 the
/// triangular Fejer window, alpha = 4 the squared-Fejer window.
struct Preconditioner {
    int alpha = 4;  // one of {1, 2, 4}
    int n = 0;
    std::vector<double> sigma;  // length 2n+1, non-negative, symmetric, sums to 1

    /// Number of taps per convolved box; K(t) = [sin(M pi t)/(M sin pi t)]^alpha.
    int closed_form_order() const { return 2 * (n / alpha) + 1; }
};

/// K(t) together with its first two derivatives at one offset.
struct KernelEval {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// One certified inequality: worst margin (bound minus quantity, >= 0 means
/// the bound held) over the grid restricted to [lo, hi].
struct EnvelopeCheck {
    std::string id;
    double lo = 0.0;
    double hi = 0.0;
    double worst_margin = 0.0;
    bool pass = false;
};

struct EnvelopeReport {
    int alpha = 4;
    int n = 0;
    int grid_size = 0;
    std::vector<EnvelopeCheck> checks;
    bool all_pass() const;
};

Preconditioner build_sigma(int alpha, int n);

/// Closed-form K, K', K'' at |t| <= 1/2 (series expansion near t = 0).
KernelEval kernel_closed_form(int alpha, int n, double t);

/// Direct trigonometric sum sum_l sigma_l exp(2 pi j l t); imaginary part is
/// zero up to rounding by symmetry of sigma.
cd kernel_from_sigma(const Preconditioner& pc, double t);

/// Entrywise multiplication by sqrt(sigma). Not idempotent; a second
/// application on an already-preconditioned vector is rejected.
SampleVector precondition(const SampleVector& y, const Preconditioner& pc);

/// Numerically check the five squared-Fejer envelope bounds (alpha = 4) on a
/// grid, using the n+2 localization scale. Failures are reported, not thrown.
EnvelopeReport certify_envelopes(int n, int grid_size, int alpha = 4);

}  // namespace somp
