#pragma once

#include <cstdint>
#include <vector>

#include "somp/types.hpp"

namespace somp {

/// Ground truth: frequencies tau_i on the unit circle with nonzero complex
/// amplitudes. Immutable by convention once validated.
struct SpikeTrain {
    std::vector<double> taus;  // each in [0,1), pairwise distinct
    std::vector<cd> amps;      // same length, all nonzero

    int size() const { return static_cast<int>(taus.size()); }
    void validate() const;
};

/// Uniform samples y_l, l = -n..n. values[l + n] holds index l.
struct SampleVector {
    int n = 0;
    std::vector<cd> values;      // length 2n+1
    bool preconditioned = false; // sqrt(sigma) weighting already applied

    void validate() const;
};

/// Symmetric Bernoulli-p observation pattern over l = -n..n.
struct ObservationMask {
    int n = 0;
    std::vector<std::uint8_t> observed;  // length 2n+1, observed[l+n]
    double p = 1.0;

    bool at(int ell) const { return observed[static_cast<std::size_t>(ell + n)] != 0; }
    int count() const;
    void validate() const;
};

/// Injective assignment of estimates to truth frequencies plus the wrap-around
/// and amplitude-weighted error summaries.
struct Matching {
    std::vector<int> perm;               // perm[i] = truth index for estimate i
    std::vector<double> errors;          // |omega_i - tau_{T(i)}| wrap-around
    std::vector<double> weighted_errors; // |x_{T(i)}| * error_i
    double max_error = 0.0;              // eps_t
    double max_weighted_error = 0.0;     // eps_{x,t}
};

/// values[l] = sum_k x_k exp(2 pi j tau_k l) for l = -n..n.
SampleVector synthesize(const SpikeTrain& spikes, int n);

/// Minimum wrap-around distance over distinct pairs; needs s >= 2.
double min_separation(const SpikeTrain& spikes);

/// max |x_i| / min |x_i|.
double dynamic_range(const SpikeTrain& spikes);

/// One Bernoulli(p) draw per index 0..n, mirrored to negative indices.
/// Index 0 is its own mirror and gets a single draw.
ObservationMask bernoulli_symmetric_mask(int n, double p, std::uint64_t seed);

/// Symmetric mask with exactly `count` observed indices (pairs drawn without
/// replacement; index 0 is used iff count is odd).
ObservationMask exact_count_symmetric_mask(int n, int count, std::uint64_t seed);

/// Zero the unobserved entries; observed entries pass through unchanged.
SampleVector apply_mask(const SampleVector& y, const ObservationMask& mask);

/// Greedy nearest-truth assignment, ascending error, injective in the truth
/// index. Throws MatchingError when there are more estimates than truths.
Matching match_frequencies(const std::vector<double>& estimates, const SpikeTrain& truth);

}  // namespace somp
