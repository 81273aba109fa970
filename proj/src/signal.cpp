#include "somp/signal.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "somp/rng.hpp"

namespace somp {

void SpikeTrain::validate() const {
    if (taus.empty() || taus.size() != amps.size())
        throw ParameterError("spike train needs matching non-empty taus/amps");
    for (double t : taus)
        if (!(t >= 0.0 && t < 1.0)) throw ParameterError("spike frequency outside [0,1)");
    for (const cd& a : amps)
        if (!(std::abs(a) > 0.0)) throw ParameterError("spike amplitude must be nonzero");
    for (std::size_t i = 0; i < taus.size(); ++i)
        for (std::size_t j = i + 1; j < taus.size(); ++j)
            if (taus[i] == taus[j]) throw ParameterError("spike frequencies must be distinct");
}

void SampleVector::validate() const {
    if (n < 1) throw ParameterError("half-bandwidth n must be >= 1");
    if (values.size() != static_cast<std::size_t>(2 * n + 1))
        throw DimensionError("sample vector must have length 2n+1");
}

int ObservationMask::count() const {
    int c = 0;
    for (auto b : observed) c += (b != 0);
    return c;
}

void ObservationMask::validate() const {
    if (n < 1) throw ParameterError("half-bandwidth n must be >= 1");
    if (observed.size() != static_cast<std::size_t>(2 * n + 1))
        throw DimensionError("mask must have length 2n+1");
    for (int l = 1; l <= n; ++l)
        if (observed[n + l] != observed[n - l])
            throw ParameterError("observation mask must be symmetric");
}

SampleVector synthesize(const SpikeTrain& spikes, int n) {
    spikes.validate();
    if (n < 1) throw ParameterError("half-bandwidth n must be >= 1");
    if (spikes.size() > 2 * n + 1)
        throw ParameterError("more spikes than samples (s must be <= 2n+1)");
    SampleVector out;
    out.n = n;
    out.values.assign(static_cast<std::size_t>(2 * n + 1), cd{0.0, 0.0});
    for (std::size_t k = 0; k < spikes.taus.size(); ++k) {
        const double tau = spikes.taus[k];
        const cd x = spikes.amps[k];
        const cd step = std::polar(1.0, kTwoPi * tau);
        // start at l = -n with an exactly reduced phase, then advance by
        // multiplication; resync periodically to stop phase drift.
        cd cur = std::polar(1.0, kTwoPi * std::remainder(-double(n) * tau, 1.0));
        for (int l = -n; l <= n; ++l) {
            if ((l + n) % 64 == 0)
                cur = std::polar(1.0, kTwoPi * std::remainder(double(l) * tau, 1.0));
            out.values[static_cast<std::size_t>(l + n)] += x * cur;
            cur *= step;
        }
    }
    return out;
}

double min_separation(const SpikeTrain& spikes) {
    spikes.validate();
    if (spikes.size() < 2) throw ParameterError("separation undefined for fewer than 2 spikes");
    double best = 0.5;
    for (std::size_t i = 0; i < spikes.taus.size(); ++i)
        for (std::size_t j = i + 1; j < spikes.taus.size(); ++j)
            best = std::min(best, wrap_dist(spikes.taus[i], spikes.taus[j]));
    return best;
}

double dynamic_range(const SpikeTrain& spikes) {
    spikes.validate();
    double lo = std::abs(spikes.amps[0]), hi = lo;
    for (const cd& a : spikes.amps) {
        lo = std::min(lo, std::abs(a));
        hi = std::max(hi, std::abs(a));
    }
    return hi / lo;
}

ObservationMask bernoulli_symmetric_mask(int n, double p, std::uint64_t seed) {
    if (n < 1) throw ParameterError("half-bandwidth n must be >= 1");
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("Bernoulli rate p must lie in (0,1]");
    ObservationMask m;
    m.n = n;
    m.p = p;
    m.observed.assign(static_cast<std::size_t>(2 * n + 1), 0);
    CounterRng rng(seed);
    for (int l = 0; l <= n; ++l) {
        bool on = rng.uniform(rng_stream::kMask, static_cast<std::uint64_t>(l)) < p;
        if (on) {
            m.observed[static_cast<std::size_t>(n + l)] = 1;
            m.observed[static_cast<std::size_t>(n - l)] = 1;
        }
    }
    return m;
}

ObservationMask exact_count_symmetric_mask(int n, int count, std::uint64_t seed) {
    if (n < 1) throw ParameterError("half-bandwidth n must be >= 1");
    if (count < 0 || count > 2 * n + 1) throw ParameterError("mask count out of range");
    ObservationMask m;
    m.n = n;
    m.p = double(count) / double(2 * n + 1);
    m.observed.assign(static_cast<std::size_t>(2 * n + 1), 0);
    const bool use_zero = (count % 2) == 1;
    if (use_zero) m.observed[static_cast<std::size_t>(n)] = 1;
    int pairs = count / 2;
    // partial Fisher-Yates over the positive indices 1..n
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
    CounterRng rng(seed);
    for (int i = 0; i < pairs; ++i) {
        std::uint32_t j =
            i + rng.below(rng_stream::kShuffle, static_cast<std::uint64_t>(i), n - i);
        std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
        int l = idx[static_cast<std::size_t>(i)];
        m.observed[static_cast<std::size_t>(n + l)] = 1;
        m.observed[static_cast<std::size_t>(n - l)] = 1;
    }
    return m;
}

SampleVector apply_mask(const SampleVector& y, const ObservationMask& mask) {
    y.validate();
    mask.validate();
    if (y.n != mask.n) throw DimensionError("sample/mask half-bandwidth mismatch");
    SampleVector out = y;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        if (!mask.observed[i]) out.values[i] = cd{0.0, 0.0};
    return out;
}

Matching match_frequencies(const std::vector<double>& estimates, const SpikeTrain& truth) {
    truth.validate();
    if (estimates.empty()) throw ParameterError("no estimates to match");
    const int ne = static_cast<int>(estimates.size());
    const int nt = truth.size();
    if (ne > nt) throw MatchingError("more estimates than truth frequencies");

    // Global greedy over all (estimate, truth) pairs by ascending error.
    // Ties break on indices for determinism.
    std::vector<std::tuple<double, int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(ne * nt));
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < nt; ++j)
            pairs.emplace_back(wrap_dist(estimates[static_cast<std::size_t>(i)],
                                         truth.taus[static_cast<std::size_t>(j)]),
                               i, j);
    std::sort(pairs.begin(), pairs.end());

    Matching m;
    m.perm.assign(static_cast<std::size_t>(ne), -1);
    m.errors.assign(static_cast<std::size_t>(ne), 0.0);
    m.weighted_errors.assign(static_cast<std::size_t>(ne), 0.0);
    std::vector<bool> est_used(static_cast<std::size_t>(ne), false);
    std::vector<bool> truth_used(static_cast<std::size_t>(nt), false);
    int assigned = 0;
    for (const auto& [d, i, j] : pairs) {
        if (est_used[static_cast<std::size_t>(i)] || truth_used[static_cast<std::size_t>(j)])
            continue;
        est_used[static_cast<std::size_t>(i)] = true;
        truth_used[static_cast<std::size_t>(j)] = true;
        m.perm[static_cast<std::size_t>(i)] = j;
        m.errors[static_cast<std::size_t>(i)] = d;
        m.weighted_errors[static_cast<std::size_t>(i)] =
            std::abs(truth.amps[static_cast<std::size_t>(j)]) * d;
        if (++assigned == ne) break;
    }
    for (int i = 0; i < ne; ++i) {
        m.max_error = std::max(m.max_error, m.errors[static_cast<std::size_t>(i)]);
        m.max_weighted_error =
            std::max(m.max_weighted_error, m.weighted_errors[static_cast<std::size_t>(i)]);
    }
    return m;
}

}  // namespace somp
