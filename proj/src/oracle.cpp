#include "somp/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "somp/rng.hpp"

namespace somp {

namespace {

// golden-ratio fraction used to keep generated frequencies off every grid
constexpr double kOffGrid = 0.6180339887498949;

std::mutex& oracle_fftw_mutex() {
    static std::mutex m;
    return m;
}

void dft_forward(std::vector<cd>& buf) {
    const int N = static_cast<int>(buf.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(oracle_fftw_mutex());
        plan = fftw_plan_dft_1d(N, reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(oracle_fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

}  // namespace

double dense_loss(const std::vector<double>& omegas, const SampleVector& y,
                  const Preconditioner& pc, const ObservationMask* mask) {
    WeightedDict dict(pc, mask);
    std::vector<cd> rv = dict.weigh(y);
    if (!omegas.empty()) {
        GramSystem gs = solve_gram(omegas, y, pc, 1e15, mask);
        SampleVector r = residual(y, gs, dict);
        rv = r.values;
    }
    double acc = 0.0;
    for (const cd& v : rv) acc += std::norm(v);
    return 0.5 * acc;
}

std::vector<double> finite_diff_gradient(const std::vector<double>& omegas,
                                         const SampleVector& y, const Preconditioner& pc,
                                         double step, const ObservationMask* mask) {
    if (!(step >= 1e-9 && step <= 1e-4))
        throw ParameterError("finite-difference step must lie in [1e-9, 1e-4]");
    std::vector<double> g(omegas.size(), 0.0);
    for (std::size_t m = 0; m < omegas.size(); ++m) {
        std::vector<double> plus = omegas;
        std::vector<double> minus = omegas;
        plus[m] = wrap_unit(plus[m] + step);
        minus[m] = wrap_unit(minus[m] - step);
        double lp, lm;
        try {
            lp = dense_loss(plus, y, pc, mask);
            lm = dense_loss(minus, y, pc, mask);
        } catch (const Error& e) {
            throw IllConditionedError("finite differences failed at coordinate " +
                                      std::to_string(m) + ": " + e.what());
        }
        g[m] = (2.0 * lp - 2.0 * lm) / (2.0 * step);
    }
    return g;
}

std::vector<double> naive_grid_correlations(const SampleVector& residual,
                                            const Preconditioner& pc, int n_grid) {
    residual.validate();
    if (!residual.preconditioned)
        throw ParameterError("grid correlations expect a preconditioned residual");
    if (residual.n != pc.n) throw DimensionError("residual/preconditioner mismatch");
    if (n_grid < 2 * pc.n + 1) throw ParameterError("n_grid must be at least 2n+1");
    const int n = pc.n;
    std::vector<double> out(static_cast<std::size_t>(n_grid));
    for (int k = 0; k < n_grid; ++k) {
        const double tau = double(k) / double(n_grid);
        cd acc{0.0, 0.0};
        for (int l = -n; l <= n; ++l) {
            const double ph = -kTwoPi * std::remainder(double(l) * tau, 1.0);
            acc += std::sqrt(pc.sigma[static_cast<std::size_t>(l + n)]) *
                   residual.values[static_cast<std::size_t>(l + n)] * std::polar(1.0, ph);
        }
        out[static_cast<std::size_t>(k)] = std::abs(acc);
    }
    return out;
}

LandscapeScan scan_loss_1d(const std::vector<double>& prefix, const SampleVector& y,
                           const Preconditioner& pc, int grid_size, const ObservationMask* mask) {
    if (grid_size < 2) throw ParameterError("scan grid too small");
    LandscapeScan scan;
    scan.grid.reserve(static_cast<std::size_t>(grid_size));
    scan.values.reserve(static_cast<std::size_t>(grid_size));
    std::vector<double> omegas = prefix;
    omegas.push_back(0.0);
    for (int k = 0; k < grid_size; ++k) {
        const double w = double(k) / double(grid_size);
        omegas.back() = w;
        double v;
        try {
            v = dense_loss(omegas, y, pc, mask);
        } catch (const Error&) {
            continue;  // skip collisions with the fixed prefix
        }
        scan.grid.push_back(w);
        scan.values.push_back(v);
    }
    return scan;
}

double refine_loss_minimum(const std::vector<double>& prefix, const SampleVector& y,
                           const Preconditioner& pc, double coarse_min, double radius,
                           const ObservationMask* mask) {
    std::vector<double> omegas = prefix;
    omegas.push_back(0.0);
    auto eval = [&](double w) {
        omegas.back() = wrap_unit(w);
        return dense_loss(omegas, y, pc, mask);
    };
    // golden-section on [coarse_min - radius, coarse_min + radius]
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = coarse_min - radius, b = coarse_min + radius;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = eval(d);
        }
    }
    return wrap_unit(0.5 * (a + b));
}

AdversarialInstance adversarial_instance(double c, double L, int n) {
    if (!(c > 0.0) || !(L > 1.0)) throw ParameterError("need c > 0 and L > 1");
    const int ell1 = static_cast<int>(std::floor(c)) + 1;  // n*Delta = ell1 > c
    const double d1 = double(ell1) / double(n);
    const double d2 = L * d1;
    if (!(d2 < 0.45)) throw ParameterError("instance does not fit: L * ell1 / n too large");

    AdversarialInstance inst;
    inst.ell1 = ell1;
    inst.L = L;
    inst.failure_bound = L / double(n);
    const double tau1 = wrap_unit(0.25 + kOffGrid / double(n));
    const double x1 = 2.0, x2 = 1.0;
    // Small third amplitude: the basis-mismatch ghost left near tau1/tau2
    // after two rounds beats the true third correlation. The 0.01 cap comes
    // from a sweep of plain OMP's third-spike error at n = 394.
    const double x3 = std::min(x1 / (2.0 * c), 0.01);
    inst.spikes.taus = {tau1, wrap_unit(tau1 + d1), wrap_unit(tau1 + d2)};
    inst.spikes.amps = {cd{x1, 0.0}, cd{x2, 0.0}, cd{x3, 0.0}};
    inst.spikes.validate();
    return inst;
}

double ConcentrationReport::median_sup_dev(int q) const {
    std::vector<double> v;
    for (const auto& t : trials)
        if (t.q == q) v.push_back(t.sup_dev);
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double ConcentrationReport::max_ratio(int q) const {
    double r = 0.0;
    for (const auto& t : trials)
        if (t.q == q) r = std::max(r, t.ratio);
    return r;
}

ConcentrationReport concentration_probe(int n, double p, int trials, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("Bernoulli rate p must lie in (0,1]");
    if (double(n) * p < 4.0) throw ParameterError("need np >= 4");
    if (trials < 1) throw ParameterError("need at least one trial");

    const Preconditioner pc = build_sigma(4, n);
    const int grid = 10 * n;
    const double bound = std::sqrt(p / double(n) * std::log(double(n)));

    ConcentrationReport rep;
    rep.n = n;
    rep.p = p;
    std::vector<cd> buf;
    for (int tr = 0; tr < trials; ++tr) {
        const ObservationMask mask =
            bernoulli_symmetric_mask(n, p, CounterRng(seed).bits(rng_stream::kGeneric,
                                                                 static_cast<std::uint64_t>(tr)));
        for (int q = 0; q <= 2; ++q) {
            buf.assign(static_cast<std::size_t>(grid), cd{0.0, 0.0});
            for (int l = -n; l <= n; ++l) {
                const double b = mask.at(l) ? 1.0 : 0.0;
                const cd deriv = std::pow(cd{0.0, kTwoPi * double(l)}, q);
                const int k = ((l % grid) + grid) % grid;
                buf[static_cast<std::size_t>(k)] +=
                    (b - p) * pc.sigma[static_cast<std::size_t>(l + n)] * deriv;
            }
            // forward DFT sign: evaluates the sum at tau = -k/grid, which
            // covers the same circle, so the sup is unaffected
            dft_forward(buf);
            double sup = 0.0;
            for (const cd& v : buf) sup = std::max(sup, std::abs(v));
            sup /= std::pow(double(n), q);
            ConcentrationTrial t;
            t.trial = tr;
            t.q = q;
            t.sup_dev = sup;
            t.ratio = sup / bound;
            rep.trials.push_back(t);
        }
    }
    return rep;
}

}  // namespace somp
