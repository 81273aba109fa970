#include "somp/solver.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>

namespace somp {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Forward DFT out[k] = sum_m in[m] exp(-2 pi j m k / N).
void dft_forward(std::vector<cd>& buf) {
    const int N = static_cast<int>(buf.size());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_1d(N, reinterpret_cast<fftw_complex*>(buf.data()),
                                reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
}

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct GramWork {
    MatrixXcd atoms;  // (2n+1) x t weighted atoms
    MatrixXcd a;
    VectorXcd fy;
    VectorXcd coeffs;
    double cond = 1.0;
};

// Shared assembly for solve_gram and the sliding inner loop. Throws on
// duplicate frequencies or an ill-conditioned Gram.
GramWork assemble_and_solve(const std::vector<double>& omegas, const std::vector<cd>& yw,
                            const WeightedDict& dict, double cond_limit, double min_gap) {
    const int t = static_cast<int>(omegas.size());
    const int len = 2 * dict.n() + 1;
    if (t == 0) throw ParameterError("gram system needs at least one frequency");
    if (min_gap <= 0.0) min_gap = 1.0 / (10.0 * double(dict.n()) * double(len));
    for (int i = 0; i < t; ++i)
        for (int k = i + 1; k < t; ++k)
            if (wrap_dist(omegas[static_cast<std::size_t>(i)],
                          omegas[static_cast<std::size_t>(k)]) < min_gap)
                throw DegenerateDictionaryError("near-duplicate frequencies in dictionary");

    GramWork w;
    w.atoms.resize(len, t);
    std::vector<cd> atom(static_cast<std::size_t>(len));
    for (int i = 0; i < t; ++i) {
        dict.fill_atom(omegas[static_cast<std::size_t>(i)], atom);
        for (int l = 0; l < len; ++l) w.atoms(l, i) = atom[static_cast<std::size_t>(l)];
    }
    w.a = w.atoms.adjoint() * w.atoms;
    w.fy = w.atoms.adjoint() * Eigen::Map<const VectorXcd>(yw.data(), len);

    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(w.a);
    if (eig.info() != Eigen::Success) throw IllConditionedError("gram eigensolve failed");
    const double emin = eig.eigenvalues().minCoeff();
    const double emax = eig.eigenvalues().maxCoeff();
    if (!(emin > 0.0) || emax / emin > cond_limit)
        throw IllConditionedError("gram condition number exceeds limit");
    w.cond = emax / emin;
    w.coeffs = eig.eigenvectors() *
               (eig.eigenvalues().cwiseInverse().asDiagonal() *
                (eig.eigenvectors().adjoint() * w.fy));
    return w;
}

std::vector<cd> weighted_samples(const SampleVector& y, const WeightedDict& dict) {
    y.validate();
    if (y.n != dict.n()) throw DimensionError("sample/dictionary half-bandwidth mismatch");
    return dict.weigh(y);
}

// Gradient of 2 L_t given a solved system: component m is
// -2 Re[ conj(c_m) <z(omega_m), r> ] with r = yw - F c.
std::vector<double> gradient_from_system(const std::vector<double>& omegas,
                                         const std::vector<cd>& yw, const WeightedDict& dict,
                                         const GramWork& gw) {
    const int t = static_cast<int>(omegas.size());
    const int len = 2 * dict.n() + 1;
    VectorXcd r = Eigen::Map<const VectorXcd>(yw.data(), len) - gw.atoms * gw.coeffs;
    std::vector<double> g(static_cast<std::size_t>(t), 0.0);
    std::vector<cd> z(static_cast<std::size_t>(len));
    for (int m = 0; m < t; ++m) {
        dict.fill_datom(omegas[static_cast<std::size_t>(m)], z);
        cd dot{0.0, 0.0};
        for (int l = 0; l < len; ++l) dot += std::conj(z[static_cast<std::size_t>(l)]) * r(l);
        g[static_cast<std::size_t>(m)] =
            -2.0 * std::real(std::conj(gw.coeffs(m)) * dot);
    }
    return g;
}

}  // namespace

WeightedDict::WeightedDict(const Preconditioner& pc, const ObservationMask* mask) : n_(pc.n) {
    if (mask && mask->n != pc.n)
        throw DimensionError("mask/preconditioner half-bandwidth mismatch");
    const std::size_t len = static_cast<std::size_t>(2 * n_ + 1);
    w_.resize(len);
    sigma_obs_ = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const bool on = !mask || mask->observed[i] != 0;
        w_[i] = on ? std::sqrt(pc.sigma[i]) : 0.0;
        if (on) sigma_obs_ += pc.sigma[i];
    }
}

void WeightedDict::fill_atom(double tau, std::vector<cd>& out) const {
    const std::size_t len = static_cast<std::size_t>(2 * n_ + 1);
    out.resize(len);
    const cd step = std::polar(1.0, kTwoPi * tau);
    cd cur = std::polar(1.0, kTwoPi * std::remainder(-double(n_) * tau, 1.0));
    for (int l = -n_; l <= n_; ++l) {
        if ((l + n_) % 64 == 0)
            cur = std::polar(1.0, kTwoPi * std::remainder(double(l) * tau, 1.0));
        out[static_cast<std::size_t>(l + n_)] = w_[static_cast<std::size_t>(l + n_)] * cur;
        cur *= step;
    }
}

void WeightedDict::fill_datom(double tau, std::vector<cd>& out) const {
    fill_atom(tau, out);
    for (int l = -n_; l <= n_; ++l)
        out[static_cast<std::size_t>(l + n_)] *= cd{0.0, kTwoPi * double(l)};
}

std::vector<cd> WeightedDict::weigh(const SampleVector& y) const {
    std::vector<cd> out(y.values.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w_[i] * y.values[i];
    return out;
}

void SolverConfig::validate() const {
    if (!(gamma >= 0.0)) throw ParameterError("stopping threshold gamma must be set (>= 0)");
    if (n_grid < 2 * pc.n + 1) throw ParameterError("n_grid must be at least 2n+1");
    if (!(eta0 > 0.0)) throw ParameterError("eta0 must be positive");
    if (t_slide < 0) throw ParameterError("T_slide must be non-negative");
    if (max_spikes < 1 || max_spikes > n_grid) throw ParameterError("max_spikes out of range");
    if (!(cond_limit > 1.0)) throw ParameterError("cond_limit must exceed 1");
}

std::vector<double> grid_correlations(const SampleVector& residual, const Preconditioner& pc,
                                      int n_grid) {
    residual.validate();
    if (!residual.preconditioned)
        throw ParameterError("grid correlations expect a preconditioned residual");
    if (residual.n != pc.n) throw DimensionError("residual/preconditioner mismatch");
    if (n_grid < 2 * pc.n + 1) throw ParameterError("n_grid must be at least 2n+1");
    const int n = pc.n;
    std::vector<cd> buf(static_cast<std::size_t>(n_grid), cd{0.0, 0.0});
    for (int l = -n; l <= n; ++l) {
        const int k = ((l % n_grid) + n_grid) % n_grid;
        buf[static_cast<std::size_t>(k)] += std::sqrt(pc.sigma[static_cast<std::size_t>(l + n)]) *
                                            residual.values[static_cast<std::size_t>(l + n)];
    }
    dft_forward(buf);
    std::vector<double> out(static_cast<std::size_t>(n_grid));
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::abs(buf[k]);
    return out;
}

std::pair<int, double> argmax_correlation(const std::vector<double>& correlations) {
    if (correlations.empty()) throw ParameterError("empty correlation vector");
    int best = 0;
    for (std::size_t k = 1; k < correlations.size(); ++k)
        if (correlations[k] > correlations[static_cast<std::size_t>(best)])
            best = static_cast<int>(k);
    return {best, correlations[static_cast<std::size_t>(best)]};
}

GramSystem solve_gram(const std::vector<double>& omegas, const SampleVector& y,
                      const Preconditioner& pc, double cond_limit, const ObservationMask* mask,
                      double min_gap) {
    WeightedDict dict(pc, mask);
    const std::vector<cd> yw = weighted_samples(y, dict);
    GramWork gw = assemble_and_solve(omegas, yw, dict, cond_limit, min_gap);
    GramSystem gs;
    gs.omegas = omegas;
    const int t = static_cast<int>(omegas.size());
    gs.a.assign(static_cast<std::size_t>(t) * t, cd{});
    for (int i = 0; i < t; ++i)
        for (int k = 0; k < t; ++k) gs.a[static_cast<std::size_t>(i * t + k)] = gw.a(i, k);
    gs.fy.assign(gw.fy.data(), gw.fy.data() + t);
    gs.coeffs.assign(gw.coeffs.data(), gw.coeffs.data() + t);
    gs.cond = gw.cond;
    return gs;
}

SampleVector residual(const SampleVector& y, const GramSystem& gs, const WeightedDict& dict) {
    const std::vector<cd> yw = weighted_samples(y, dict);
    const int len = 2 * dict.n() + 1;
    SampleVector r;
    r.n = dict.n();
    r.preconditioned = true;
    r.values = yw;
    std::vector<cd> atom(static_cast<std::size_t>(len));
    for (int i = 0; i < gs.size(); ++i) {
        dict.fill_atom(gs.omegas[static_cast<std::size_t>(i)], atom);
        const cd c = gs.coeffs[static_cast<std::size_t>(i)];
        for (int l = 0; l < len; ++l)
            r.values[static_cast<std::size_t>(l)] -= c * atom[static_cast<std::size_t>(l)];
    }
    return r;
}

std::vector<double> sliding_gradient(const std::vector<double>& omegas, const SampleVector& y,
                                     const Preconditioner& pc, const ObservationMask* mask) {
    WeightedDict dict(pc, mask);
    const std::vector<cd> yw = weighted_samples(y, dict);
    GramWork gw = assemble_and_solve(omegas, yw, dict, 1e15, 0.0);
    return gradient_from_system(omegas, yw, dict, gw);
}

SlidingOutcome sliding(const std::vector<double>& omega0, const SampleVector& y,
                       const Preconditioner& pc, double eta0, int T, const ObservationMask* mask,
                       double cond_limit) {
    WeightedDict dict(pc, mask);
    const std::vector<cd> yw = weighted_samples(y, dict);
    SlidingOutcome out;
    out.omegas = omega0;
    if (T == 0) return out;

    const int t = static_cast<int>(omega0.size());
    std::vector<double> inv_w2(static_cast<std::size_t>(t));
    try {
        // w is fixed once from the initial fit and never refreshed.
        GramWork init = assemble_and_solve(omega0, yw, dict, cond_limit, 0.0);
        for (int i = 0; i < t; ++i) {
            const double a2 = std::norm(init.coeffs(i));
            if (!(a2 > 0.0)) throw IllConditionedError("zero initial coefficient in sliding");
            inv_w2[static_cast<std::size_t>(i)] = 1.0 / a2;
        }
    } catch (const Error&) {
        out.stalled = true;
        return out;
    }

    const double eta = eta0 / (double(dict.n()) * double(dict.n()));
    std::vector<double> cur = omega0;
    for (int k = 0; k < T; ++k) {
        std::vector<double> grad;
        try {
            GramWork gw = assemble_and_solve(cur, yw, dict, cond_limit, 0.0);
            grad = gradient_from_system(cur, yw, dict, gw);
        } catch (const Error&) {
            out.stalled = true;  // keep the last valid iterate
            return out;
        }
        double step_inf = 0.0;
        for (int i = 0; i < t; ++i) {
            const double step = eta * inv_w2[static_cast<std::size_t>(i)] *
                                grad[static_cast<std::size_t>(i)];
            cur[static_cast<std::size_t>(i)] = wrap_unit(cur[static_cast<std::size_t>(i)] - step);
            step_inf = std::max(step_inf, std::fabs(step));
        }
        out.omegas = cur;
        out.steps = k + 1;
        if (step_inf < 1e-14) break;
    }
    return out;
}

namespace {

RecoveryResult pursue(const SampleVector& y, const SolverConfig& cfg, const ObservationMask* mask,
                      bool slide) {
    cfg.validate();
    y.validate();
    if (y.preconditioned) throw ParameterError("solver expects raw (unpreconditioned) samples");
    if (y.n != cfg.pc.n) throw DimensionError("sample/config half-bandwidth mismatch");
    if (mask) {
        mask->validate();
        if (mask->n != y.n) throw DimensionError("sample/mask half-bandwidth mismatch");
    }

    WeightedDict dict(cfg.pc, mask);
    const std::vector<cd> yw = dict.weigh(y);
    const double dup_gap = 1.0 / (10.0 * double(y.n) * double(cfg.n_grid));

    RecoveryResult res;
    SampleVector r;  // preconditioned residual
    r.n = y.n;
    r.preconditioned = true;
    r.values = yw;

    std::vector<double> omegas;
    GramSystem gs;
    while (true) {
        const std::vector<double> corr = grid_correlations(r, cfg.pc, cfg.n_grid);
        const auto [kmax, vmax] = argmax_correlation(corr);
        if (vmax <= cfg.gamma) {
            res.stopped = StopReason::threshold;
            break;
        }
        if (static_cast<int>(omegas.size()) >= cfg.max_spikes) {
            res.stopped = StopReason::cap;
            break;
        }

        RoundTrace round;
        round.grid_omega = double(kmax) / double(cfg.n_grid);
        round.correlation = vmax;

        std::vector<double> appended = omegas;
        appended.push_back(round.grid_omega);
        round.pre_slide = appended;

        std::vector<double> refined = appended;
        if (slide) {
            SlidingOutcome so = sliding(appended, y, cfg.pc, cfg.eta0, cfg.t_slide, mask,
                                        cfg.cond_limit);
            round.slide_steps = so.steps;
            round.slide_stalled = so.stalled;
            refined = so.stalled ? appended : so.omegas;
        }

        bool solved = false;
        try {
            gs = solve_gram(refined, y, cfg.pc, cfg.cond_limit, mask, dup_gap);
            solved = true;
        } catch (const Error&) {
            if (slide && refined != appended) {
                // collided during sliding: fall back to the unslid set
                try {
                    gs = solve_gram(appended, y, cfg.pc, cfg.cond_limit, mask, dup_gap);
                    refined = appended;
                    round.slide_stalled = true;
                    solved = true;
                } catch (const Error&) {
                }
            }
        }
        if (!solved) {
            res.stopped = StopReason::stall;
            break;
        }

        omegas = refined;
        round.post_slide = omegas;
        r = residual(y, gs, dict);
        double rn = 0.0;
        for (const cd& v : r.values) rn += std::norm(v);
        round.residual_norm = std::sqrt(rn);
        res.trace.rounds.push_back(std::move(round));
    }

    res.omegas = omegas;
    if (!omegas.empty()) res.coeffs = gs.coeffs;
    return res;
}

}  // namespace

RecoveryResult omp(const SampleVector& y, const SolverConfig& cfg, const ObservationMask* mask) {
    return pursue(y, cfg, mask, false);
}

RecoveryResult sliding_omp(const SampleVector& y, const SolverConfig& cfg,
                           const ObservationMask* mask) {
    return pursue(y, cfg, mask, true);
}

double gamma_from_floor(double amplitude_floor, const Preconditioner& pc,
                        const ObservationMask* mask) {
    if (!(amplitude_floor > 0.0)) throw ParameterError("amplitude floor must be positive");
    WeightedDict dict(pc, mask);
    return 0.5 * dict.observed_sigma_sum() * amplitude_floor;
}

}  // namespace somp
