#include "somp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace somp {

namespace {

// g(t) = sin(M pi t) / (M sin(pi t)) and its first two derivatives.
// Near t = 0 the quotient cancels catastrophically, so below |M pi t| < 0.01
// we switch to the series
//   g = 1 - (M^2-1) a^2/6 + (3M^4 - 10M^2 + 7) a^4/360,  a = pi t.
struct Ratio {
    double g, dg, d2g;
};

Ratio eval_ratio(int M, double t) {
    const double a = kPi * t;
    if (std::fabs(M * a) < 0.01) {
        const double m2 = double(M) * M;
        const double c2 = (m2 - 1.0) / 6.0;
        const double c4 = (3.0 * m2 * m2 - 10.0 * m2 + 7.0) / 360.0;
        const double a2 = a * a;
        Ratio r;
        r.g = 1.0 - c2 * a2 + c4 * a2 * a2;
        r.dg = kPi * (-2.0 * c2 * a + 4.0 * c4 * a2 * a);
        r.d2g = kPi * kPi * (-2.0 * c2 + 12.0 * c4 * a2);
        return r;
    }
    const double sM = std::sin(M * a);
    const double cM = std::cos(M * a);
    const double s1 = std::sin(a);
    const double c1 = std::cos(a);
    Ratio r;
    r.g = sM / (M * s1);
    // g' = (M pi cos(M a) sin(a) - pi sin(M a) cos(a)) / (M sin^2 a)
    r.dg = kPi * (M * cM * s1 - sM * c1) / (M * s1 * s1);
    // g'' = -(M^2-1) pi^2 g - 2 pi cot(a) g'
    r.d2g = -(double(M) * M - 1.0) * kPi * kPi * r.g - 2.0 * kPi * (c1 / s1) * r.dg;
    return r;
}

void check_alpha(int alpha) {
    if (alpha != 1 && alpha != 2 && alpha != 4)
        throw ParameterError("kernel order alpha must be one of {1, 2, 4}");
}

}  // namespace

Preconditioner build_sigma(int alpha, int n) {
    check_alpha(alpha);
    // each convolved box needs at least one tap on each side
    if (n < alpha) throw ParameterError("half-bandwidth too small for kernel order");
    const int m = n / alpha;  // box half-width
    std::vector<double> cur(static_cast<std::size_t>(2 * m + 1), 1.0);
    for (int fold = 1; fold < alpha; ++fold) {
        const int half = static_cast<int>(cur.size() / 2);
        std::vector<double> next(cur.size() + static_cast<std::size_t>(2 * m), 0.0);
        const int nhalf = half + m;
        for (int i = -half; i <= half; ++i)
            for (int j = -m; j <= m; ++j)
                next[static_cast<std::size_t>(i + j + nhalf)] +=
                    cur[static_cast<std::size_t>(i + half)];
        cur = std::move(next);
    }
    Preconditioner pc;
    pc.alpha = alpha;
    pc.n = n;
    pc.sigma.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
    const int half = static_cast<int>(cur.size() / 2);
    double total = 0.0;
    for (double v : cur) total += v;
    for (int l = -half; l <= half; ++l)
        pc.sigma[static_cast<std::size_t>(l + n)] = cur[static_cast<std::size_t>(l + half)] / total;
    return pc;
}

KernelEval kernel_closed_form(int alpha, int n, double t) {
    check_alpha(alpha);
    if (n < alpha) throw ParameterError("half-bandwidth too small for kernel order");
    if (!(t >= -0.5 && t <= 0.5)) throw DomainError("kernel offset must lie in [-1/2, 1/2]");
    const int M = 2 * (n / alpha) + 1;
    const Ratio r = eval_ratio(M, t);
    KernelEval out;
    const double gm1 = std::pow(r.g, alpha - 1);
    out.value = gm1 * r.g;
    out.d1 = alpha * gm1 * r.dg;
    out.d2 = (alpha == 1) ? r.d2g
                          : alpha * (alpha - 1) * std::pow(r.g, alpha - 2) * r.dg * r.dg +
                                alpha * gm1 * r.d2g;
    return out;
}

cd kernel_from_sigma(const Preconditioner& pc, double t) {
    cd acc{0.0, 0.0};
    const int n = pc.n;
    for (int l = -n; l <= n; ++l) {
        const double s = pc.sigma[static_cast<std::size_t>(l + n)];
        if (s == 0.0) continue;
        acc += s * std::polar(1.0, kTwoPi * std::remainder(double(l) * t, 1.0));
    }
    return acc;
}

SampleVector precondition(const SampleVector& y, const Preconditioner& pc) {
    y.validate();
    if (y.n != pc.n) throw DimensionError("sample/preconditioner half-bandwidth mismatch");
    if (y.preconditioned) throw ParameterError("sample vector is already preconditioned");
    SampleVector out = y;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= std::sqrt(pc.sigma[i]);
    out.preconditioned = true;
    return out;
}

bool EnvelopeReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const EnvelopeCheck& c) { return c.pass; });
}

EnvelopeReport certify_envelopes(int n, int grid_size, int alpha) {
    if (alpha != 4) throw ParameterError("envelope certification is stated for alpha = 4");
    if (grid_size < 10 * n) throw ParameterError("certification grid must have at least 10n points");

    EnvelopeReport rep;
    rep.alpha = alpha;
    rep.n = n;
    rep.grid_size = grid_size;
    const double np2 = double(n) + 2.0;
    const double cell = 1.0 / (2.0 * n + 4.0);
    // Bounds that are exactly attained (t = 1/2 for the tail, t -> 0 for the
    // peak) certify with margin zero up to rounding.
    const double tol = 1e-12;

    auto sweep = [&](const char* id, double lo, double hi, auto margin_fn) {
        EnvelopeCheck c;
        c.id = id;
        c.lo = lo;
        c.hi = hi;
        c.worst_margin = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= grid_size; ++k) {
            const double t = lo + (hi - lo) * double(k) / double(grid_size);
            c.worst_margin = std::min(c.worst_margin, margin_fn(t));
        }
        c.pass = c.worst_margin >= -tol;
        rep.checks.push_back(std::move(c));
    };

    // |K| <= min{0.7, 1/((n+2) t)^4} on [1/(2n+4), 1/2]
    sweep("K_tail", cell, 0.5, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        const double bound = std::min(0.7, 1.0 / std::pow(np2 * t, 4));
        return bound - std::fabs(e.value);
    });
    // (pi^2/6)(n+2)^2 t^2 >= 1 - K >= (n+2)^2 t^2 on [0, 1/(2n+4)]
    sweep("peak_upper", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (kPi * kPi / 6.0) * np2 * np2 * t * t - (1.0 - e.value);
    });
    sweep("peak_lower", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (1.0 - e.value) - np2 * np2 * t * t;
    });
    // |K'| <= (pi^2/3)(n+2) inside, pi^2/((n+2)^3 t^4) outside
    sweep("d1_inner", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (kPi * kPi / 3.0) * np2 - std::fabs(e.d1);
    });
    sweep("d1_tail", cell, 0.5, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return kPi * kPi / (np2 * np2 * np2 * std::pow(t, 4)) - std::fabs(e.d1);
    });
    // (pi^2/3)(n+2)^2 t^2 >= -K'(t) t >= 1.9 (n+2)^2 t^2 inside
    sweep("slope_upper", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (kPi * kPi / 3.0) * np2 * np2 * t * t - (-e.d1 * t);
    });
    sweep("slope_lower", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (-e.d1 * t) - 1.9 * np2 * np2 * t * t;
    });
    // |K''| <= (pi^2/3)(n+2)^2 inside, 4 pi^4/((n+2)^2 t^4) outside
    sweep("d2_inner", 0.0, cell, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return (kPi * kPi / 3.0) * np2 * np2 - std::fabs(e.d2);
    });
    sweep("d2_tail", cell, 0.5, [&](double t) {
        const KernelEval e = kernel_closed_form(alpha, n, t);
        return 4.0 * std::pow(kPi, 4) / (np2 * np2 * std::pow(t, 4)) - std::fabs(e.d2);
    });
    return rep;
}

}  // namespace somp
