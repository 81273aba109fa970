#include "somp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "somp/io.hpp"
#include "somp/rng.hpp"

namespace somp {

using nlohmann::json;

std::string algo_name(Algo a) { return a == Algo::omp ? "omp" : "sliding_omp"; }

Algo algo_from_name(const std::string& name) {
    if (name == "omp") return Algo::omp;
    if (name == "sliding_omp" || name == "somp") return Algo::sliding_omp;
    throw ParameterError("unknown algorithm: " + name);
}

std::string AlgoSpec::label() const { return algo_name(algo) + "_a" + std::to_string(alpha); }

int ExperimentConfig::effective_n_grid() const {
    if (n_grid > 0) return n_grid;
    // paper configuration uses 1800 grid points for n = 394; scale linearly
    return std::max(2 * n + 1, static_cast<int>(std::lround(1800.0 * double(n) / 394.0)));
}

int ExperimentConfig::effective_max_spikes() const { return max_spikes > 0 ? max_spikes : 2 * s; }

void ExperimentConfig::validate() const {
    static const std::set<std::string> kModes = {"synth",        "recover",     "sweep-dyn",
                                                 "sweep-sep",    "kernel-table", "certify",
                                                 "adversarial",  "probe-concentration"};
    if (!kModes.count(mode)) throw ParameterError("unknown mode: " + mode);
    if (n < 4 || n > (1 << 22)) throw ParameterError("n out of range [4, 2^22]");
    if (s < 1 || s > 2 * n + 1) throw ParameterError("s out of range");
    if (!(n_delta > 0.0) || n_delta > double(n) / 2)
        throw ParameterError("n_delta out of range");
    if (alpha != 1 && alpha != 2 && alpha != 4) throw ParameterError("alpha must be 1, 2 or 4");
    if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p must lie in (0,1]");
    if (exact_count < 0 || exact_count > 2 * n + 1) throw ParameterError("exact_count out of range");
    if (seeds < 1 || seeds > 100000) throw ParameterError("seeds out of range");
    if (!(u >= 1.0) || u > 1e6) throw ParameterError("u out of range [1, 1e6]");
    if (n_grid != 0 && n_grid < 2 * n + 1) throw ParameterError("n_grid must be 0 or >= 2n+1");
    if (!(eta0 > 0.0) || eta0 > 100.0) throw ParameterError("eta0 out of range");
    if (t_slide < 0 || t_slide > 1000000) throw ParameterError("t_slide out of range");
    if (max_spikes < 0) throw ParameterError("max_spikes must be >= 0");
    if (!(cond_limit > 1.0)) throw ParameterError("cond_limit must exceed 1");
    for (double uu : u_list)
        if (!(uu >= 1.0)) throw ParameterError("u_list entries must be >= 1");
    for (double d : n_delta_list)
        if (!(d > 0.0)) throw ParameterError("n_delta_list entries must be positive");
    for (double v : v_list)
        if (!(v >= 0.0)) throw ParameterError("v_list entries must be >= 0");
    if (!(adv_c > 0.0)) throw ParameterError("adv_c must be positive");
    if (!(adv_L > 1.0)) throw ParameterError("adv_L must exceed 1");
    if (!(widen >= 1.0)) throw ParameterError("widen must be >= 1");
    if (trials < 1 || trials > 100000) throw ParameterError("trials out of range");
    if (workers < 0 || workers > 512) throw ParameterError("workers out of range");
    static const std::set<std::string> kRules = {"fig4", "fig6-v0.5", "fig6-v1", "fig6-v1.5",
                                                 "unit"};
    if (!kRules.count(amplitude_rule)) throw ParameterError("unknown amplitude rule");
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream os;
    os << "mode=" << mode << ";n=" << n << ";s=" << s << ";n_delta=" << format_double(n_delta)
       << ";amplitude_rule=" << amplitude_rule << ";u=" << format_double(u) << ";alpha=" << alpha
       << ";p=" << format_double(p) << ";exact_count=" << exact_count << ";seed=" << seed
       << ";seeds=" << seeds << ";gamma=" << format_double(gamma) << ";n_grid=" << n_grid
       << ";eta0=" << format_double(eta0) << ";t_slide=" << t_slide
       << ";max_spikes=" << max_spikes << ";cond_limit=" << format_double(cond_limit) << ";u_list=";
    for (double v : u_list) os << format_double(v) << ',';
    os << ";n_delta_list=";
    for (double v : n_delta_list) os << format_double(v) << ',';
    os << ";v_list=";
    for (double v : v_list) os << format_double(v) << ',';
    os << ";algos=";
    for (const auto& a : algos) os << a.label() << ',';
    os << ";adv_c=" << format_double(adv_c) << ";adv_L=" << format_double(adv_L)
       << ";widen=" << format_double(widen) << ";trials=" << trials
       << ";exact_count_mask=" << exact_count_mask;
    return os.str();
}

namespace {

std::vector<double> json_double_list(const json& j, const std::string& key) {
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ParameterError("config key '" + key + "' must be numeric list");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    ExperimentConfig cfg;
    for (const auto& [key, val] : j.items()) {
        if (key == "mode") cfg.mode = val.get<std::string>();
        else if (key == "n") cfg.n = val.get<int>();
        else if (key == "s") cfg.s = val.get<int>();
        else if (key == "n_delta") cfg.n_delta = val.get<double>();
        else if (key == "amplitude_rule") cfg.amplitude_rule = val.get<std::string>();
        else if (key == "u") cfg.u = val.get<double>();
        else if (key == "alpha") cfg.alpha = val.get<int>();
        else if (key == "p") cfg.p = val.get<double>();
        else if (key == "exact_count") cfg.exact_count = val.get<int>();
        else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
        else if (key == "seeds") cfg.seeds = val.get<int>();
        else if (key == "gamma") cfg.gamma = val.get<double>();
        else if (key == "n_grid") cfg.n_grid = val.get<int>();
        else if (key == "eta0") cfg.eta0 = val.get<double>();
        else if (key == "t_slide") cfg.t_slide = val.get<int>();
        else if (key == "max_spikes") cfg.max_spikes = val.get<int>();
        else if (key == "cond_limit") cfg.cond_limit = val.get<double>();
        else if (key == "u_list") cfg.u_list = json_double_list(val, key);
        else if (key == "n_delta_list") cfg.n_delta_list = json_double_list(val, key);
        else if (key == "v_list") cfg.v_list = json_double_list(val, key);
        else if (key == "algos") {
            cfg.algos.clear();
            for (const auto& a : val) {
                AlgoSpec spec;
                spec.algo = algo_from_name(a.at("algo").get<std::string>());
                spec.alpha = a.at("alpha").get<int>();
                if (spec.alpha != 1 && spec.alpha != 2 && spec.alpha != 4)
                    throw ParameterError("algo alpha must be 1, 2 or 4");
                for (const auto& [k2, v2] : a.items())
                    if (k2 != "algo" && k2 != "alpha")
                        throw ParameterError("unknown key in algos entry: " + k2);
                cfg.algos.push_back(spec);
            }
        } else if (key == "adv_c") cfg.adv_c = val.get<double>();
        else if (key == "adv_L") cfg.adv_L = val.get<double>();
        else if (key == "widen") cfg.widen = val.get<double>();
        else if (key == "trials") cfg.trials = val.get<int>();
        else if (key == "input") cfg.input_path = val.get<std::string>();
        else if (key == "out") cfg.out_path = val.get<std::string>();
        else if (key == "exact_count_mask") cfg.exact_count_mask = val.get<bool>();
        else if (key == "strict") cfg.strict = val.get<bool>();
        else if (key == "workers") cfg.workers = val.get<int>();
        else throw ParameterError("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

SpikeTrain make_sweep_instance(int n, int s, double n_delta, const std::string& amplitude_rule,
                               double u_or_v, std::uint64_t seed) {
    SpikeTrain st;
    const double d = n_delta / double(n);
    for (int i = 1; i <= s; ++i) st.taus.push_back(wrap_unit(double(1 + i) * d));
    CounterRng rng(seed);
    std::vector<double> mags(static_cast<std::size_t>(s), 1.0);
    if (amplitude_rule == "fig4") {
        const double u = u_or_v;
        // |x| = [1, u, max(u/2,1), 1, u], cycled when s != 5
        const double pat[5] = {1.0, u, std::max(u / 2.0, 1.0), 1.0, u};
        for (int i = 0; i < s; ++i) mags[static_cast<std::size_t>(i)] = pat[i % 5];
    } else if (amplitude_rule.rfind("fig6", 0) == 0) {
        const double v = u_or_v;
        for (int i = 0; i < s; ++i)
            mags[static_cast<std::size_t>(i)] =
                1.0 + std::pow(10.0, v * rng.uniform(rng_stream::kAmplitude,
                                                     static_cast<std::uint64_t>(i)));
    }  // "unit": all ones
    for (int i = 0; i < s; ++i) {
        const double phase =
            kTwoPi * rng.uniform(rng_stream::kPhase, static_cast<std::uint64_t>(i));
        st.amps.push_back(std::polar(mags[static_cast<std::size_t>(i)], phase));
    }
    st.validate();
    return st;
}

void run_parallel(int workers, int jobs, const std::function<void(int)>& fn) {
    if (workers <= 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, jobs);
    if (workers <= 1) {
        for (int i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

RecoverOutcome run_recovery(const SampleVector& y, const ObservationMask& mask,
                            const ExperimentConfig& cfg, Algo algo, int alpha,
                            double amplitude_floor) {
    SolverConfig sc;
    sc.pc = build_sigma(alpha, y.n);
    sc.n_grid = cfg.effective_n_grid();
    sc.eta0 = cfg.eta0;
    sc.t_slide = cfg.t_slide;
    sc.max_spikes = cfg.effective_max_spikes();
    sc.cond_limit = cfg.cond_limit;
    sc.gamma = cfg.gamma >= 0.0 ? cfg.gamma : gamma_from_floor(amplitude_floor, sc.pc, &mask);

    RecoverOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    out.result = (algo == Algo::omp) ? omp(y, sc, &mask) : sliding_omp(y, sc, &mask);
    out.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

ObservationMask sweep_mask(const ExperimentConfig& cfg, std::uint64_t seed) {
    const int target = cfg.exact_count > 0 ? cfg.exact_count
                                           : static_cast<int>(std::lround(cfg.p * (2 * cfg.n + 1)));
    if (cfg.exact_count_mask) return exact_count_symmetric_mask(cfg.n, target, seed);
    return bernoulli_symmetric_mask(cfg.n, cfg.p, seed);
}

SweepRow score_cell(const ExperimentConfig& cfg, const SpikeTrain& truth, const SampleVector& y,
                    const ObservationMask& mask, const AlgoSpec& spec, std::uint64_t seed) {
    double floor = std::abs(truth.amps[0]);
    for (const cd& a : truth.amps) floor = std::min(floor, std::abs(a));

    SweepRow row;
    row.seed = seed;
    row.algo = algo_name(spec.algo);
    row.alpha = spec.alpha;
    try {
        RecoverOutcome ro = run_recovery(y, mask, cfg, spec.algo, spec.alpha, floor);
        row.wall_ms = ro.wall_ms;
        row.rounds = static_cast<int>(ro.result.trace.rounds.size());
        row.found = static_cast<int>(ro.result.omegas.size());
        if (row.found == 0) {
            row.max_err = 0.5;  // maximal wrap distance: nothing recovered
        } else if (row.found <= truth.size()) {
            row.max_err = match_frequencies(ro.result.omegas, truth).max_error;
        } else {
            // over-estimation: score the best |truth| estimates, never recovered
            std::vector<double> est = ro.result.omegas;
            est.resize(static_cast<std::size_t>(truth.size()));
            row.max_err = match_frequencies(est, truth).max_error;
        }
        row.recovered = (row.found == truth.size()) && (row.max_err < kRecoveryTol);
    } catch (const Error&) {
        row.found = 0;
        row.max_err = 0.5;
        row.recovered = false;
    }
    return row;
}

std::vector<AlgoSpec> default_dyn_algos() {
    std::vector<AlgoSpec> out;
    for (int alpha : {1, 2, 4}) out.push_back({Algo::omp, alpha});
    for (int alpha : {1, 2, 4}) out.push_back({Algo::sliding_omp, alpha});
    return out;
}

std::vector<AlgoSpec> default_sep_algos() {
    std::vector<AlgoSpec> out;
    for (int alpha : {1, 2, 4}) out.push_back({Algo::sliding_omp, alpha});
    out.push_back({Algo::omp, 2});
    return out;
}

}  // namespace

std::vector<SweepRow> run_sweep_dyn(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<AlgoSpec> algos = cfg.algos.empty() ? default_dyn_algos() : cfg.algos;
    struct Cell {
        double u;
        std::uint64_t seed;
        const AlgoSpec* spec;
    };
    std::vector<Cell> cells;
    for (double u : cfg.u_list)
        for (int sd = 0; sd < cfg.seeds; ++sd)
            for (const auto& spec : algos)
                cells.push_back({u, cfg.seed + static_cast<std::uint64_t>(sd), &spec});

    std::vector<SweepRow> rows(cells.size());
    run_parallel(cfg.workers, static_cast<int>(cells.size()), [&](int i) {
        const Cell& c = cells[static_cast<std::size_t>(i)];
        const std::uint64_t inst_seed =
            CounterRng(c.seed).bits(rng_stream::kGeneric, static_cast<std::uint64_t>(
                                                              std::llround(c.u * 1024.0)));
        const SpikeTrain truth =
            make_sweep_instance(cfg.n, cfg.s, cfg.n_delta, cfg.amplitude_rule, c.u, inst_seed);
        const SampleVector y = synthesize(truth, cfg.n);
        const ObservationMask mask = sweep_mask(cfg, inst_seed);
        SweepRow row = score_cell(cfg, truth, y, mask, *c.spec, c.seed);
        row.coord = c.u;
        rows[static_cast<std::size_t>(i)] = std::move(row);
    });
    return rows;
}

std::vector<SweepRow> run_sweep_separation(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<AlgoSpec> algos = cfg.algos.empty() ? default_sep_algos() : cfg.algos;
    struct Cell {
        double v;
        double nd;
        std::uint64_t seed;
        const AlgoSpec* spec;
    };
    std::vector<Cell> cells;
    for (double v : cfg.v_list)
        for (double nd : cfg.n_delta_list)
            for (int sd = 0; sd < cfg.seeds; ++sd)
                for (const auto& spec : algos)
                    cells.push_back({v, nd, cfg.seed + static_cast<std::uint64_t>(sd), &spec});

    std::vector<SweepRow> rows(cells.size());
    run_parallel(cfg.workers, static_cast<int>(cells.size()), [&](int i) {
        const Cell& c = cells[static_cast<std::size_t>(i)];
        const std::uint64_t inst_seed = CounterRng(c.seed).bits(
            rng_stream::kGeneric,
            static_cast<std::uint64_t>(std::llround(c.v * 65536.0 + c.nd * 1024.0)));
        const std::string rule = "fig6-v" + std::string(c.v == 0.5 ? "0.5" : c.v == 1.0 ? "1" : "1.5");
        const SpikeTrain truth = make_sweep_instance(cfg.n, cfg.s, c.nd, rule, c.v, inst_seed);
        const SampleVector y = synthesize(truth, cfg.n);
        const ObservationMask mask = sweep_mask(cfg, inst_seed);
        SweepRow row = score_cell(cfg, truth, y, mask, *c.spec, c.seed);
        row.coord = c.nd;
        row.v = c.v;
        rows[static_cast<std::size_t>(i)] = std::move(row);
    });
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool with_v,
                     const std::string& meta) {
    out << meta;
    out << (with_v ? "v,ndelta,seed,algo,alpha,found,max_err,recovered,rounds,wall_ms\n"
                   : "u,seed,algo,alpha,found,max_err,recovered,rounds,wall_ms\n");
    for (const auto& r : rows) {
        if (with_v) out << format_double(r.v) << ',';
        out << format_double(r.coord) << ',' << r.seed << ',' << r.algo << ',' << r.alpha << ','
            << r.found << ',' << format_double(r.max_err) << ',' << (r.recovered ? 1 : 0) << ','
            << r.rounds << ',' << format_double(r.wall_ms) << '\n';
    }
}

void emit_kernel_table(std::ostream& out, const std::vector<int>& alphas, int n, int resolution,
                       const std::string& meta) {
    if (resolution < 2) throw ParameterError("kernel table resolution too small");
    for (int a : alphas)
        if (a != 1 && a != 2 && a != 4) throw ParameterError("alpha must be 1, 2 or 4");
    out << meta;
    out << "t";
    for (int a : alphas) out << ",K_a" << a;
    out << '\n';
    for (int k = 0; k <= resolution; ++k) {
        const double t = -0.5 + double(k) / double(resolution);
        out << format_double(t);
        for (int a : alphas) out << ',' << format_double(kernel_closed_form(a, n, t).value);
        out << '\n';
    }
}

void write_envelope_csv(std::ostream& out, const EnvelopeReport& rep, const std::string& meta) {
    out << meta;
    out << "inequality,range_lo,range_hi,worst_margin,pass\n";
    for (const auto& c : rep.checks)
        out << c.id << ',' << format_double(c.lo) << ',' << format_double(c.hi) << ','
            << format_double(c.worst_margin) << ',' << (c.pass ? 1 : 0) << '\n';
}

void write_probe_csv(std::ostream& out, const ConcentrationReport& rep, const std::string& meta) {
    out << meta;
    out << "probe,n,p,q,trial,sup_dev,bound_ratio\n";
    for (const auto& t : rep.trials)
        out << "kernel_concentration," << rep.n << ',' << format_double(rep.p) << ',' << t.q << ','
            << t.trial << ',' << format_double(t.sup_dev) << ',' << format_double(t.ratio) << '\n';
}

}  // namespace somp
