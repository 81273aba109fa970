// somp — spectral super-resolution via (Sliding-)OMP with kernel
// preconditioning. Subcommands emit plot-ready CSV; see README.md.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "somp/experiments.hpp"
#include "somp/io.hpp"
#include "somp/rng.hpp"

namespace {

using namespace somp;

constexpr int kExitOk = 0;
constexpr int kExitRecoveryFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open output file: " + path);
    return out;
}

std::string meta_for(const ExperimentConfig& cfg) {
    std::ostringstream seeds;
    seeds << cfg.seed << "+" << cfg.seeds;
    std::ostringstream hash;
    hash << std::hex << fnv1a(cfg.canonical_text());
    return csv_metadata(hash.str(), seeds.str());
}

ObservationMask mask_for(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.exact_count_mask || cfg.exact_count > 0) {
        const int target = cfg.exact_count > 0
                               ? cfg.exact_count
                               : static_cast<int>(std::lround(cfg.p * (2 * cfg.n + 1)));
        return exact_count_symmetric_mask(cfg.n, target, seed);
    }
    if (cfg.p >= 1.0) {
        ObservationMask m;
        m.n = cfg.n;
        m.p = 1.0;
        m.observed.assign(static_cast<std::size_t>(2 * cfg.n + 1), 1);
        return m;
    }
    return bernoulli_symmetric_mask(cfg.n, cfg.p, seed);
}

int cmd_synth(const ExperimentConfig& cfg) {
    const SpikeTrain truth =
        make_sweep_instance(cfg.n, cfg.s, cfg.n_delta, cfg.amplitude_rule, cfg.u, cfg.seed);
    const SampleVector y = synthesize(truth, cfg.n);
    const ObservationMask mask = mask_for(cfg, cfg.seed);
    std::ofstream out = open_out(cfg.out_path.empty() ? "samples.csv" : cfg.out_path);
    write_sample_file(out, y, mask, meta_for(cfg));
    std::cerr << "wrote " << (cfg.out_path.empty() ? "samples.csv" : cfg.out_path) << " with "
              << mask.count() << "/" << (2 * cfg.n + 1) << " observed samples\n";
    // ground truth next to the samples, for later scoring
    std::ofstream truth_out = open_out((cfg.out_path.empty() ? "samples.csv" : cfg.out_path) +
                                       ".truth.csv");
    truth_out << meta_for(cfg) << "tau,re,im\n";
    for (int i = 0; i < truth.size(); ++i)
        truth_out << format_double(truth.taus[static_cast<std::size_t>(i)]) << ','
                  << format_double(truth.amps[static_cast<std::size_t>(i)].real()) << ','
                  << format_double(truth.amps[static_cast<std::size_t>(i)].imag()) << '\n';
    return kExitOk;
}

int cmd_recover(ExperimentConfig cfg, const std::string& algo_name_str, double gamma_floor) {
    if (cfg.input_path.empty()) throw ParameterError("recover needs --input <samples.csv>");
    SampleFile sf = read_sample_file_path(cfg.input_path);
    cfg.n = sf.samples.n;
    const Algo algo = algo_from_name(algo_name_str);
    if (cfg.gamma >= 0.0 && gamma_floor > 0.0)
        throw ParameterError("give either --gamma or --gamma-floor, not both");
    if (cfg.gamma < 0.0 && !(gamma_floor > 0.0))
        throw ParameterError("recover needs --gamma, or --gamma-floor <smallest expected "
                             "amplitude> to derive it");
    if (cfg.gamma < 0.0)
        cfg.gamma = gamma_from_floor(gamma_floor, build_sigma(cfg.alpha, cfg.n), &sf.mask);
    RecoverOutcome ro = run_recovery(sf.samples, sf.mask, cfg, algo, cfg.alpha, 1.0);

    const std::string base = cfg.out_path.empty() ? "recovery" : cfg.out_path;
    {
        std::ofstream out = open_out(base + ".frequencies.csv");
        out << meta_for(cfg) << "index,omega,re,im\n";
        for (std::size_t i = 0; i < ro.result.omegas.size(); ++i)
            out << i << ',' << format_double(ro.result.omegas[i]) << ','
                << format_double(ro.result.coeffs[i].real()) << ','
                << format_double(ro.result.coeffs[i].imag()) << '\n';
    }
    {
        std::ofstream out = open_out(base + ".trace.csv");
        out << meta_for(cfg) << "round,grid_omega,correlation,residual_norm,slide_steps,stalled\n";
        for (std::size_t i = 0; i < ro.result.trace.rounds.size(); ++i) {
            const auto& r = ro.result.trace.rounds[i];
            out << i << ',' << format_double(r.grid_omega) << ',' << format_double(r.correlation)
                << ',' << format_double(r.residual_norm) << ',' << r.slide_steps << ','
                << (r.slide_stalled ? 1 : 0) << '\n';
        }
    }
    {
        nlohmann::json summary;
        summary["algorithm"] = somp::algo_name(algo);
        summary["alpha"] = cfg.alpha;
        summary["n"] = cfg.n;
        summary["observed"] = sf.mask.count();
        summary["gamma"] = cfg.gamma;
        summary["found"] = ro.result.omegas.size();
        summary["rounds"] = ro.result.trace.rounds.size();
        summary["stopped"] = ro.result.stopped == StopReason::threshold ? "threshold"
                             : ro.result.stopped == StopReason::cap     ? "cap"
                                                                        : "stall";
        summary["wall_ms"] = ro.wall_ms;
        summary["omegas"] = ro.result.omegas;
        std::ofstream out = open_out(base + ".summary.json");
        out << summary.dump(2) << '\n';
    }
    std::cerr << "recovered " << ro.result.omegas.size() << " frequencies in "
              << ro.result.trace.rounds.size() << " rounds (" << ro.wall_ms << " ms)\n";
    if (cfg.strict && ro.result.stopped != StopReason::threshold) return kExitRecoveryFailure;
    return kExitOk;
}

int sweep_exit(const std::vector<SweepRow>& rows, bool strict) {
    if (!strict) return kExitOk;
    for (const auto& r : rows)
        if (!r.recovered) return kExitRecoveryFailure;
    return kExitOk;
}

int cmd_sweep_dyn(const ExperimentConfig& cfg) {
    std::vector<SweepRow> rows = run_sweep_dyn(cfg);
    std::ofstream out = open_out(cfg.out_path.empty() ? "sweep_dyn.csv" : cfg.out_path);
    write_sweep_csv(out, rows, false, meta_for(cfg));
    return sweep_exit(rows, cfg.strict);
}

int cmd_sweep_sep(const ExperimentConfig& cfg) {
    std::vector<SweepRow> rows = run_sweep_separation(cfg);
    std::ofstream out = open_out(cfg.out_path.empty() ? "sweep_sep.csv" : cfg.out_path);
    write_sweep_csv(out, rows, true, meta_for(cfg));
    return sweep_exit(rows, cfg.strict);
}

int cmd_kernel_table(const ExperimentConfig& cfg) {
    std::ofstream out = open_out(cfg.out_path.empty() ? "kernel_table.csv" : cfg.out_path);
    emit_kernel_table(out, {1, 2, 4}, cfg.n, 2000, meta_for(cfg));
    return kExitOk;
}

int cmd_certify(const ExperimentConfig& cfg) {
    const EnvelopeReport rep = certify_envelopes(cfg.n, std::max(10 * cfg.n, 20000));
    std::ofstream out = open_out(cfg.out_path.empty() ? "certify.csv" : cfg.out_path);
    write_envelope_csv(out, rep, meta_for(cfg));
    for (const auto& c : rep.checks)
        std::cerr << (c.pass ? "pass " : "FAIL ") << c.id << " worst margin " << c.worst_margin
                  << "\n";
    return rep.all_pass() ? kExitOk : kExitRecoveryFailure;
}

int cmd_adversarial(const ExperimentConfig& cfg) {
    const AdversarialInstance inst = adversarial_instance(cfg.adv_c, cfg.adv_L, cfg.n);
    const SampleVector y = synthesize(inst.spikes, cfg.n);
    ObservationMask full;
    full.n = cfg.n;
    full.p = 1.0;
    full.observed.assign(static_cast<std::size_t>(2 * cfg.n + 1), 1);

    ExperimentConfig run = cfg;
    run.max_spikes = 3;
    double floor = std::abs(inst.spikes.amps[2]);
    RecoverOutcome plain = run_recovery(y, full, run, Algo::omp, 1, floor);

    // widened-separation variant for the sliding solver
    SpikeTrain wide = inst.spikes;
    const double tau1 = wide.taus[0];
    wide.taus[1] = wrap_unit(tau1 + cfg.widen * (wide.taus[1] - tau1));
    wide.taus[2] = wrap_unit(tau1 + cfg.widen * (wide.taus[2] - tau1));
    const SampleVector yw = synthesize(wide, cfg.n);
    RecoverOutcome slid = run_recovery(yw, full, run, Algo::sliding_omp, 4, floor);

    const Matching mp = plain.result.omegas.empty()
                            ? Matching{}
                            : match_frequencies(plain.result.omegas, inst.spikes);
    const Matching ms =
        slid.result.omegas.empty() ? Matching{} : match_frequencies(slid.result.omegas, wide);
    std::ofstream out = open_out(cfg.out_path.empty() ? "adversarial.csv" : cfg.out_path);
    out << meta_for(cfg) << "run,algo,alpha,ndelta,found,max_err,failure_bound\n";
    out << "plain,omp,1," << format_double(double(inst.ell1)) << ',' << plain.result.omegas.size()
        << ',' << format_double(mp.max_error) << ',' << format_double(inst.failure_bound) << '\n';
    out << "widened,sliding_omp,4," << format_double(cfg.widen * inst.ell1) << ','
        << slid.result.omegas.size() << ',' << format_double(ms.max_error) << ','
        << format_double(inst.failure_bound) << '\n';
    std::cerr << "plain OMP max err " << mp.max_error << " (cell 1/(2n+4) = "
              << 1.0 / (2.0 * cfg.n + 4.0) << "), sliding-OMP widened max err " << ms.max_error
              << "\n";
    return kExitOk;
}

int cmd_probe(const ExperimentConfig& cfg) {
    const ConcentrationReport rep = concentration_probe(cfg.n, cfg.p, cfg.trials, cfg.seed);
    std::ofstream out = open_out(cfg.out_path.empty() ? "probe.csv" : cfg.out_path);
    write_probe_csv(out, rep, meta_for(cfg));
    std::cerr << "median sup-dev q=0: " << rep.median_sup_dev(0)
              << ", max ratio to sqrt(p/n log n): " << rep.max_ratio(0) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral super-resolution: continuous OMP and Sliding-OMP with kernel "
                 "preconditioning"};
    app.require_subcommand(1);

    std::string config_path;
    std::string algo = "sliding_omp";
    double gamma_floor = 0.0;
    ExperimentConfig flags;  // flag overrides collected here
    bool seed_set = false, seeds_set = false, alpha_set = false, gamma_set = false,
         out_set = false, p_set = false, n_set = false, exact_set = false, strict_set = false,
         input_set = false;

    app.add_option("--config", config_path, "JSON experiment config");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON experiment config");
        sub->add_option("--seed", flags.seed, "base RNG seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--seeds", flags.seeds, "number of seeds (sweeps)")
            ->each([&](const std::string&) { seeds_set = true; });
        sub->add_option("--out", flags.out_path, "output path")->each([&](const std::string&) {
            out_set = true;
        });
        sub->add_option("--alpha", flags.alpha, "kernel order (1, 2 or 4)")
            ->each([&](const std::string&) { alpha_set = true; });
        sub->add_option("--gamma", flags.gamma, "stopping threshold")
            ->each([&](const std::string&) { gamma_set = true; });
        sub->add_option("--algo", algo, "omp | sliding_omp");
        sub->add_option("--p", flags.p, "Bernoulli observation rate")
            ->each([&](const std::string&) { p_set = true; });
        sub->add_option("--n", flags.n, "half-bandwidth")->each([&](const std::string&) {
            n_set = true;
        });
        sub->add_option("--input", flags.input_path, "input sample file")
            ->each([&](const std::string&) { input_set = true; });
        sub->add_flag("--exact-count-mask", flags.exact_count_mask,
                      "sample a symmetric mask with an exact count instead of Bernoulli draws")
            ->each([&](const std::string&) { exact_set = true; });
        sub->add_flag("--strict", flags.strict, "exit 1 when recovery fails")
            ->each([&](const std::string&) { strict_set = true; });
    };

    CLI::App* synth = app.add_subcommand("synth", "synthesize an instance and write samples");
    CLI::App* recover = app.add_subcommand("recover", "recover frequencies from a sample file");
    CLI::App* sweep_dyn = app.add_subcommand("sweep-dyn", "dynamic-range sweep (fig4/fig5 style)");
    CLI::App* sweep_sep =
        app.add_subcommand("sweep-sep", "separation phase-transition sweep (fig6 style)");
    CLI::App* kernel_table = app.add_subcommand("kernel-table", "sampled kernel values per alpha");
    CLI::App* certify = app.add_subcommand("certify", "certify squared-Fejer envelope bounds");
    CLI::App* adversarial =
        app.add_subcommand("adversarial", "3-spike instance defeating plain OMP");
    CLI::App* probe =
        app.add_subcommand("probe-concentration", "subsampled-kernel concentration probe");
    for (CLI::App* sub :
         {synth, recover, sweep_dyn, sweep_sep, kernel_table, certify, adversarial, probe})
        add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitConfigError : kExitOk;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = parse_config_json(slurp(config_path));
        if (seed_set) cfg.seed = flags.seed;
        if (seeds_set) cfg.seeds = flags.seeds;
        if (out_set) cfg.out_path = flags.out_path;
        if (alpha_set) cfg.alpha = flags.alpha;
        if (gamma_set) cfg.gamma = flags.gamma;
        if (p_set) cfg.p = flags.p;
        if (n_set) cfg.n = flags.n;
        if (input_set) cfg.input_path = flags.input_path;
        if (exact_set) cfg.exact_count_mask = flags.exact_count_mask;
        if (strict_set) cfg.strict = flags.strict;

        if (synth->parsed()) cfg.mode = "synth";
        else if (recover->parsed()) cfg.mode = "recover";
        else if (sweep_dyn->parsed()) cfg.mode = "sweep-dyn";
        else if (sweep_sep->parsed()) cfg.mode = "sweep-sep";
        else if (kernel_table->parsed()) cfg.mode = "kernel-table";
        else if (certify->parsed()) cfg.mode = "certify";
        else if (adversarial->parsed()) cfg.mode = "adversarial";
        else cfg.mode = "probe-concentration";
        cfg.validate();

        if (cfg.mode == "synth") return cmd_synth(cfg);
        if (cfg.mode == "recover") return cmd_recover(cfg, algo);
        if (cfg.mode == "sweep-dyn") return cmd_sweep_dyn(cfg);
        if (cfg.mode == "sweep-sep") return cmd_sweep_sep(cfg);
        if (cfg.mode == "kernel-table") return cmd_kernel_table(cfg);
        if (cfg.mode == "certify") return cmd_certify(cfg);
        if (cfg.mode == "adversarial") return cmd_adversarial(cfg);
        return cmd_probe(cfg);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRecoveryFailure;
    }
}
