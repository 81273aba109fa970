#include <doctest.h>

#include <cmath>
#include <sstream>

#include "somp/experiments.hpp"
#include "somp/io.hpp"

using namespace somp;

TEST_CASE("config json: defaults, overrides, unknown keys") {
    ExperimentConfig cfg = parse_config_json(R"({"mode":"sweep-dyn","n":100,"s":3,"seeds":2})");
    CHECK(cfg.n == 100);
    CHECK(cfg.s == 3);
    CHECK(cfg.seeds == 2);
    CHECK(cfg.effective_n_grid() == std::lround(1800.0 * 100 / 394.0));
    CHECK(cfg.effective_max_spikes() == 6);

    CHECK_THROWS_AS(parse_config_json(R"({"mode":"sweep-dyn","bogus":1})"), ParameterError);
    CHECK_THROWS_AS(parse_config_json(R"({"mode":"nope"})"), ParameterError);
    CHECK_THROWS_AS(parse_config_json(R"({"mode":"sweep-dyn","p":1.5})"), ParameterError);
    CHECK_THROWS_AS(parse_config_json("not json"), ParseError);

    ExperimentConfig algos = parse_config_json(
        R"({"mode":"sweep-dyn","algos":[{"algo":"omp","alpha":1},{"algo":"sliding_omp","alpha":4}]})");
    REQUIRE(algos.algos.size() == 2);
    CHECK(algos.algos[0].label() == "omp_a1");
    CHECK(algos.algos[1].label() == "sliding_omp_a4");
    CHECK_THROWS_AS(
        parse_config_json(R"({"mode":"sweep-dyn","algos":[{"algo":"omp","alpha":1,"x":2}]})"),
        ParameterError);
}

TEST_CASE("make_sweep_instance: fig4 rule and determinism") {
    SpikeTrain a = make_sweep_instance(394, 5, 1.15, "fig4", 8.0, 42);
    SpikeTrain b = make_sweep_instance(394, 5, 1.15, "fig4", 8.0, 42);
    CHECK(a.taus == b.taus);
    for (int i = 0; i < 5; ++i) CHECK(a.amps[static_cast<std::size_t>(i)] ==
                                      b.amps[static_cast<std::size_t>(i)]);
    CHECK(dynamic_range(a) == doctest::Approx(8.0));
    CHECK(min_separation(a) * 394 == doctest::Approx(1.15));
    // tau_i = (1+i) Delta with Delta = 1.15/n
    for (int i = 0; i < 5; ++i)
        CHECK(a.taus[static_cast<std::size_t>(i)] ==
              doctest::Approx(double(i + 2) * 1.15 / 394.0));

    SpikeTrain c = make_sweep_instance(394, 5, 2.0, "fig6-v1", 1.0, 7);
    CHECK(dynamic_range(c) >= 1.0);
    for (const cd& amp : c.amps) {
        CHECK(std::abs(amp) >= 1.0 + 1.0);  // 1 + 10^u with u >= 0
        CHECK(std::abs(amp) <= 1.0 + 10.0);
    }
}

TEST_CASE("sample file round-trip") {
    SpikeTrain st{{0.21, 0.68}, {cd{1.5, -0.25}, cd{-0.5, 2.0}}};
    SampleVector y = synthesize(st, 12);
    ObservationMask mask = bernoulli_symmetric_mask(12, 0.7, 3);

    std::ostringstream os;
    write_sample_file(os, y, mask, csv_metadata("deadbeef", "3"));
    std::istringstream is(os.str());
    SampleFile sf = read_sample_file(is);
    CHECK(sf.samples.n == 12);
    CHECK(sf.mask.observed == mask.observed);
    for (int l = -12; l <= 12; ++l) {
        const std::size_t i = static_cast<std::size_t>(l + 12);
        if (mask.at(l))
            CHECK(std::abs(sf.samples.values[i] - y.values[i]) < 1e-15);
        else
            CHECK(sf.samples.values[i] == cd{0.0, 0.0});
    }
}

TEST_CASE("sample file: malformed inputs name the problem") {
    SUBCASE("bad header") {
        std::istringstream is("ell,re,im\n0,1,0\n");
        CHECK_THROWS_WITH_AS(read_sample_file(is),
                             doctest::Contains("expected header 'ell,re,im,observed'"),
                             ParseError);
    }
    SUBCASE("missing field on a row") {
        std::istringstream is("ell,re,im,observed\n-1,1,0\n");
        CHECK_THROWS_WITH_AS(read_sample_file(is), doctest::Contains("expected 4 fields"),
                             ParseError);
    }
    SUBCASE("non-contiguous ell") {
        std::istringstream is("ell,re,im,observed\n-1,1,0,1\n1,1,0,1\n2,0,0,1\n");
        CHECK_THROWS_WITH_AS(read_sample_file(is), doctest::Contains("contiguous"), ParseError);
    }
    SUBCASE("asymmetric observation pattern") {
        std::istringstream is("ell,re,im,observed\n-1,0,0,0\n0,1,0,1\n1,1,0,1\n");
        CHECK_THROWS_WITH_AS(read_sample_file(is), doctest::Contains("symmetry"), ParseError);
    }
    SUBCASE("bad numeric field") {
        std::istringstream is("ell,re,im,observed\n-1,x,0,1\n0,1,0,1\n1,1,0,1\n");
        CHECK_THROWS_WITH_AS(read_sample_file(is), doctest::Contains("field 're'"), ParseError);
    }
}

TEST_CASE("kernel table output") {
    std::ostringstream os;
    emit_kernel_table(os, {1, 2, 4}, 100, 200, csv_metadata("h", "0"));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);  // comment
    CHECK(line.rfind("# ", 0) == 0);
    while (line.rfind("#", 0) == 0) std::getline(is, line);
    CHECK(line == "t,K_a1,K_a2,K_a4");
    bool saw_center = false;
    while (std::getline(is, line)) {
        if (line.rfind("0,", 0) == 0 || line.rfind("-0,", 0) == 0) {
            CHECK(line == "0,1,1,1");
            saw_center = true;
        }
    }
    CHECK(saw_center);
}

TEST_CASE("sweep rows: shape, determinism, recovery flag consistency") {
    ExperimentConfig cfg;
    cfg.mode = "sweep-dyn";
    cfg.n = 64;
    cfg.s = 3;
    cfg.n_delta = 8.0;
    cfg.u_list = {1.0, 4.0};
    cfg.seeds = 2;
    cfg.seed = 5;
    cfg.p = 1.0;
    cfg.t_slide = 60;
    cfg.workers = 2;
    cfg.algos = {{Algo::sliding_omp, 4}, {Algo::omp, 4}};
    cfg.validate();

    std::vector<SweepRow> rows = run_sweep_dyn(cfg);
    CHECK(rows.size() == 2 * 2 * 2);  // |u| x seeds x algos
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.max_err));
        CHECK(r.recovered == ((r.found == cfg.s) && (r.max_err < kRecoveryTol)));
    }
    std::vector<SweepRow> again = run_sweep_dyn(cfg);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].coord == again[i].coord);
        CHECK(rows[i].seed == again[i].seed);
        CHECK(rows[i].algo == again[i].algo);
        CHECK(rows[i].max_err == again[i].max_err);  // bit-identical data
        CHECK(rows[i].found == again[i].found);
    }

    std::ostringstream csv;
    write_sweep_csv(csv, rows, false, csv_metadata("h", "5+2"));
    std::istringstream is(csv.str());
    std::string line;
    int data_rows = 0;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'u') ++data_rows;
    CHECK(data_rows == 8);
}

TEST_CASE("sweep-sep easy regime recovers everywhere") {
    ExperimentConfig cfg;
    cfg.mode = "sweep-sep";
    cfg.n = 64;
    cfg.s = 3;
    cfg.seeds = 2;
    cfg.seed = 11;
    cfg.p = 1.0;
    cfg.t_slide = 80;
    cfg.n_delta_list = {20.0};
    cfg.v_list = {0.5};
    cfg.workers = 2;
    cfg.algos = {{Algo::sliding_omp, 4}};
    cfg.validate();
    std::vector<SweepRow> rows = run_sweep_separation(cfg);
    CHECK(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.max_err));
        CHECK(r.recovered);
    }
}

TEST_CASE("end-to-end: synth, serialize, recover") {
    const int n = 48;
    SpikeTrain st = make_sweep_instance(n, 3, 12.0, "unit", 1.0, 9);
    SampleVector y = synthesize(st, n);
    ObservationMask mask;
    mask.n = n;
    mask.p = 1.0;
    mask.observed.assign(static_cast<std::size_t>(2 * n + 1), 1);

    std::ostringstream os;
    write_sample_file(os, y, mask, csv_metadata("cfg", "9"));
    std::istringstream is(os.str());
    SampleFile sf = read_sample_file(is);

    ExperimentConfig cfg;
    cfg.mode = "recover";
    cfg.n = n;
    cfg.s = 3;
    cfg.gamma = 0.4;
    RecoverOutcome ro = run_recovery(sf.samples, sf.mask, cfg, Algo::sliding_omp, 4, 1.0);
    REQUIRE(ro.result.omegas.size() == 3);
    Matching m = match_frequencies(ro.result.omegas, st);
    CHECK(m.max_error < 1e-6);
}

TEST_CASE("CSV data sections are byte-identical across re-runs") {
    std::ostringstream a, b;
    emit_kernel_table(a, {1, 2, 4}, 64, 500, csv_metadata("h", "0"));
    emit_kernel_table(b, {1, 2, 4}, 64, 500, csv_metadata("h", "0"));
    CHECK(a.str() == b.str());

    ExperimentConfig cfg;
    cfg.mode = "sweep-dyn";
    cfg.n = 64;
    cfg.s = 2;
    cfg.n_delta = 10.0;
    cfg.u_list = {1.0};
    cfg.seeds = 1;
    cfg.t_slide = 40;
    cfg.algos = {{Algo::sliding_omp, 4}};
    std::vector<SweepRow> r1 = run_sweep_dyn(cfg);
    std::vector<SweepRow> r2 = run_sweep_dyn(cfg);
    for (auto* rows : {&r1, &r2})
        for (auto& r : *rows) r.wall_ms = 0.0;  // timing is not data
    std::ostringstream c1, c2;
    write_sweep_csv(c1, r1, false, csv_metadata("h", "0+1"));
    write_sweep_csv(c2, r2, false, csv_metadata("h", "0+1"));
    CHECK(c1.str() == c2.str());
}

TEST_CASE("small-dyn regime: sliding-OMP a4 recovers on all ten seeds") {
    ExperimentConfig cfg;
    cfg.mode = "sweep-dyn";
    cfg.n = 394;
    cfg.s = 5;
    cfg.n_delta = 1.15;
    cfg.p = 180.0 / 789.0;
    cfg.u_list = {1.0};
    cfg.seeds = 10;
    cfg.workers = 2;
    cfg.algos = {{Algo::sliding_omp, 4}};
    for (const SweepRow& r : run_sweep_dyn(cfg)) CHECK(r.recovered);
}

TEST_CASE("a paper-scale sweep cell runs in under five seconds") {
    ExperimentConfig cfg;
    cfg.mode = "sweep-dyn";
    cfg.n = 394;
    cfg.s = 5;
    cfg.n_delta = 1.15;
    cfg.p = 180.0 / 789.0;
    const SpikeTrain truth = make_sweep_instance(394, 5, 1.15, "fig4", 8.0, 3);
    const SampleVector y = synthesize(truth, 394);
    const ObservationMask mask = bernoulli_symmetric_mask(394, cfg.p, 3);
    RecoverOutcome ro = run_recovery(y, mask, cfg, Algo::sliding_omp, 4, 1.0);
    CHECK(ro.wall_ms < 5000.0);
}

TEST_CASE("fnv1a digest is stable") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("somp") == fnv1a("somp"));
    CHECK(fnv1a("a") != fnv1a("b"));
}
