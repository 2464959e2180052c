// test_cli.cpp — Configuration parsing, presets, output files and the command-line binary

#include "dce/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace dce;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("dce_test_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name, const std::string& content) const {
        const auto p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int run_cli(const std::string& args, const std::string& env = {}) {
    const std::string cmd = env + " " + std::string(DCE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A short closed-system SC run used by several CLI tests.
const char* small_run = R"(preset = fig2
[model]
n_max = 6
alpha0 = 0.02
t_switch_off = 60
[simulation]
t_max = 80
dt_out = 2
)";

} // namespace

TEST(Presets, EncodeFigureParameters) {
    const auto f2 = make_preset("fig2");
    EXPECT_EQ(f2.model.tier, Tier::rwa_drive);
    EXPECT_DOUBLE_EQ(f2.model.g1, 0.04);
    EXPECT_DOUBLE_EQ(*f2.model.alpha0, 0.004);
    EXPECT_DOUBLE_EQ(f2.model.omega2, 1.25);
    EXPECT_DOUBLE_EQ(resolved_drive_frequency(f2.model), 2.25);
    EXPECT_DOUBLE_EQ(f2.model.t_switch_off, 1200.0);
    EXPECT_EQ(f2.model.n_max, 15);

    const auto f4 = make_preset("fig4");
    EXPECT_DOUBLE_EQ(*f4.model.alpha0, 0.008);
    EXPECT_NEAR(f4.model.t_switch_off, 377.0, 0.1);
    EXPECT_DOUBLE_EQ(f4.model.noise.gamma_phi2, 5e-6);
    EXPECT_EQ(f4.model.n_max, 20);

    const auto f6 = make_preset("fig6");
    EXPECT_DOUBLE_EQ(f6.model.g1, 0.15);
    EXPECT_DOUBLE_EQ(*f6.model.alpha0, 0.0075);
    EXPECT_EQ(f6.model.drive_policy, DrivePolicy::dressed_gap_sum);

    const auto f7 = make_preset("fig7_lower");
    EXPECT_DOUBLE_EQ(f7.model.g2 / f7.model.omega2, 1.5);
    EXPECT_DOUBLE_EQ(f7.model.omega_q1, 0.1);
    EXPECT_DOUBLE_EQ(*f7.model.alpha0, 0.005);
    EXPECT_EQ(f7.model.n_max, 60);

    for (const auto& p : preset_list()) EXPECT_NO_THROW(make_preset(p.name)) << p.name;
    EXPECT_THROW(make_preset("fig3"), ConfigError);
}

TEST(ConfigParse, OverridesAndStrictness) {
    const auto c = parse_config_string("preset = fig2\n[model]\ng0 = 0.05\n[simulation]\nt_max = 10\n[output]\ncolumns = n1, n2\n");
    EXPECT_DOUBLE_EQ(c.model.g1, 0.05);
    EXPECT_DOUBLE_EQ(c.model.g2, 0.05);
    EXPECT_DOUBLE_EQ(c.simulation.t_max, 10.0);
    EXPECT_EQ(c.output.columns, (std::vector<std::string>{"n1", "n2"}));

    EXPECT_THROW(parse_config_string("[model]\ng_zero = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[modle]\ng0 = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("stray = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[model]\ng0 = abc\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[model]\ntier = nonsense\n"), ConfigError);
    EXPECT_THROW(parse_config_string("[model\ng0 = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = fig2\n[model]\ntier = usc_xy\n"), ConfigError);
    EXPECT_NO_THROW(parse_config_string("preset = fig2\n[model]\ntier = rwa_drive\n"));
}

TEST(ConfigParse, BetaSetsCouplingsRelativeToEachMode) {
    const auto c = parse_config_string("[model]\nomega1 = 1\nomega2 = 1.25\nbeta = 1.5\n");
    EXPECT_DOUBLE_EQ(c.model.g1, 1.5);
    EXPECT_DOUBLE_EQ(c.model.g2, 1.875);
}

TEST(ConfigParse, SweepSections) {
    const auto c = parse_config_string("preset = fig2\n[sweep]\nfield = alpha0\nstart = 0.002\nstop = 0.006\ncount = 3\n");
    ASSERT_TRUE(c.sweep);
    EXPECT_EQ(c.sweep->field, "model.alpha0");
    ASSERT_EQ(c.sweep->values.size(), 3u);
    EXPECT_DOUBLE_EQ(c.sweep->values[1], 0.004);
    EXPECT_THROW(parse_config_string("preset = fig2\n[sweep]\nfield = alpha0\nvalues =\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = fig2\n[sweep]\nfield = alpha0\nstart = 0\nstop = 1\ncount = 0\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = fig2\n[sweep]\nfield = n_max\nvalues = 4, 8\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = fig2\n[sweep]\nfield = model.tier\nvalues = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = fig2\n[sweep]\nvalues = 1, 2\n"), ConfigError);
}

TEST(Output, CsvFormat) {
    TimeSeries ts;
    ts.times = {0.0, 0.5, 1.0 / 3.0};
    ts.names = {"concurrence", "n1"};
    ts.columns = {{0.0, -0.0, 0.123456789012345}, {1e-20, 2.0, 1.0 / 7.0}};
    std::ostringstream s;
    write_series_csv(s, ts);
    EXPECT_EQ(s.str(), "t,concurrence,n1\n0,0,1e-20\n0.5,0,2\n0.333333333333,0.123456789012,0.142857142857\n");
    std::ostringstream k;
    write_series_csv(k, ts, "alpha0", 0.25, false);
    EXPECT_EQ(k.str().substr(0, 11), "0.25,0,0,1e");
}

TEST(Cli, RunWritesDeterministicCsvAndSvg) {
    TempDir d;
    const std::string cfg =
        d.file("a.cfg", std::string(small_run) + "[output]\ncsv_path = " + (d.path / "a.csv").string() + "\nsvg_path = " +
                            (d.path / "a.svg").string() + "\n");
    ASSERT_EQ(run_cli("run " + cfg), 0);
    const std::string first = slurp(d.path / "a.csv");
    ASSERT_EQ(run_cli("run " + cfg), 0);
    EXPECT_EQ(first, slurp(d.path / "a.csv"));
    EXPECT_EQ(first.substr(0, first.find('\n')), "t,concurrence,fidelity_bell,n1,n2,trace,leakage");
    EXPECT_EQ(first.find('\r'), std::string::npos);
    // 0..80 step 2 plus the switch-off sample already on the grid
    EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 1 + 41);
    EXPECT_NE(slurp(d.path / "a.svg").find("<polyline"), std::string::npos);
}

TEST(Cli, ExitCodesByErrorCategory) {
    TempDir d;
    const std::string csv = (d.path / "out.csv").string();
    const std::string bad = d.file("bad.cfg", "preset = fig2\n[model]\nn_max = banana\n[output]\ncsv_path = " + csv + "\n");
    EXPECT_EQ(run_cli("run " + bad), 2);
    EXPECT_FALSE(fs::exists(csv));
    EXPECT_EQ(run_cli("run " + (d.path / "missing.cfg").string()), 2);
    // the drive outgrows n_max = 3 and growth is disabled
    const std::string heavy = d.file("heavy.cfg", "preset = fig2\n[model]\nn_max = 3\nalpha0 = 0.05\n[simulation]\nt_max = 200\n"
                                                  "auto_truncation = false\n[output]\ncsv_path = " + csv + "\n");
    EXPECT_EQ(run_cli("run " + heavy), 3);
    EXPECT_FALSE(fs::exists(csv));
    EXPECT_EQ(run_cli("presets"), 0);
    EXPECT_NE(run_cli("frobnicate"), 0);
}

TEST(Cli, SweepIsIndependentOfThreadCount) {
    TempDir d;
    auto cfg = [&](const std::string& name) {
        return d.file(name + ".cfg", std::string(small_run) + "[sweep]\nfield = alpha0\nvalues = 0.01, 0.02, 0.03\n[output]\ncsv_path = " +
                                         (d.path / (name + ".csv")).string() + "\n");
    };
    ASSERT_EQ(run_cli("sweep " + cfg("one"), "DCE_THREADS=1"), 0);
    ASSERT_EQ(run_cli("sweep " + cfg("three"), "DCE_THREADS=3"), 0);
    const std::string a = slurp(d.path / "one.csv");
    EXPECT_EQ(a, slurp(d.path / "three.csv"));
    EXPECT_EQ(a.substr(0, a.find('\n')), "alpha0,t,concurrence,fidelity_bell,n1,n2,trace,leakage");
    EXPECT_EQ(run_cli("sweep " + cfg("bad"), "DCE_THREADS=0"), 2);
}

TEST(Cli, SpectrumRowsAndDeepStrongDegeneracy) {
    ExperimentConfig c = make_preset("fig5");
    TempDir d;
    c.output.csv_path = (d.path / "s.csv").string();
    c.spectrum.points = 6;
    c.spectrum.levels = 4;
    EXPECT_EQ(command_spectrum(c), 24u);
    const auto rows = rabi_spectrum(c.model, {1.25}, 2);
    EXPECT_LT(rows[1].energy - rows[0].energy, 0.05);
    const std::string csv = slurp(c.output.csv_path);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "g_over_omega,level,energy,parity");
}

TEST(Sweeps, StrongerDriveEntanglesFaster) {
    ExperimentConfig c = make_preset("fig2");
    c.model.tier = Tier::sc_ladder;
    c.model.t_switch_off = std::numeric_limits<double>::infinity();
    c.simulation.t_max = 600.0;
    c.simulation.dt_out = 2.0;
    TempDir d;
    c.output.csv_path = (d.path / "s.csv").string();
    c.sweep = SweepSpec{"model.alpha0", {0.002, 0.003, 0.004}};
    const auto r = command_sweep(c, 1);
    ASSERT_EQ(r.size(), 3u);
    // during the initial rise the concurrence reached by t_max grows with the drive
    EXPECT_LT(r[0].peak_concurrence, r[1].peak_concurrence);
    EXPECT_LT(r[1].peak_concurrence, r[2].peak_concurrence);
    for (const auto& s : r) EXPECT_GT(s.peak_concurrence, 0.1);
}

TEST(Sweeps, XyDecayRatioControlsSwitchOffConcurrence) {
    ExperimentConfig c = make_preset("fig6_dissipative");
    c.model.tier = Tier::usc_xy;
    c.model.noise = {};
    c.simulation.t_max = 400.0;
    TempDir d;
    c.output.csv_path = (d.path / "s.csv").string();
    c.sweep = SweepSpec{"model.gamma_over_lambda", {0.001, 0.01, 0.1}};
    const auto r = command_sweep(c, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        const double ratio = c.sweep->values[i];
        EXPECT_NEAR(r[i].peak_concurrence, 1 - (std::numbers::pi - 2) * ratio, ratio < 0.05 ? 0.01 : 0.05) << ratio;
    }
}
