#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "hyperharmonic/pipeline.hpp"
#include "support.hpp"
#include "tree.hpp"

using namespace hyperharmonic;
namespace fs = std::filesystem;
using Catch::Matchers::ContainsSubstring;

namespace {

const std::string kCli = HYPERHARMONIC_CLI;
const fs::path kSamples = HYPERHARMONIC_SAMPLES;

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

int cli(const std::string& args) { return tree::run("'" + kCli + "' " + args); }

PipelineConfig xor_config(const fs::path& out)
{
    PipelineConfig cfg;
    cfg.input = (kSamples / "xor.csv").string();
    cfg.output_dir = out.string();
    return cfg;
}

}  // namespace

TEST_CASE("settings parse and validate")
{
    PipelineConfig cfg;
    apply_setting(cfg, "dimensions", "2, 3");
    apply_setting(cfg, "measures", "omega,tc");
    apply_setting(cfg, "aggregator", "max");
    apply_setting(cfg, "floor", "1e-6");
    apply_setting(cfg, "kind", "continuous");
    apply_setting(cfg, "seed", "18446744073709551615");
    CHECK(cfg.dimensions == std::vector<int>{2, 3});
    CHECK(cfg.measures == std::vector<MeasureKind>{MeasureKind::o_information, MeasureKind::tc});
    CHECK(cfg.aggregator == WeightAggregator::max);
    CHECK(cfg.weight_floor == 1e-6);
    CHECK(cfg.kind == DataKind::continuous);
    CHECK(cfg.seed == 18446744073709551615ULL);
    CHECK_THROWS_AS(apply_setting(cfg, "colour", "blue"), ValidationError);
    CHECK_THROWS_AS(apply_setting(cfg, "floor", "abc"), ValidationError);
    CHECK_THROWS_AS(apply_setting(cfg, "jobs", "2.5"), ValidationError);

    PipelineConfig bad;
    bad.kernel_tolerance = 0.0;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
    bad = PipelineConfig{};
    bad.weight_floor = -1.0;
    CHECK_THROWS_AS(validate_config(bad), ValidationError);
}

TEST_CASE("recorded settings restore the configuration")
{
    PipelineConfig cfg;
    apply_setting(cfg, "dimensions", "2,4");
    apply_setting(cfg, "metric", "abs_pearson");
    apply_setting(cfg, "floor", "0.001");
    apply_setting(cfg, "laplacian", "step4_printed");
    PipelineConfig restored;
    for (const auto& [key, value] : recorded_settings(cfg))
        apply_setting(restored, key, value);
    CHECK(recorded_settings(restored) == recorded_settings(cfg));
}

TEST_CASE("config files")
{
    const auto text = "# comment\n\ndimensions = 2,3\n  metric=tv \n";
    const auto pairs = parse_config_text(text);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[1] == std::pair<std::string, std::string>{"metric", "tv"});
    CHECK_THROWS_WITH(parse_config_text("a = 1\nbroken\n"), ContainsSubstring("line 2"));
}

TEST_CASE("run on the xor system")
{
    const fs::path out = support::scratch_dir("xor");
    run_pipeline(xor_config(out));
    CHECK_FALSE(fs::exists(out / kIncompleteMarker));
    CHECK(tree::slurp(out / "signals/o_information_n2.csv") == "simplex,value\n0-1-2,-1\n");
    const io::json report = io::read_json(out / "report.json");
    CHECK(report.at("signals").size() == 4);
    CHECK(tree::slurp(out / "components_at.csv").starts_with("measure,dimension,basis,threshold,components\n"));
    const io::json manifest = io::read_json(out / "manifest.json");
    CHECK(manifest.at("command") == "run");
    CHECK(manifest.at("settings").at("dimensions") == "");
    CHECK_FALSE(manifest.at("settings").contains("output"));
    CHECK(fs::exists(out / "spectrum/spectrum_n2.json"));
}

TEST_CASE("all-zero signals are reported per signal without aborting")
{
    const fs::path dir = support::scratch_dir("independent");
    write_file(dir / "ind.csv", "a,b,c\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n0,0,1\n0,1,0\n1,0,0\n1,1,1\n");
    PipelineConfig cfg;
    cfg.input = (dir / "ind.csv").string();
    cfg.output_dir = (dir / "out").string();
    run_pipeline(cfg);
    const io::json report = io::read_json(dir / "out/report.json");
    for (const auto& entry : report.at("signals"))
        CHECK_THAT(entry.at("error").get<std::string>(), ContainsSubstring("all-zero"));
    CHECK_FALSE(fs::exists(dir / "out" / kIncompleteMarker));
}

TEST_CASE("failures leave an incomplete marker")
{
    const fs::path dir = support::scratch_dir("failure");
    PipelineConfig cfg;
    cfg.input = (dir / "missing.csv").string();
    cfg.output_dir = (dir / "out").string();
    CHECK_THROWS_AS(run_pipeline(cfg), IoError);
    CHECK_THAT(tree::slurp(dir / "out" / kIncompleteMarker), ContainsSubstring("missing.csv"));
}

TEST_CASE("staged subcommands chain into the same results as run")
{
    const fs::path dir = support::scratch_dir("staged");
    const std::string xor_csv = (kSamples / "xor.csv").string();
    PipelineConfig cfg = xor_config(dir / "run");
    run_pipeline(cfg);

    PipelineConfig stage;
    stage.input = xor_csv;
    stage.output_dir = (dir / "estimate").string();
    run_estimate(stage);
    stage = PipelineConfig{};
    stage.distribution = (dir / "estimate/distribution.json").string();
    stage.output_dir = (dir / "complex").string();
    run_complex(stage);
    stage.output_dir = (dir / "signals").string();
    run_signals(stage);
    stage = PipelineConfig{};
    stage.structural = (dir / "complex/structural.json").string();
    stage.output_dir = (dir / "spectrum").string();
    run_spectrum(stage);
    stage = PipelineConfig{};
    stage.signals = (dir / "signals/signals.json").string();
    stage.spectrum_dir = (dir / "spectrum/spectrum").string();
    stage.output_dir = (dir / "transform").string();
    run_transform(stage);
    stage = PipelineConfig{};
    stage.signals = (dir / "transform/fourier_signals.json").string();
    stage.output_dir = (dir / "cev").string();
    run_cev(stage);

    CHECK(tree::slurp(dir / "signals/signals.json") == tree::slurp(dir / "run/signals.json"));
    CHECK(tree::slurp(dir / "complex/structural.json") == tree::slurp(dir / "run/structural.json"));
    CHECK(tree::slurp(dir / "transform/fourier_signals.json") == tree::slurp(dir / "run/fourier_signals.json"));
    CHECK(tree::slurp(dir / "spectrum/spectrum/spectrum_n2.json") ==
          tree::slurp(dir / "run/spectrum/spectrum_n2.json"));
    CHECK(fs::exists(dir / "complex/complex/boundary_n2.csv"));
    CHECK(fs::exists(dir / "cev/components_at.csv"));
}

TEST_CASE("command-line interface")
{
    const fs::path dir = support::scratch_dir("cli");
    const std::string xor_csv = (kSamples / "xor.csv").string();

    SECTION("exit codes")
    {
        CHECK(cli("run --input " + xor_csv + " --output " + (dir / "ok").string()) == 0);
        CHECK(cli("run --input " + (dir / "nope.csv").string() + " --output " + (dir / "io").string()) == 3);
        CHECK(cli("run --input " + xor_csv + " --dimensions 7 --output " + (dir / "v").string()) == 2);
        CHECK(cli("run --no-such-flag") == 2);
        CHECK(cli("") == 2);
        write_file(dir / "const.csv", "a,b,c\n1,2,3\n1,5,6\n1,8,9\n1,1,1\n");
        CHECK(cli("run --kind continuous --input " + (dir / "const.csv").string() + " --output " +
                  (dir / "num").string()) == 4);
        CHECK(cli("run --max-n 1 --input " + xor_csv + " --output " + (dir / "cap").string()) == 5);
        CHECK(cli("--help") == 0);
    }
    SECTION("config files lose to flags")
    {
        write_file(dir / "settings.conf", "measures = tc\naggregator = max\n");
        REQUIRE(cli("run --config " + (dir / "settings.conf").string() + " --measures dtc --input " + xor_csv +
                    " --output " + (dir / "cfg").string()) == 0);
        const io::json m = io::read_json(dir / "cfg/manifest.json");
        CHECK(m.at("settings").at("measures") == "dtc");
        CHECK(m.at("settings").at("aggregator") == "max");
    }
    SECTION("output directory from the environment")
    {
        const std::string env_dir = (dir / "from-env").string();
        REQUIRE(tree::run("cd '" + dir.string() + "' && " + std::string(kOutputDirEnv) + "='" + env_dir + "' '" +
                          kCli + "' estimate --input " + xor_csv) == 0);
        CHECK(fs::exists(fs::path(env_dir) / "distribution.json"));
    }
    SECTION("manifest replay is byte-identical")
    {
        REQUIRE(cli("run --input " + xor_csv + " --measures o_information,tc --output " + (dir / "a").string()) == 0);
        REQUIRE(cli("run --manifest " + (dir / "a/manifest.json").string() + " --output " + (dir / "b").string()) ==
                0);
        CHECK(tree::snapshot(dir / "a") == tree::snapshot(dir / "b"));
    }
    SECTION("controls")
    {
        REQUIRE(cli("control-random --input " + xor_csv + " --random-bases 80 --output " + (dir / "cr").string()) ==
                0);
        CHECK(tree::slurp(dir / "cr/control_random.csv")
                  .starts_with("measure,dimension,basis_kind,replicate,k,cev\n"));
        REQUIRE(cli("control-synth --quick --ranks 2,6 --size 6 --samples 2000 --dimensions 2,3 --output " +
                    (dir / "cs").string()) == 0);
        CHECK(tree::slurp(dir / "cs/control_synth.csv").starts_with("rank,dimension,measure,k,mean_cev,ci_low,ci_high\n"));
        CHECK(cli("control-synth --quick --ranks 12 --output " + (dir / "cs-bad").string()) == 2);
    }
}
