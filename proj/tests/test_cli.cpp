#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false,
                  const std::string& env_prefix = "")
{
    const std::string cmd = (env_prefix.empty() ? "" : env_prefix + " ") + LIPCERT_CLI_PATH +
                            " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0)
        result.out.append(buf, n);
    const int status = pclose(pipe);
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string toy_path() { return std::string(LIPCERT_DATA_DIR) + "/tanh_toy.lipnet"; }

} // namespace

TEST_CASE("exit codes follow the documented contract")
{
    CHECK(run_cli("").code == 1);                       // missing subcommand
    CHECK(run_cli("certify").code == 1);                // missing netfile
    CHECK(run_cli("certify x.lipnet --frobnicate").code == 1); // unknown flag is fatal
    CHECK(run_cli("experiment bogus").code == 1);       // unknown experiment name
    CHECK(run_cli("certify /nonexistent.lipnet").code == 2);
    CHECK(run_cli("certify " + toy_path() + " --norm-in 2 --norm-out 1").code == 3);
    CHECK(run_cli("certify " + toy_path()).code == 0);
    CHECK(run_cli("--help").code == 0);
}

TEST_CASE("vartheta on a non-separable net reports not-applicable")
{
    const std::string net = R"(lipnet 1
input_dim 2
layer
  dims 2 2
  weights
  1,0
  0,1
  bias 0,0
  activation sort_mix(omega=0.5,set=mean)
layer
  dims 2 2
  weights
  1,0
  0,1
  bias 0,0
  activation identity
)";
    const std::string path = "/tmp/lipcert_test_sortmix.lipnet";
    FILE* f = fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    fwrite(net.data(), 1, net.size(), f);
    fclose(f);

    const CliResult r = run_cli("certify " + path + " --method vartheta", true);
    CHECK(r.code == 3);
    CHECK(r.out.find("separable") != std::string::npos);

    // auto still certifies through theta and the product bound
    CHECK(run_cli("certify " + path).code == 0);
    std::remove(path.c_str());
}

TEST_CASE("json outputs are well-formed and byte-identical across runs")
{
    const CliResult a = run_cli("certify " + toy_path() + " --json --seed 42");
    const CliResult b = run_cli("certify " + toy_path() + " --json --seed 42");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const nlohmann::json doc = nlohmann::json::parse(a.out);
    CHECK(doc.at("vartheta").get<double>() == doctest::Approx(59.54).epsilon(2e-4));
    CHECK(doc.at("vartheta_exact").get<bool>());
    CHECK(doc.at("elapsed_ms").get<double>() == 0.0);

    const CliResult e1 = run_cli("experiment numeric --trials 5 --seed 3 --json");
    const CliResult e2 = run_cli("experiment numeric --trials 5 --seed 3 --json");
    CHECK(e1.code == 0);
    CHECK(e1.out == e2.out);
    CHECK_NOTHROW(nlohmann::json::parse(e1.out));

    const CliResult t1 = run_cli("experiment tanh --json");
    const nlohmann::json toy = nlohmann::json::parse(t1.out);
    CHECK(toy.at("linear").get<double>() == doctest::Approx(54.72).epsilon(2e-4));
}

TEST_CASE("activations commands")
{
    const CliResult list = run_cli("activations list");
    CHECK(list.code == 0);
    CHECK(list.out.find("gaussian") != std::string::npos);
    CHECK(list.out.find("relu") != std::string::npos);

    const CliResult listj = run_cli("activations list --json");
    const nlohmann::json cat = nlohmann::json::parse(listj.out);
    bool saw_gaussian = false;
    for (const auto& row : cat) {
        if (row.at("name") == "gaussian") {
            saw_gaussian = true;
            CHECK(row.at("alpha").get<double>() == doctest::Approx(0.92888).epsilon(1e-4));
            CHECK_FALSE(row.at("prox_representable").get<bool>());
        }
    }
    CHECK(saw_gaussian);

    CHECK(run_cli("activations certify relu").code == 0);
    CHECK(run_cli("activations certify relu --alpha 0.4").code == 2);
    CHECK(run_cli("activations certify nope", true).code == 2);
}

TEST_CASE("inspect summarizes the network")
{
    const CliResult r = run_cli("inspect " + toy_path());
    CHECK(r.code == 0);
    CHECK(r.out.find("tanh") != std::string::npos);

    const CliResult j = run_cli("inspect " + toy_path() + " --json");
    const nlohmann::json doc = nlohmann::json::parse(j.out);
    CHECK(doc.at("input_dim").get<int>() == 2);
    CHECK(doc.at("layers").size() == 2);
}

TEST_CASE("budget and method selection")
{
    // the toy needs 4 patterns; an environment budget of 2 starves it
    const CliResult starved =
        run_cli("certify " + toy_path() + " --method vartheta", true, "LIPCERT_BUDGET=2");
    CHECK(starved.code == 3);
    CHECK(starved.out.find("budget") != std::string::npos);
    CHECK(run_cli("certify " + toy_path() + " --method vartheta --budget 4").code == 0);

    // the transformed toy is not sign-factorizable
    CHECK(run_cli("certify " + toy_path() + " --method positive").code == 3);

    const std::string net = R"(lipnet 1
input_dim 2
layer
  dims 2 2
  weights
  1,2
  3,4
  bias 0,0
  activation relu
)";
    const std::string path = "/tmp/lipcert_test_nonneg.lipnet";
    FILE* f = fopen(path.c_str(), "w");
    REQUIRE(f != nullptr);
    fwrite(net.data(), 1, net.size(), f);
    fclose(f);
    const CliResult pos = run_cli("certify " + path + " --method positive --json");
    CHECK(pos.code == 0);
    const nlohmann::json doc = nlohmann::json::parse(pos.out);
    CHECK(doc.at("positive_collapse").get<double>() ==
          doctest::Approx(doc.at("linear_lower").get<double>()));
    std::remove(path.c_str());

    CHECK(run_cli("experiment numeric --trials 2 --dims 2,2", true).code == 2);
}

TEST_CASE("dump-trials writes one row per trial")
{
    const std::string csv = "/tmp/lipcert_test_trials.csv";
    const CliResult r =
        run_cli("experiment numeric --trials 4 --seed 9 --vartheta --dims 3,4,3,2 --dump-trials " +
                csv);
    CHECK(r.code == 0);
    FILE* f = fopen(csv.c_str(), "r");
    REQUIRE(f != nullptr);
    int lines = 0;
    int ch;
    while ((ch = fgetc(f)) != EOF)
        if (ch == '\n')
            ++lines;
    fclose(f);
    CHECK(lines == 5); // header + 4 trials
    std::remove(csv.c_str());
}
