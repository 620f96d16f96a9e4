#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "test_helpers.hpp"

// End-to-end runs of the installed binary over toy files.

namespace {

using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

const char* kObservations =
    "observation_id,chooser_id,choice_set,chosen_item,weight\n"
    "0,a,red|blue,red,2\n"
    "1,a,red|blue|green,red,1\n"
    "2,b,red|blue,blue,1\n"
    "3,b,blue|green,blue,1\n"
    "4,c,red|green,green,1\n"
    "5,c,red|blue|green,green,1\n"
    "6,d,red|blue,red,1\n"
    "7,d,red|green,red,1\n"
    "8,e,blue|green,green,1\n"
    "9,e,red|blue|green,green,2\n"
    "10,f,red|blue,blue,1\n"
    "11,f,blue|green,blue,1\n";

const char* kEdges =
    "node_a,node_b\n"
    "a,b\nb,c\nc,d\nd,e\ne,f\nf,a\na,d\n";

int run(const std::string& command_line) {
  const int status = std::system(command_line.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli() { return NETCHOICE_CLI_PATH; }

std::string base_config(const TempDir& tmp, const std::string& extra) {
  return std::string("{\n") +
         "  \"paths\": {\"observations\": \"" + tmp.path("obs.csv") +
         "\", \"edges\": \"" + tmp.path("edges.csv") + "\"},\n" +
         "  \"train_fraction\": 0.5,\n  \"seed\": 3,\n  \"out\": \"" +
         tmp.path("out") + "\"" + extra + "\n}\n";
}

}  // namespace

TEST_CASE("cli train writes params and report deterministically") {
  TempDir tmp("cli_train");
  write_file(tmp.path("obs.csv"), kObservations);
  write_file(tmp.path("edges.csv"), kEdges);
  write_file(tmp.path("cfg.json"),
             base_config(tmp,
                         ",\n  \"method\": \"laplacian\",\n"
                         "  \"max_epochs\": 20,\n"
                         "  \"grid\": {\"learning_rates\": [0.05],"
                         " \"l2_strengths\": [0.001], \"lambdas\": [0.5]}"));

  const std::string cmd = cli() + " --config " + tmp.path("cfg.json") +
                          " train 2> " + tmp.path("stderr1.txt");
  REQUIRE(run(cmd) == 0);
  CHECK(std::filesystem::exists(tmp.path("out/params.json")));
  CHECK(std::filesystem::exists(tmp.path("out/report.json")));
  const std::string first = read_file(tmp.path("out/params.json"));

  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " train 2> " +
              tmp.path("stderr2.txt")) == 0);
  CHECK(read_file(tmp.path("out/params.json")) == first);  // byte-identical

  // Timing lands on stderr.
  CHECK(read_file(tmp.path("stderr1.txt")).find("[time] train") !=
        std::string::npos);
}

TEST_CASE("cli evaluate scores fitted parameters") {
  TempDir tmp("cli_eval");
  write_file(tmp.path("obs.csv"), kObservations);
  write_file(tmp.path("edges.csv"), kEdges);
  write_file(tmp.path("cfg.json"),
             base_config(tmp,
                         ",\n  \"method\": \"logit\",\n  \"max_epochs\": 30,\n"
                         "  \"grid\": {\"learning_rates\": [0.05],"
                         " \"l2_strengths\": [0.01]}"));
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " train 2> " +
              tmp.path("e0.txt")) == 0);
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") +
              " evaluate --params " + tmp.path("out/params.json") + " > " +
              tmp.path("metrics_stdout.txt") + " 2> " + tmp.path("e1.txt")) ==
          0);
  const std::string metrics = read_file(tmp.path("out/metrics.json"));
  CHECK(metrics.find("\"nll\"") != std::string::npos);
  CHECK(metrics.find("\"mrr\"") != std::string::npos);
}

TEST_CASE("cli evaluate exact values on a hand-built model") {
  TempDir tmp("cli_eval_exact");
  // Every observation offers two items and picks red; weights sum to 4.
  write_file(tmp.path("obs.csv"),
             "observation_id,chooser_id,choice_set,chosen_item,weight\n"
             "0,a,red|blue,red,2\n"
             "1,a,red|green,red,1\n"
             "2,b,red|blue,red,1\n");
  write_file(tmp.path("cfg.json"),
             std::string("{\n  \"paths\": {\"observations\": \"") +
                 tmp.path("obs.csv") + "\"},\n  \"evaluate_on\": \"all\",\n" +
                 "  \"out\": \"" + tmp.path("out") + "\"\n}\n");

  auto params_json = [](double u_red) {
    return std::string(R"({"spec": {"family": "logit",
      "per_chooser_intercepts": false, "n": 2, "k": 3, "d_x": 0, "d_y": 0},
      "u": [)") + std::to_string(u_red) + R"(, 0.0, 0.0],
      "gamma": [], "theta": [], "v": []})";
  };
  auto metric = [&](const std::string& name) {
    const std::string text = read_file(tmp.path("out/metrics.json"));
    const auto pos = text.find("\"" + name + "\":");
    REQUIRE(pos != std::string::npos);
    return std::strtod(text.c_str() + pos + name.size() + 3, nullptr);
  };

  // Perfect separation ranks the true choice first everywhere.
  write_file(tmp.path("sep.json"), params_json(10.0));
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") +
              " evaluate --params " + tmp.path("sep.json") + " > /dev/null 2> " +
              tmp.path("e0.txt")) == 0);
  CHECK(metric("mrr") == 0.0);

  // The uniform model pays (sum of weights) * ln 2 on two-item sets.
  write_file(tmp.path("uniform.json"), params_json(0.0));
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") +
              " evaluate --params " + tmp.path("uniform.json") +
              " > /dev/null 2> " + tmp.path("e1.txt")) == 0);
  CHECK(metric("nll") == doctest::Approx(4.0 * std::log(2.0)));

  // Parameters for a different item universe are rejected.
  write_file(tmp.path("wrong.json"),
             R"({"spec": {"family": "logit", "per_chooser_intercepts": false,
                 "n": 2, "k": 2, "d_x": 0, "d_y": 0},
                 "u": [0.0, 0.0], "gamma": [], "theta": [], "v": []})");
  CHECK(run(cli() + " --config " + tmp.path("cfg.json") +
            " evaluate --params " + tmp.path("wrong.json") + " > /dev/null 2> " +
            tmp.path("e2.txt")) != 0);
  CHECK(read_file(tmp.path("e2.txt")).find("config_error:") !=
        std::string::npos);
}

TEST_CASE("cli split and propagate emit their csv outputs") {
  TempDir tmp("cli_prop");
  write_file(tmp.path("obs.csv"), kObservations);
  write_file(tmp.path("edges.csv"), kEdges);
  write_file(tmp.path("cfg.json"), base_config(tmp, ",\n  \"rho\": 0.5"));

  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " split 2> " +
              tmp.path("e0.txt")) == 0);
  const std::string split = read_file(tmp.path("out/split.csv"));
  CHECK(split.find("chooser_id,role") != std::string::npos);
  CHECK(split.find("train") != std::string::npos);
  CHECK(split.find("validation") != std::string::npos);
  CHECK(split.find("test") != std::string::npos);

  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " propagate 2> " +
              tmp.path("e1.txt")) == 0);
  const std::string zinf = read_file(tmp.path("out/zinf.csv"));
  CHECK(zinf.find("chooser_id,red,blue,green") != std::string::npos);
}

TEST_CASE("cli experiment writes one row per cell") {
  TempDir tmp("cli_exp");
  write_file(tmp.path("obs.csv"), kObservations);
  write_file(tmp.path("edges.csv"), kEdges);
  write_file(
      tmp.path("cfg.json"),
      base_config(tmp,
                  ",\n  \"methods\": [\"logit\", \"propagation\"],\n"
                  "  \"fractions\": [0.5],\n  \"trials\": 2,\n"
                  "  \"max_epochs\": 10,\n"
                  "  \"grid\": {\"learning_rates\": [0.05],"
                  " \"l2_strengths\": [0.01], \"rhos\": [0.5]}"));
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " experiment 2> " +
              tmp.path("e0.txt")) == 0);
  const std::string results = read_file(tmp.path("out/results.csv"));
  CHECK(results.find("method,train_fraction,trial,test_nll,test_mrr,"
                     "hyperparams") != std::string::npos);
  // header + 2 methods x 1 fraction x 2 trials
  CHECK(std::count(results.begin(), results.end(), '\n') == 5);
  // propagation rows carry no NLL value
  CHECK(results.find("propagation,0.5,0,,") != std::string::npos);

  // Rerunning reproduces the file byte for byte.
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " experiment 2> " +
              tmp.path("e1.txt")) == 0);
  CHECK(read_file(tmp.path("out/results.csv")) == results);
}

TEST_CASE("cli synth emits curves for the tiny plan") {
  TempDir tmp("cli_synth");
  write_file(tmp.path("cfg.json"),
             std::string("{\n  \"out\": \"") + tmp.path("out") +
                 "\",\n  \"seed\": 5,\n"
                 "  \"synth\": {\"n\": 12, \"p\": 0.4, \"k\": 4,"
                 " \"lambdas\": [1.0], \"samples\": [1, 5], \"trials\": 2,"
                 " \"epochs\": 20, \"set_size_min\": 2, \"set_size_max\": 4}\n}\n");
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " synth 2> " +
              tmp.path("e0.txt")) == 0);
  const std::string curves = read_file(tmp.path("out/curves.csv"));
  CHECK(curves.find("lambda,regularized,samples,mse_mean,mse_stderr") !=
        std::string::npos);
  // header + 2 curves x 2 sample counts
  CHECK(std::count(curves.begin(), curves.end(), '\n') == 5);

  // Identical seeds give identical bytes.
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " synth 2> " +
              tmp.path("e1.txt")) == 0);
  CHECK(read_file(tmp.path("out/curves.csv")) == curves);
}

TEST_CASE("cli counterfactual produces counts and winners") {
  TempDir tmp("cli_cf");
  write_file(tmp.path("obs.csv"), kObservations);
  write_file(tmp.path("edges.csv"), kEdges);
  write_file(tmp.path("cfg.json"),
             base_config(tmp,
                         ",\n  \"method\": \"laplacian\",\n"
                         "  \"max_epochs\": 20,\n"
                         "  \"grid\": {\"learning_rates\": [0.05],"
                         " \"l2_strengths\": [0.001], \"lambdas\": [0.5]}"));
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") + " train 2> " +
              tmp.path("e0.txt")) == 0);

  write_file(tmp.path("scenario.json"),
             "{\"kind\": \"replace_all_sets\", \"items\": [\"red\", \"blue\"]}\n");
  write_file(tmp.path("groups.csv"),
             "chooser_id,group\na,g1\nb,g1\nc,g1\nd,g2\ne,g2\nf,g2\n");
  REQUIRE(run(cli() + " --config " + tmp.path("cfg.json") +
              " counterfactual --params " + tmp.path("out/params.json") +
              " --scenario " + tmp.path("scenario.json") + " --groups " +
              tmp.path("groups.csv") + " 2> " + tmp.path("e1.txt")) == 0);

  const std::string counts = read_file(tmp.path("out/counts.csv"));
  CHECK(counts.find("group,item,mean_count,stderr") != std::string::npos);
  // Fixed two-item slate: every group's counts cover exactly red and blue.
  CHECK(counts.find("g1,red,") != std::string::npos);
  CHECK(counts.find("g1,blue,") != std::string::npos);
  CHECK(counts.find("g1,green,0,0") != std::string::npos);
  const std::string winners = read_file(tmp.path("out/winners.csv"));
  CHECK(winners.find("group,item,tied") != std::string::npos);
  CHECK(std::count(winners.begin(), winners.end(), '\n') == 3);
}

TEST_CASE("cli error paths exit nonzero with a coded message") {
  TempDir tmp("cli_err");
  write_file(tmp.path("obs.csv"), kObservations);
  // laplacian without an edges file
  write_file(tmp.path("cfg.json"),
             std::string("{\n  \"paths\": {\"observations\": \"") +
                 tmp.path("obs.csv") +
                 "\"},\n  \"train_fraction\": 0.5,\n  \"method\": "
                 "\"laplacian\",\n  \"out\": \"" +
                 tmp.path("out") + "\"\n}\n");
  CHECK(run(cli() + " --config " + tmp.path("cfg.json") + " train 2> " +
            tmp.path("err.txt")) != 0);
  CHECK(read_file(tmp.path("err.txt")).find("config_error:") !=
        std::string::npos);

  // malformed observation row
  write_file(tmp.path("bad.csv"),
             "observation_id,chooser_id,choice_set,chosen_item\n0,a,x|y,z\n");
  write_file(tmp.path("cfg2.json"),
             std::string("{\n  \"paths\": {\"observations\": \"") +
                 tmp.path("bad.csv") +
                 "\"},\n  \"train_fraction\": 0.5,\n  \"out\": \"" +
                 tmp.path("out") + "\"\n}\n");
  CHECK(run(cli() + " --config " + tmp.path("cfg2.json") + " split 2> " +
            tmp.path("err2.txt")) != 0);
  const std::string err = read_file(tmp.path("err2.txt"));
  CHECK(err.find("schema_error:") != std::string::npos);
  CHECK(err.find("row 0") != std::string::npos);

  // missing config file is a CLI-level failure
  CHECK(run(cli() + " --config /nonexistent.json split 2> /dev/null") != 0);
}

TEST_CASE("cli counterfactual rejects a scenario that empties a ballot") {
  TempDir tmp("cli_cf_empty");
  // Chooser "solo" only ever saw red, so intersecting with blue empties it.
  write_file(tmp.path("obs.csv"),
             "observation_id,chooser_id,choice_set,chosen_item\n"
             "0,solo,red,red\n"
             "1,other,red|blue,blue\n");
  write_file(tmp.path("cfg.json"),
             std::string("{\n  \"paths\": {\"observations\": \"") +
                 tmp.path("obs.csv") + "\"},\n  \"out\": \"" + tmp.path("out") +
                 "\"\n}\n");
  write_file(tmp.path("params.json"),
             R"({"spec": {"family": "logit", "per_chooser_intercepts": false,
                 "n": 2, "k": 2, "d_x": 0, "d_y": 0},
                 "u": [0.1, 0.2], "gamma": [], "theta": [], "v": []})");
  write_file(tmp.path("scenario.json"),
             "{\"kind\": \"intersect_sets\", \"items\": [\"blue\"]}\n");
  write_file(tmp.path("groups.csv"), "chooser_id,group\nsolo,g\nother,g\n");

  CHECK(run(cli() + " --config " + tmp.path("cfg.json") +
            " counterfactual --params " + tmp.path("params.json") +
            " --scenario " + tmp.path("scenario.json") + " --groups " +
            tmp.path("groups.csv") + " 2> " + tmp.path("err.txt")) != 0);
  const std::string err = read_file(tmp.path("err.txt"));
  CHECK(err.find("scenario_error:") != std::string::npos);
  CHECK(err.find("'solo'") != std::string::npos);
}
